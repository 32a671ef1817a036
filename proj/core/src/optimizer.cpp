#include "bqnn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "bqnn/errors.hpp"

namespace bqnn {

Adam::Adam(VecR learning_rates, AdamOptions opts)
    : lr_(std::move(learning_rates)), opts_(opts) {
  if ((lr_.array() < 0.0).any())
    throw std::invalid_argument("Adam: negative learning rate");
  m_ = VecR::Zero(lr_.size());
  v_ = VecR::Zero(lr_.size());
}

void Adam::step(VecR& params, const VecR& grad) {
  if (params.size() != lr_.size() || grad.size() != lr_.size())
    throw std::invalid_argument("Adam::step: size mismatch");
  if (!grad.allFinite()) throw NonFinite("Adam::step: non-finite gradient");

  ++step_;
  m_ = opts_.beta1 * m_ + (1.0 - opts_.beta1) * grad;
  v_ = opts_.beta2 * v_ + (1.0 - opts_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(step_));
  params.array() -=
      lr_.array() * (m_.array() / c1) / ((v_.array() / c2).sqrt() + opts_.eps);
}

void Adam::restore(std::int64_t step, VecR m, VecR v) {
  if (m.size() != lr_.size() || v.size() != lr_.size())
    throw std::invalid_argument("Adam::restore: size mismatch");
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace bqnn
