#include "bqnn/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace bqnn {

LossResult mse_loss(const VecR& y, const VecR& target) {
  if (y.size() != target.size())
    throw std::invalid_argument("mse_loss: size mismatch");
  const int n = static_cast<int>(y.size());
  LossResult out;
  const VecR diff = y - target;
  out.value = diff.squaredNorm() / n;
  out.dlogits = (2.0 / n) * diff;
  return out;
}

LossResult bce_logits_loss(double logit, double target) {
  LossResult out;
  out.value = std::max(logit, 0.0) - target * logit + std::log1p(std::exp(-std::abs(logit)));
  out.dlogits.resize(1);
  const double sigmoid = 1.0 / (1.0 + std::exp(-logit));
  out.dlogits[0] = sigmoid - target;
  return out;
}

LossResult cross_entropy_loss(const VecR& logits, int label) {
  const int n = static_cast<int>(logits.size());
  if (label < 0 || label >= n)
    throw std::invalid_argument("cross_entropy_loss: label out of range");
  const double peak = logits.maxCoeff();
  const VecR shifted = (logits.array() - peak).exp();
  const double total = shifted.sum();
  LossResult out;
  out.value = peak + std::log(total) - logits[label];
  out.dlogits = shifted / total;
  out.dlogits[label] -= 1.0;
  return out;
}

LossResult evaluate_loss(LossKind kind, const VecR& logits, const VecR& target) {
  switch (kind) {
    case LossKind::mse:
      return mse_loss(logits, target);
    case LossKind::bce_logits:
      if (logits.size() != 1)
        throw std::invalid_argument("bce loss expects a single logit");
      return bce_logits_loss(logits[0], target[0]);
    case LossKind::cross_entropy:
      return cross_entropy_loss(logits, static_cast<int>(std::lround(target[0])));
  }
  throw std::logic_error("evaluate_loss: unknown kind");
}

}  // namespace bqnn
