#include "bqnn/forward.hpp"

#include <random>
#include <stdexcept>

#include "bqnn/dynamics.hpp"

namespace bqnn {

VecR upload_slice(const VecR& x, int upload, int slice_len) {
  if (slice_len <= 0) return x;
  if (static_cast<Eigen::Index>(slice_len) * (upload + 1) > x.size())
    throw std::invalid_argument("upload_slice: input shorter than the upload slices");
  return x.segment(static_cast<Eigen::Index>(slice_len) * upload, slice_len);
}

int predict(LossKind kind, const VecR& logits) {
  if (logits.size() == 1) {
    const double threshold = kind == LossKind::bce_logits ? 0.0 : 0.5;
    return logits[0] > threshold ? 1 : 0;
  }
  int best = 0;
  for (int i = 1; i < logits.size(); ++i)
    if (logits[i] > logits[best]) best = i;  // ties keep the lowest index
  return best;
}

SampleForward forward_sample(const Model& model, const ForwardOptions& opt, const VecR& x,
                             const VecR& target) {
  TangentState ts = TangentState::vacuum(model.modes(), model.dyn_count());
  for (int r = 0; r < model.uploads(); ++r) {
    const VecR slice = upload_slice(x, r, opt.slice_len);
    const DriftSpectrum spec =
        decompose_drift(model.system_for(r, slice), DegeneracyGuard::value_only);
    ts = evolve_segment_with_tangents(ts, spec, opt.dt, model.fresh_effects(r, slice));
  }
  SampleForward out;
  FeatureSet fs = measure_features(ts, opt.plan);
  out.features = std::move(fs.value);
  out.jac = std::move(fs.jac);
  out.logits = model.logits(out.features);
  out.prediction = predict(opt.loss, out.logits);
  out.loss = evaluate_loss(opt.loss, out.logits, target);
  return out;
}

VecR forward_features(const Model& model, const ForwardOptions& opt, const VecR& x) {
  GaussianState state = GaussianState::vacuum(model.modes());
  for (int r = 0; r < model.uploads(); ++r) {
    const VecR slice = upload_slice(x, r, opt.slice_len);
    const DriftSpectrum spec =
        decompose_drift(model.system_for(r, slice), DegeneracyGuard::value_only);
    state = evolve_segment(state, make_propagator(spec, opt.dt));
  }
  return measure_features_value(state, opt.plan);
}

void accumulate_sample_gradient(const Model& model, const SampleForward& fwd, VecR& grad) {
  if (static_cast<int>(grad.size()) != model.trainable_count())
    throw std::invalid_argument("accumulate_sample_gradient: gradient size mismatch");
  const VecR back = model.readout_w.transpose() * fwd.loss.dlogits;
  grad.head(model.dyn_count()).noalias() += fwd.jac.transpose() * back;
  int pos = model.dyn_count();
  for (int o = 0; o < model.spec().outputs; ++o)
    for (int f = 0; f < model.spec().features; ++f)
      grad[pos++] += fwd.loss.dlogits[o] * fwd.features[f];
  for (int o = 0; o < model.spec().outputs; ++o) grad[pos++] += fwd.loss.dlogits[o];
}

StepResult forward_step(const Model& model, const ForwardOptions& opt, TangentState& state,
                        double x, const VecR& target, VecR* grad) {
  const VecR slice = VecR::Constant(1, x);
  const DriftSpectrum spec =
      decompose_drift(model.system_for(0, slice), DegeneracyGuard::value_only);
  state = evolve_segment_with_tangents(state, spec, opt.dt, model.fresh_effects(0, slice));

  SampleForward fwd;
  FeatureSet fs = measure_features(state, opt.plan);
  fwd.features = std::move(fs.value);
  fwd.jac = std::move(fs.jac);
  fwd.logits = model.logits(fwd.features);
  fwd.prediction = predict(opt.loss, fwd.logits);
  fwd.loss = evaluate_loss(opt.loss, fwd.logits, target);
  if (grad) accumulate_sample_gradient(model, fwd, *grad);

  StepResult out;
  out.logits = std::move(fwd.logits);
  out.prediction = fwd.prediction;
  out.loss = std::move(fwd.loss);
  return out;
}

StepResult forward_step_value(const Model& model, const ForwardOptions& opt,
                              GaussianState& state, double x, const VecR& target) {
  const VecR slice = VecR::Constant(1, x);
  const DriftSpectrum spec =
      decompose_drift(model.system_for(0, slice), DegeneracyGuard::value_only);
  state = evolve_segment(state, make_propagator(spec, opt.dt));
  StepResult out;
  out.logits = model.logits(measure_features_value(state, opt.plan));
  out.prediction = predict(opt.loss, out.logits);
  out.loss = evaluate_loss(opt.loss, out.logits, target);
  return out;
}

RealWithGrad photon_regularizer(const Model& model, const ForwardOptions& opt, double beta,
                                double n_target) {
  const int s = model.dyn_count();
  RealWithGrad total;
  total.grad = VecR::Zero(s);

  for (const double probe : {0.0, 1.0}) {
    const VecR x = VecR::Constant(std::max(opt.input_dim, 1), probe);
    TangentState ts = TangentState::vacuum(model.modes(), s);
    double nbar = 0.0;
    VecR dnbar = VecR::Zero(s);
    for (int r = 0; r < model.uploads(); ++r) {
      const VecR slice = upload_slice(x, r, opt.slice_len);
      const SystemParams sp = model.system_for(r, slice);
      const FreshEffects fresh = model.fresh_effects(r, slice);
      const RealWithGrad seg =
          time_averaged_photon_number_with_tangents(ts, sp, opt.dt, opt.reg_samples, fresh);
      nbar += seg.value;
      dnbar += seg.grad;
      if (r + 1 < model.uploads()) {
        const DriftSpectrum spec = decompose_drift(sp, DegeneracyGuard::value_only);
        ts = evolve_segment_with_tangents(ts, spec, opt.dt, fresh);
      }
    }
    nbar /= model.uploads();
    dnbar /= model.uploads();
    const double miss = nbar - n_target;
    total.value += miss * miss;
    total.grad += 2.0 * miss * dnbar;
  }
  total.value *= beta / 2.0;
  total.grad *= beta / 2.0;
  return total;
}

VecR sample_features(const VecR& probabilities, std::int64_t shots, std::uint64_t seed) {
  if (shots <= 0) throw std::invalid_argument("sample_features: shots must be positive");
  std::mt19937_64 rng(seed);
  VecR out(probabilities.size());
  for (int f = 0; f < probabilities.size(); ++f) {
    const double p = std::min(std::max(probabilities[f], 0.0), 1.0);
    std::binomial_distribution<std::int64_t> dist(shots, p);
    out[f] = static_cast<double>(dist(rng)) / static_cast<double>(shots);
  }
  return out;
}

}  // namespace bqnn
