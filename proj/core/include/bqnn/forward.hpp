#pragma once

#include <cstdint>

#include "bqnn/gradients.hpp"
#include "bqnn/losses.hpp"
#include "bqnn/model.hpp"

namespace bqnn {

struct ForwardOptions {
  double dt = 1.0;  ///< segment duration, internal units
  MeasurementPlan plan;
  LossKind loss = LossKind::mse;
  int input_dim = 1;
  int slice_len = 0;     ///< features per upload; 0 feeds the whole input to every upload
  int reg_samples = 5;   ///< time grid per segment for the photon regularizer
};

/// The part of x consumed by one upload.
VecR upload_slice(const VecR& x, int upload, int slice_len);

/// Class decision from logits: single output thresholds (0.5 for mse on 0/1
/// targets, 0 for a bce logit), multi-output takes the lowest-index argmax.
int predict(LossKind kind, const VecR& logits);

struct SampleForward {
  VecR features;
  MatR jac;  ///< features x dyn trainables
  VecR logits;
  int prediction = 0;
  LossResult loss;
};

/// Full differentiated pass for one sample: vacuum start, one segment per
/// upload, feature measurement, linear readout, loss.
SampleForward forward_sample(const Model& model, const ForwardOptions& opt, const VecR& x,
                             const VecR& target);

/// Value-only pass (no tangents), for evaluation.
VecR forward_features(const Model& model, const ForwardOptions& opt, const VecR& x);

/// Adds d loss / d flat onto grad (dynamical block through the feature
/// Jacobian, readout in closed form).
void accumulate_sample_gradient(const Model& model, const SampleForward& fwd, VecR& grad);

/// One step of a sequential stream: evolves the carried state by one segment
/// driven by scalar input x, measures, and optionally accumulates the
/// gradient.  Returns the step loss result.
struct StepResult {
  VecR logits;
  int prediction = 0;
  LossResult loss;
};

StepResult forward_step(const Model& model, const ForwardOptions& opt, TangentState& state,
                        double x, const VecR& target, VecR* grad);

/// Value-only sequential step.
StepResult forward_step_value(const Model& model, const ForwardOptions& opt,
                              GaussianState& state, double x, const VecR& target);

/// Mean photon-number regularizer over the constant probe inputs 0 and 1:
///   beta * mean_probe (Nbar(probe) - n_target)^2,
/// Nbar averaged over time (all upload segments, from vacuum) and modes.
/// The gradient covers the dynamical block of the flat layout.
RealWithGrad photon_regularizer(const Model& model, const ForwardOptions& opt, double beta,
                                double n_target);

/// Empirical feature estimate: each probability replaced by a seeded
/// binomial draw count / shots.
VecR sample_features(const VecR& probabilities, std::int64_t shots, std::uint64_t seed);

}  // namespace bqnn
