#pragma once

#include "bqnn/types.hpp"

namespace bqnn {

enum class LossKind { mse, bce_logits, cross_entropy };

/// Scalar loss with its gradient with respect to the logits.
struct LossResult {
  double value = 0.0;
  VecR dlogits;
};

/// Mean squared error over the output components.
LossResult mse_loss(const VecR& y, const VecR& target);

/// Binary cross entropy on a single logit, in the overflow-safe form
///   max(y, 0) - t y + log(1 + exp(-|y|)).
LossResult bce_logits_loss(double logit, double target);

/// Softmax cross entropy against an integer label, via log-sum-exp.
LossResult cross_entropy_loss(const VecR& logits, int label);

/// Dispatcher: target holds the regression target for mse, the 0/1 target for
/// bce (single logit), or the label index for cross entropy.
LossResult evaluate_loss(LossKind kind, const VecR& logits, const VecR& target);

}  // namespace bqnn
