#pragma once

#include <cstdint>

#include "bqnn/types.hpp"

namespace bqnn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction and a per-parameter learning rate vector (the
/// flattened per-group rates).  Rejects non-finite gradients instead of
/// letting them poison the moments.
class Adam {
 public:
  explicit Adam(VecR learning_rates, AdamOptions opts = {});

  void step(VecR& params, const VecR& grad);

  int size() const { return static_cast<int>(lr_.size()); }
  std::int64_t step_count() const { return step_; }
  const VecR& first_moment() const { return m_; }
  const VecR& second_moment() const { return v_; }
  const VecR& learning_rates() const { return lr_; }

  /// Reinstall serialized state (checkpoint restore).
  void restore(std::int64_t step, VecR m, VecR v);

 private:
  VecR lr_;
  AdamOptions opts_;
  std::int64_t step_ = 0;
  VecR m_, v_;
};

}  // namespace bqnn
