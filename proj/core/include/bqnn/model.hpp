#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bqnn/clamping.hpp"
#include "bqnn/encoding.hpp"
#include "bqnn/gradients.hpp"
#include "bqnn/system_params.hpp"
#include "bqnn/types.hpp"

namespace bqnn {

/// Per-group learning rates; encoding coefficients inherit the rate of the
/// class they replace.
struct LearningRates {
  double delta = 0.1;
  double eps = 0.1;
  double g = 0.1;
  double gs = 0.1;
  double readout_w = 0.01;
  double readout_b = 0.01;

  double encoding(EncodingTarget t) const {
    switch (t) {
      case EncodingTarget::eps: return eps;
      case EncodingTarget::g: return g;
      case EncodingTarget::gs: return gs;
    }
    return eps;
  }
};

struct ModelSpec {
  int modes = 2;
  int uploads = 1;
  int features = 1;  ///< readout input width (measurement plan size)
  int outputs = 1;
  std::optional<EncodingSpec> encoding;  ///< dim is filled in from modes/target
};

/// One upload's control parameters, internal units.  The encoded class keeps
/// its storage but is ignored in favor of the encoding map.
struct UploadParams {
  VecR delta;
  VecC eps;
  VecR g;
  VecC gs;
  EncodingParams enc;
};

/// Clamp configuration, internal units.  gs_max is required whenever g or gs
/// is encoded; without it plain couplings fall back to the midpoint rule.
struct ClampConfig {
  double g_max = 50.0;  ///< 500 MHz
  std::optional<double> gs_max;
};

/// Published per-upload parameter-count formula: 3 M (M - 1) / 2 + 3 M.
int per_upload_parameter_formula(int modes);

/// Trainable state of the network: per-upload control parameters plus the
/// linear readout.  Cavity losses kappa are physical constants, never
/// trained.  The flat ordering is
///   upload 0 [delta | eps | g | gs | encoding] ... upload R-1 [...] | W | b
/// with the encoded class omitted and complex values split re, im.  The
/// upload blocks are exactly the forward-mode tangent batch.
class Model {
 public:
  Model(ModelSpec spec, LearningRates lr);

  const ModelSpec& spec() const { return spec_; }
  int modes() const { return spec_.modes; }
  int uploads() const { return spec_.uploads; }
  bool encodes(EncodingTarget t) const {
    return spec_.encoding && spec_.encoding->target == t;
  }
  const std::optional<EncodingSpec>& encoding() const { return spec_.encoding; }

  VecR kappa;                         ///< internal units, fixed
  std::vector<UploadParams> upload;   ///< size spec.uploads
  MatR readout_w;                     ///< outputs x features
  VecR readout_b;

  int per_upload_count() const { return per_upload_count_; }
  int dyn_count() const { return spec_.uploads * per_upload_count_; }
  int readout_count() const { return spec_.outputs * (spec_.features + 1); }
  int trainable_count() const { return dyn_count() + readout_count(); }

  VecR flatten() const;
  void unflatten(const VecR& flat);
  VecR lr_vector() const;
  std::vector<std::string> param_names() const;

  /// System of one upload with the encoded class evaluated at x_slice
  /// (component i reads x_slice[i mod len]).
  SystemParams system_for(int upload_index, const VecR& x_slice) const;

  /// Tangent-indexed parameter effects of one upload's segment.  Indices are
  /// positions in the flat vector (which coincide with tangent columns for
  /// the dynamical block).
  FreshEffects fresh_effects(int upload_index, const VecR& x_slice) const;

  VecR logits(const VecR& features) const;

  /// Project all uploads back into the stable coupling region; returns the
  /// number of components moved.
  int clamp_step(const ClampConfig& config);

 private:
  void check_encoding_combo() const;

  ModelSpec spec_;
  LearningRates lr_;
  int pairs_;
  int per_upload_count_;
  int off_eps_, off_g_, off_gs_, off_enc_;  ///< -1 when the class is encoded
};

}  // namespace bqnn
