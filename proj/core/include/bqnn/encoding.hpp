#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bqnn/types.hpp"

namespace bqnn {

/// Which parameter class the input replaces.  The replaced class has no plain
/// trainables; its per-component values come from the encoding map.
enum class EncodingTarget { eps, g, gs };

enum class EncodingKind {
  amplitude,  ///< theta(x)_i = theta0_i x_i + theta_bias_i
  phase,      ///< theta(x)_i = theta0_i exp(i (phi0_i x_i + phi_bias_i)) + theta_bias_i;
              ///< coupling targets drop the bias term (see real_theta)
};

struct EncodingSpec {
  EncodingTarget target = EncodingTarget::eps;
  EncodingKind kind = EncodingKind::amplitude;
  int dim = 0;               ///< components: modes for eps, pairs for g/gs
  bool train_theta0 = true;  ///< frozen slopes drop out of the trainable set

  /// Coupling targets keep real coefficients: the amplitude map writes the
  /// class magnitude directly, and the phase map rotates a real magnitude
  /// theta0 with no bias term, so |class(x)| = theta0 for every input.
  bool real_theta() const { return target != EncodingTarget::eps; }

  /// The phase map into a coupling class has no theta_bias trainables.
  bool has_bias() const { return !(kind == EncodingKind::phase && real_theta()); }

  /// Number of real trainables.
  int param_count() const;
};

struct EncodingParams {
  VecC theta0;      ///< imaginary parts unused when real_theta()
  VecC theta_bias;
  VecR phi0;        ///< phase kind only (size 0 otherwise)
  VecR phi_bias;

  static EncodingParams zero(const EncodingSpec& spec);
};

/// Class value of component i at scalar input xi in [0, 1].
cd encoded_value(const EncodingSpec& spec, const EncodingParams& p, int i, double xi);

/// Appends (local trainable index, d value / d trainable) pairs for component
/// i.  Indices follow the pack_encoding layout.
void encoded_value_derivatives(const EncodingSpec& spec, const EncodingParams& p, int i,
                               double xi, std::vector<std::pair<int, cd>>& out);

/// Flat layout of the trainables: [theta0][theta_bias][phi0][phi_bias], each
/// contiguous over components, complex entries as re,im.  theta0 is omitted
/// when frozen.
void pack_encoding(const EncodingSpec& spec, const EncodingParams& p, double* dst);
void unpack_encoding(const EncodingSpec& spec, EncodingParams& p, const double* src);
std::vector<std::string> encoding_param_names(const EncodingSpec& spec);

}  // namespace bqnn
