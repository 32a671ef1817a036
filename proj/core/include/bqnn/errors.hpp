#pragma once

#include <stdexcept>
#include <string>

namespace bqnn {

/// Eigenvalue spectrum too close to degenerate for a differentiable
/// propagator (the configuration is untrainable as-is).
struct DegenerateSpectrum : std::runtime_error {
  explicit DegenerateSpectrum(const std::string& what) : std::runtime_error(what) {}
};

/// A non-finite value (inf/nan) appeared where a finite one is required.
struct NonFinite : std::runtime_error {
  explicit NonFinite(const std::string& what) : std::runtime_error(what) {}
};

/// Requested combinatorial size exceeds the configured hard cap.
struct CapacityExceeded : std::runtime_error {
  explicit CapacityExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// A quantity that must be real/Hermitian/normalized came out with residue
/// beyond tolerance.
struct NumericalResidue : std::runtime_error {
  explicit NumericalResidue(const std::string& what) : std::runtime_error(what) {}
};

/// Truncated Fock-space population leaked into the top level beyond tolerance.
struct TruncationLeak : std::runtime_error {
  explicit TruncationLeak(const std::string& what) : std::runtime_error(what) {}
};

/// Bad configuration file / incompatible checkpoint schema.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bqnn
