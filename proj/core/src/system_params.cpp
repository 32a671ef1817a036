#include "bqnn/system_params.hpp"

#include <stdexcept>

namespace bqnn {

int SystemParams::pair_index(int m, int k, int l) {
  if (k < 0 || l <= k || l >= m) throw std::invalid_argument("pair_index: need 0 <= k < l < modes");
  return k * (2 * m - k - 1) / 2 + (l - k - 1);
}

std::pair<int, int> SystemParams::pair_modes(int m, int index) {
  for (int k = 0; k < m; ++k) {
    int row = m - k - 1;  // pairs starting at k
    if (index < row) return {k, k + 1 + index};
    index -= row;
  }
  throw std::invalid_argument("pair_modes: index out of range");
}

SystemParams SystemParams::zero(int modes) {
  SystemParams p;
  p.delta = VecR::Zero(modes);
  p.eps = VecC::Zero(modes);
  p.kappa = VecR::Ones(modes);
  p.g = VecR::Zero(pair_count(modes));
  p.gs = VecC::Zero(pair_count(modes));
  return p;
}

void SystemParams::validate() const {
  const int m = modes();
  if (m < 1) throw std::invalid_argument("SystemParams: need at least one mode");
  if (eps.size() != m || kappa.size() != m)
    throw std::invalid_argument("SystemParams: eps/kappa size mismatch");
  const int pairs = pair_count(m);
  if (g.size() != pairs || gs.size() != pairs)
    throw std::invalid_argument("SystemParams: pair vector size mismatch");
  for (int k = 0; k < m; ++k)
    if (!(kappa[k] > 0.0)) throw std::invalid_argument("SystemParams: kappa must be > 0");
}

}  // namespace bqnn
