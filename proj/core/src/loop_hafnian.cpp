#include "bqnn/loop_hafnian.hpp"

namespace bqnn {

namespace {

std::vector<cd> symmetrized_entries(const MatC& b, int cap) {
  if (b.rows() != b.cols()) throw std::invalid_argument("loop_hafnian: matrix must be square");
  const int n = static_cast<int>(b.rows());
  if (n > cap || n > kHafnianCap) throw CapacityExceeded("loop_hafnian: matrix size beyond cap");
  if (n == 0) return {};
  if (!b.allFinite()) throw NonFinite("loop_hafnian: non-finite entries");
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw NumericalResidue("loop_hafnian: matrix not symmetric within tolerance");
  std::vector<cd> a(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = 0.5 * (b(i, j) + b(j, i));
  return a;
}

}  // namespace

cd loop_hafnian(const MatC& b, int cap) {
  LoopHafnianTable<cd> table(static_cast<int>(b.rows()), symmetrized_entries(b, cap), cd(1.0, 0.0));
  return table.full();
}

LoopHafnianWorkspace::LoopHafnianWorkspace(const MatC& b, int cap)
    : table_(static_cast<int>(b.rows()), symmetrized_entries(b, cap), cd(1.0, 0.0)) {}

}  // namespace bqnn
