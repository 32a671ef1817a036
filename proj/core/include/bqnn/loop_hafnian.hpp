#pragma once

#include <bit>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "bqnn/errors.hpp"
#include "bqnn/types.hpp"

namespace bqnn {

/// Hard cap on the matrix size of the subset recursion: the bitmask state
/// space doubles per row, so this bounds both time and memo memory.
inline constexpr int kHafnianCap = 24;

/// Loop hafnian of a symmetric n x n matrix over any ring-like scalar:
/// sum over perfect matchings with loops allowed, where a loop at i
/// contributes the diagonal entry a(i,i).  Laplace expansion on the lowest
/// active index with a subset-keyed memo; only reachable subsets are stored.
///
/// Scalar needs: copy, S+S, S*S, and a multiplicative identity passed in.
template <class Scalar>
class LoopHafnianTable {
 public:
  LoopHafnianTable(int n, std::vector<Scalar> entries_row_major, Scalar one)
      : n_(n), a_(std::move(entries_row_major)), one_(std::move(one)) {
    if (n_ < 0 || n_ > kHafnianCap) throw CapacityExceeded("loop hafnian: matrix size beyond cap");
    memo_.reserve(64);
  }

  const Scalar& of_mask(std::uint32_t mask) {
    auto it = memo_.find(mask);
    if (it != memo_.end()) return it->second;
    Scalar value = one_;
    if (mask != 0) {
      const int c = std::countr_zero(mask);
      const std::uint32_t rest = mask & (mask - 1);  // clear lowest bit
      value = at(c, c) * of_mask(rest);
      for (std::uint32_t bits = rest; bits != 0; bits &= bits - 1) {
        const int j = std::countr_zero(bits);
        value = value + at(j, c) * of_mask(rest & ~(std::uint32_t{1} << j));
      }
    }
    return memo_.emplace(mask, std::move(value)).first->second;
  }

  const Scalar& full() { return of_mask(full_mask()); }

  /// Sub-hafnian with one row/column removed.
  const Scalar& minus(int j) { return of_mask(full_mask() & ~(std::uint32_t{1} << j)); }

  /// Sub-hafnian with two rows/columns removed (i != j).
  const Scalar& minus(int i, int j) {
    return of_mask(full_mask() & ~(std::uint32_t{1} << i) & ~(std::uint32_t{1} << j));
  }

  int size() const { return n_; }

 private:
  const Scalar& at(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  std::uint32_t full_mask() const {
    return n_ == 0 ? 0u : (n_ == 32 ? ~0u : ((std::uint32_t{1} << n_) - 1));
  }

  int n_;
  std::vector<Scalar> a_;
  Scalar one_;
  std::unordered_map<std::uint32_t, Scalar> memo_;
};

/// Loop hafnian of a complex symmetric matrix.  The input is checked to be
/// symmetric within 1e-9 (relative) and is symmetrized before expansion.
/// Throws CapacityExceeded above the size cap.
cd loop_hafnian(const MatC& b, int cap = kHafnianCap);

/// Shared-memo workspace over a fixed matrix, for the analytic gradient's
/// sub-hafnian queries.
class LoopHafnianWorkspace {
 public:
  explicit LoopHafnianWorkspace(const MatC& b, int cap = kHafnianCap);

  cd full() { return table_.full(); }
  cd minus(int j) { return table_.minus(j); }
  cd minus(int i, int j) { return table_.minus(i, j); }
  int size() const { return table_.size(); }

 private:
  LoopHafnianTable<cd> table_;
};

/// Loop hafnian of the 2n x 2n matrix formed by repeating a symmetric 2x2
/// block structure n times per row type, with per-type loop (diagonal) values
/// gamma1/gamma2: all copies of a type are identical, so the subset recursion
/// collapses onto repetition counts (p, q) and runs in O(n^2).  This is how
/// single-mode Fock probabilities reach photon numbers far beyond the general
/// cap.  H(p, q) table recursion:
///   H(0, 0) = 1
///   H(p, q) = gamma1 H(p-1, q) + (p-1) a H(p-2, q) + q b H(p-1, q-1),  p > 0
///   H(0, q) = gamma2 H(0, q-1) + (q-1) d H(0, q-2)
template <class Scalar>
Scalar repeated_pair_loop_hafnian(const Scalar& a, const Scalar& b, const Scalar& d,
                                  const Scalar& gamma1, const Scalar& gamma2, int n,
                                  const Scalar& one) {
  if (n < 0) throw std::invalid_argument("repeated_pair_loop_hafnian: n >= 0");
  if (n == 0) return one;
  const int w = n + 1;
  std::vector<Scalar> h(static_cast<std::size_t>(w) * w, one);
  auto at = [&](int p, int q) -> Scalar& { return h[static_cast<std::size_t>(p) * w + q]; };
  for (int q = 1; q <= n; ++q) {
    Scalar v = gamma2 * at(0, q - 1);
    if (q >= 2) v = v + (d * static_cast<double>(q - 1)) * at(0, q - 2);
    at(0, q) = v;
  }
  for (int p = 1; p <= n; ++p)
    for (int q = 0; q <= n; ++q) {
      Scalar v = gamma1 * at(p - 1, q);
      if (p >= 2) v = v + (a * static_cast<double>(p - 1)) * at(p - 2, q);
      if (q >= 1) v = v + (b * static_cast<double>(q)) * at(p - 1, q - 1);
      at(p, q) = v;
    }
  return at(n, n);
}

}  // namespace bqnn
