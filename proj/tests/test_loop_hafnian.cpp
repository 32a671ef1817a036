#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "bqnn/errors.hpp"
#include "bqnn/loop_hafnian.hpp"
#include "test_util.hpp"

using namespace bqnn;

TEST_CASE("small closed forms") {
  SUBCASE("empty matrix") { CHECK(loop_hafnian(MatC::Zero(0, 0)) == cd(1.0, 0.0)); }
  SUBCASE("single entry is its own loop") {
    MatC b(1, 1);
    b(0, 0) = cd(2.0, -1.0);
    CHECK(loop_hafnian(b) == b(0, 0));
  }
  SUBCASE("two modes: loop pair plus the cross term") {
    MatC b(2, 2);
    b << cd(1.0, 0.5), cd(-0.3, 0.2), cd(-0.3, 0.2), cd(0.7, -0.1);
    const cd want = b(0, 0) * b(1, 1) + b(0, 1);
    CHECK(std::abs(loop_hafnian(b) - want) < 1e-15);
  }
}

TEST_CASE("diagonal matrices reduce to the all-loops product") {
  std::mt19937_64 rng(3);
  MatC b = MatC::Zero(5, 5);
  cd prod(1.0, 0.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 5; ++i) {
    b(i, i) = cd(u(rng), u(rng));
    prod *= b(i, i);
  }
  CHECK(std::abs(loop_hafnian(b) - prod) < 1e-14);
}

TEST_CASE("zero diagonal turns off loops") {
  std::mt19937_64 rng(5);
  SUBCASE("odd size has no perfect matching") {
    MatC b = test::random_symmetric(5, rng);
    b.diagonal().setZero();
    CHECK(std::abs(loop_hafnian(b)) < 1e-14);
  }
  SUBCASE("4x4 hafnian closed form") {
    MatC b = test::random_symmetric(4, rng);
    b.diagonal().setZero();
    const cd want = b(0, 1) * b(2, 3) + b(0, 2) * b(1, 3) + b(0, 3) * b(1, 2);
    CHECK(std::abs(loop_hafnian(b) - want) < 1e-14);
  }
}

TEST_CASE("subset recursion matches explicit matching enumeration") {
  std::mt19937_64 rng(17);
  for (int n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      const MatC b = test::random_symmetric(n, rng);
      const cd want = test::matchings_with_loops(b);
      const cd got = loop_hafnian(b);
      CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("input validation") {
  std::mt19937_64 rng(23);
  SUBCASE("asymmetric input is rejected") {
    MatC b = test::random_symmetric(3, rng);
    b(0, 1) += cd(1e-3, 0.0);
    CHECK_THROWS_AS(loop_hafnian(b), NumericalResidue);
  }
  SUBCASE("tiny asymmetry is symmetrized away") {
    MatC b = test::random_symmetric(3, rng);
    b(0, 1) += cd(1e-13, 0.0);
    CHECK_NOTHROW(loop_hafnian(b));
  }
  SUBCASE("size cap") {
    const MatC b = MatC::Zero(kHafnianCap + 2, kHafnianCap + 2);
    CHECK_THROWS_AS(loop_hafnian(b), CapacityExceeded);
    CHECK_THROWS_AS(loop_hafnian(test::random_symmetric(4, rng), 3), CapacityExceeded);
  }
  SUBCASE("non-finite entries") {
    MatC b = test::random_symmetric(2, rng);
    b(0, 0) = cd(std::numeric_limits<double>::quiet_NaN(), 0.0);
    CHECK_THROWS_AS(loop_hafnian(b), NonFinite);
  }
}

TEST_CASE("workspace sub-hafnians equal hafnians of deleted submatrices") {
  std::mt19937_64 rng(29);
  const int n = 6;
  const MatC b = test::random_symmetric(n, rng);
  LoopHafnianWorkspace ws(b);
  CHECK(std::abs(ws.full() - loop_hafnian(b)) < 1e-14);

  auto drop = [&](std::vector<int> gone) {
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
      if (std::find(gone.begin(), gone.end(), i) == gone.end()) keep.push_back(i);
    MatC sub(keep.size(), keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r)
      for (std::size_t c = 0; c < keep.size(); ++c) sub(r, c) = b(keep[r], keep[c]);
    return sub;
  };

  for (int j = 0; j < n; ++j)
    CHECK(std::abs(ws.minus(j) - loop_hafnian(drop({j}))) < 1e-13);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) CHECK(std::abs(ws.minus(i, j) - loop_hafnian(drop({i, j}))) < 1e-13);
}

TEST_CASE("repeated-pair recursion collapses the expanded matrix") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 4; ++trial) {
    const cd a(u(rng), u(rng)), bb(u(rng), u(rng)), d(u(rng), u(rng));
    const cd g1(u(rng), u(rng)), g2(u(rng), u(rng));
    for (int n = 0; n <= 7; ++n) {
      // rows 0..n-1 are copies of type 1, rows n..2n-1 copies of type 2
      MatC big(2 * n, 2 * n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          big(i, j) = a;
          big(i, n + j) = bb;
          big(n + i, j) = bb;
          big(n + i, n + j) = d;
        }
      for (int i = 0; i < n; ++i) {
        big(i, i) = g1;
        big(n + i, n + i) = g2;
      }
      const cd got = repeated_pair_loop_hafnian<cd>(a, bb, d, g1, g2, n, cd(1.0, 0.0));
      if (n == 0) {
        CHECK(got == cd(1.0, 0.0));
        continue;
      }
      const cd want = loop_hafnian(big);
      CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST_CASE("generic table works over plain doubles") {
  // integer-valued check: all-ones 4x4 counts matchings with loops, 10 total
  std::vector<double> ones(16, 1.0);
  LoopHafnianTable<double> table(4, ones, 1.0);
  CHECK(table.full() == doctest::Approx(10.0));
}
