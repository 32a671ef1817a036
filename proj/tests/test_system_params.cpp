#include <doctest.h>

#include <stdexcept>

#include "bqnn/system_params.hpp"

using namespace bqnn;

TEST_CASE("pair indexing round trip") {
  for (int m = 2; m <= 7; ++m) {
    CHECK(SystemParams::pair_count(m) == m * (m - 1) / 2);
    int seen = 0;
    for (int k = 0; k < m; ++k)
      for (int l = k + 1; l < m; ++l) {
        const int idx = SystemParams::pair_index(m, k, l);
        CHECK(idx == seen);
        ++seen;
        const auto [rk, rl] = SystemParams::pair_modes(m, idx);
        CHECK(rk == k);
        CHECK(rl == l);
      }
    CHECK(seen == SystemParams::pair_count(m));
  }
}

TEST_CASE("pair order is row-major over the upper triangle") {
  CHECK(SystemParams::pair_index(4, 0, 1) == 0);
  CHECK(SystemParams::pair_index(4, 0, 3) == 2);
  CHECK(SystemParams::pair_index(4, 1, 2) == 3);
  CHECK(SystemParams::pair_index(4, 2, 3) == 5);
}

TEST_CASE("zero builds consistently sized parameter sets") {
  const SystemParams p = SystemParams::zero(3);
  CHECK(p.modes() == 3);
  CHECK(p.delta.size() == 3);
  CHECK(p.eps.size() == 3);
  CHECK(p.kappa.size() == 3);
  CHECK(p.g.size() == 3);
  CHECK(p.gs.size() == 3);
  CHECK(p.delta.norm() == 0.0);
  CHECK(p.g.norm() == 0.0);
}

TEST_CASE("validate rejects inconsistent shapes and nonpositive loss") {
  SystemParams p = SystemParams::zero(2);
  p.kappa.setConstant(0.2);
  CHECK_NOTHROW(p.validate());

  SUBCASE("kappa must be strictly positive") {
    p.kappa[1] = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("pair vector length must match the mode count") {
    p.g = VecR::Zero(2);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("eps length must match the mode count") {
    p.eps = VecC::Zero(3);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
}
