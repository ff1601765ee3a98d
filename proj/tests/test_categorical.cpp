#include <catch2/catch_amalgamated.hpp>

#include "pitchrl/dmpo/categorical.hpp"
#include "pitchrl/numcore/rng.hpp"

using namespace pitchrl;

namespace {

// Brute-force neighbor-split oracle, written independently of the
// implementation: for each value find its bracketing atoms by scan and split
// the mass by inverse distance.
Vec project_oracle(const Vec& values, const Vec& weights, const Vec& grid) {
  Vec out(grid.size(), 0.0);
  for (size_t i = 0; i < values.size(); ++i) {
    double z = values[i];
    if (z <= grid.front()) {
      out.front() += weights[i];
      continue;
    }
    if (z >= grid.back()) {
      out.back() += weights[i];
      continue;
    }
    size_t hi = 1;
    while (grid[hi] < z) ++hi;
    const size_t lo = hi - 1;
    const double gap = grid[hi] - grid[lo];
    out[lo] += weights[i] * (grid[hi] - z) / gap;
    out[hi] += weights[i] * (z - grid[lo]) / gap;
  }
  return out;
}

}  // namespace

TEST_CASE("atom grid") {
  SECTION("canonical support") {
    const Vec g = atom_grid(-150, 150, 51);
    REQUIRE(g.size() == 51);
    REQUIRE(g.front() == -150.0);
    REQUIRE(g.back() == 150.0);
    REQUIRE_THAT(g[1] - g[0], Catch::Matchers::WithinAbs(6.0, 1e-12));
  }
  SECTION("two atoms") {
    REQUIRE(atom_grid(0, 1, 2) == Vec{0.0, 1.0});
  }
  SECTION("symmetric three atoms") {
    const Vec g = atom_grid(-1, 1, 3);
    REQUIRE(g == Vec{-1.0, 0.0, 1.0});
  }
  SECTION("invalid bounds rejected") {
    REQUIRE_THROWS_AS(atom_grid(1, 1, 3), ConfigError);
    REQUIRE_THROWS_AS(atom_grid(0, 1, 1), ConfigError);
  }
}

TEST_CASE("categorical projection") {
  const Vec grid = atom_grid(-150, 150, 51);
  SECTION("grid-aligned inputs are a fixed point") {
    Vec values = grid;
    Vec weights(grid.size(), 1.0 / grid.size());
    const Vec out = categorical_project(values, weights, grid);
    for (size_t i = 0; i < out.size(); ++i)
      REQUIRE_THAT(out[i], Catch::Matchers::WithinAbs(weights[i], 1e-15));
  }
  SECTION("midpoint splits half/half") {
    const Vec out = categorical_project({3.0}, {1.0}, grid);
    // atoms 0 and 6 are indices 25 and 26
    REQUIRE_THAT(out[25], Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE_THAT(out[26], Catch::Matchers::WithinAbs(0.5, 1e-12));
  }
  SECTION("outside support clamps to the edge atom") {
    const Vec out = categorical_project({200.0}, {1.0}, grid);
    REQUIRE_THAT(out.back(), Catch::Matchers::WithinAbs(1.0, 1e-15));
  }
  SECTION("matches the brute-force oracle on random batches") {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
      const int k = 1 + static_cast<int>(rng.uniform_int(60));
      Vec values(k), weights(k);
      double sum = 0.0;
      for (int i = 0; i < k; ++i) {
        values[i] = rng.uniform(-220.0, 220.0);
        weights[i] = rng.uniform(0.0, 1.0);
        sum += weights[i];
      }
      for (double& w : weights) w /= sum;
      const Vec a = categorical_project(values, weights, grid);
      const Vec b = project_oracle(values, weights, grid);
      double mass = 0.0;
      for (size_t i = 0; i < a.size(); ++i) {
        REQUIRE(std::fabs(a[i] - b[i]) < 1e-12);
        mass += a[i];
      }
      REQUIRE(std::fabs(mass - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("n-step distributional target") {
  const Vec grid = atom_grid(-150, 150, 51);
  SECTION("all-zero rewards with delta bootstrap at zero") {
    CategoricalValue boot = delta_at(0.0, grid);
    const CategoricalValue out = n_step_distributional_target(
        {0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}, boot, 0.99, grid);
    REQUIRE_THAT(out.p[25], Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
  SECTION("pure bootstrap discounts by gamma^5") {
    // atom-aligned bootstrap (96 is on the grid) so the transform is exact:
    // 0.99^5 * 96 = 91.295 lands between atoms 90 (idx 40) and 96 (idx 41)
    CategoricalValue boot = delta_at(96.0, grid);
    REQUIRE_THAT(boot.p[41], Catch::Matchers::WithinAbs(1.0, 1e-15));
    const CategoricalValue out = n_step_distributional_target(
        {0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}, boot, 0.99, grid);
    const double z = std::pow(0.99, 5) * 96.0;
    const double hi_w = (z - 90.0) / 6.0;
    REQUIRE_THAT(out.p[41], Catch::Matchers::WithinAbs(hi_w, 1e-12));
    REQUIRE_THAT(out.p[40], Catch::Matchers::WithinAbs(1.0 - hi_w, 1e-12));
    // and the value 0.99^5 * 100 projects with weight (z-90)/6 = 0.849834 on 96
    const Vec proj = categorical_project({std::pow(0.99, 5) * 100.0}, {1.0}, grid);
    REQUIRE_THAT(proj[41], Catch::Matchers::WithinAbs(0.8498341650, 1e-9));
    REQUIRE_THAT(proj[40], Catch::Matchers::WithinAbs(0.1501658350, 1e-9));
  }
  SECTION("terminal truncates and ignores the bootstrap") {
    CategoricalValue boot = delta_at(100.0, grid);
    const CategoricalValue out = n_step_distributional_target(
        {7.5, 0, 0, 0, 0}, {0, 1, 1, 1, 1}, boot, 0.99, grid);
    const CategoricalValue expect = delta_at(7.5, grid);
    for (size_t i = 0; i < out.p.size(); ++i)
      REQUIRE_THAT(out.p[i], Catch::Matchers::WithinAbs(expect.p[i], 1e-12));
  }
}

TEST_CASE("expected value") {
  const Vec grid = atom_grid(-150, 150, 51);
  SECTION("uniform over a symmetric support is zero") {
    CategoricalValue v{Vec(grid.size(), 1.0 / grid.size())};
    REQUIRE_THAT(expected_value(v, grid), Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
  SECTION("delta at an atom") {
    REQUIRE_THAT(expected_value(delta_at(6.0, grid), grid),
                 Catch::Matchers::WithinAbs(6.0, 1e-12));
  }
  SECTION("two-point mixture") {
    Vec p(grid.size(), 0.0);
    p[25] = 0.25;  // atom 0
    p[26] = 0.75;  // atom 6
    REQUIRE_THAT(expected_value(CategoricalValue{p}, grid),
                 Catch::Matchers::WithinAbs(4.5, 1e-12));
  }
}
