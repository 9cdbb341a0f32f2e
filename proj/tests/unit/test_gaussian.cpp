#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "fedunlearn/gaussian_family.hpp"
#include "fedunlearn/rng.hpp"
#include "test_oracles.hpp"

using namespace fedunlearn;

namespace {

GaussianFamily random_family(std::mt19937_64& rng, double c_eps) {
  GaussianFamily f;
  f.a = {uniform_range(rng, 0.5, 3.0), uniform_range(rng, 0.5, 3.0)};
  f.b = {uniform_range(rng, 0.1, 2.0), uniform_range(rng, 0.1, 2.0)};
  f.theta_hat = {uniform_range(rng, -1.0, 1.0), uniform_range(rng, -1.0, 1.0)};
  f.n_nontarget = 1.0 + static_cast<double>(uniform_below(rng, 50));
  f.n_target = 1.0 + static_cast<double>(uniform_below(rng, 20));
  f.c_eps = c_eps;
  return f;
}

}  // namespace

TEST_CASE("family curvature interpolates between retain and full mixtures") {
  GaussianFamily f;
  f.a = {2.0, 1.0};
  f.b = {1.0, 3.0};
  f.theta_hat = {0.0, 0.0};
  f.n_nontarget = 6.0;
  f.n_target = 2.0;
  f.c_eps = 1.0;
  f.validate(0.5);
  CHECK(f.h(0, 0.0) == doctest::Approx(12.0 / 8.0));
  CHECK(f.h(0, 1.0) == doctest::Approx(14.0 / 8.0));
  CHECK(f.h_prime(0) == doctest::Approx(2.0 / 8.0));
  CHECK(f.sigma(0, 1.0) == doctest::Approx(1.0 / std::sqrt(14.0 / 8.0)));
  const double r0 = (2.0 / 8.0) / (14.0 / 8.0);
  const double r1 = (6.0 / 8.0) / (12.0 / 8.0);
  CHECK(f.tis_sum() == doctest::Approx(r0 * r0 + r1 * r1));
}

TEST_CASE("quadrature Fisher information matches (1/2) * sum of squared ratios") {
  // Appendix-style cross-check: integrating the squared score of the product
  // Gaussian family at t = 1 must reproduce half the squared-ratio sum. The
  // value is independent of the covariance scale c_eps, which cancels between
  // sigma^4 and the score.
  std::mt19937_64 rng(424242);
  for (int rep = 0; rep < 10; ++rep) {
    const GaussianFamily f = random_family(rng, 1.0);
    f.validate(0.01);
    const double quad = oracles::quadrature_fisher(f);
    const double expected = 0.5 * f.tis_sum();
    CHECK(std::fabs(quad - expected) <= 0.01 * std::fabs(expected));
  }
}

TEST_CASE("the Fisher integral is invariant to the covariance scale") {
  std::mt19937_64 rng(7);
  GaussianFamily narrow = random_family(rng, 1.0);
  GaussianFamily wide = narrow;
  wide.c_eps = 2.0;
  const double q_narrow = oracles::quadrature_fisher(narrow);
  const double q_wide = oracles::quadrature_fisher(wide);
  CHECK(std::fabs(q_narrow - q_wide) <= 0.01 * std::fabs(q_narrow));
  // Both equal (1/2) * tis_sum; a prefactor 1/(2 c^4) would be off by 16x here.
  CHECK(std::fabs(q_wide - 0.5 * wide.tis_sum()) <= 0.01 * std::fabs(q_wide));
}

TEST_CASE("family validation rejects broken inputs") {
  GaussianFamily f;
  f.a = {1.0};
  f.b = {1.0, 2.0};
  f.theta_hat = {0.0};
  CHECK_THROWS_AS(f.validate(0.1), std::invalid_argument);

  GaussianFamily g;
  g.a = {0.0, 1.0};
  g.b = {1.0, 1.0};
  g.theta_hat = {0.0, 0.0};
  CHECK_THROWS_AS(g.validate(0.1), std::invalid_argument);
}
