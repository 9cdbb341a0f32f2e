#pragma once

#include <cstddef>
#include <vector>

namespace fedunlearn {

/// Toy one-parameter family of diagonal-Gaussian parameter distributions used
/// to cross-check the information score against direct numerical integration.
/// Coordinate i has curvature h_i(t) = (n_nontarget*a_i + t*n_target*b_i) / n
/// and standard deviation sigma_i(t) = c_eps / sqrt(h_i(t)) around center
/// theta_hat_i.
struct GaussianFamily {
  std::vector<double> a;          // retain-side curvature, a_i > 0
  std::vector<double> b;          // forget-side curvature, b_i >= 0
  std::vector<double> theta_hat;  // distribution centers
  double n_nontarget = 1.0;
  double n_target = 1.0;
  double c_eps = 1.0;

  size_t dim() const { return a.size(); }
  double total() const { return n_nontarget + n_target; }

  double h(size_t i, double t) const;
  double h_prime(size_t i) const;  // d h_i / dt, constant in t
  double sigma(size_t i, double t) const;

  /// log of the product density at theta for embedding value t.
  double log_density(const std::vector<double>& theta, double t) const;

  /// Closed-form sum of squared ratios, sum_i (h_i'(1)/h_i(1))^2.
  double tis_sum() const;

  /// Positivity of h_i(t) on t in [1 - delta, 1]; throws std::invalid_argument.
  void validate(double delta) const;
};

}  // namespace fedunlearn
