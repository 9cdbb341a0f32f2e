#include "fedunlearn/gaussian_family.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fedunlearn {

double GaussianFamily::h(size_t i, double t) const {
  return (n_nontarget * a[i] + t * n_target * b[i]) / total();
}

double GaussianFamily::h_prime(size_t i) const { return n_target * b[i] / total(); }

double GaussianFamily::sigma(size_t i, double t) const { return c_eps / std::sqrt(h(i, t)); }

double GaussianFamily::log_density(const std::vector<double>& theta, double t) const {
  double acc = 0.0;
  for (size_t i = 0; i < dim(); ++i) {
    const double s = sigma(i, t);
    const double z = (theta[i] - theta_hat[i]) / s;
    acc += -std::log(s) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
  }
  return acc;
}

double GaussianFamily::tis_sum() const {
  double acc = 0.0;
  for (size_t i = 0; i < dim(); ++i) {
    const double r = h_prime(i) / h(i, 1.0);
    acc += r * r;
  }
  return acc;
}

void GaussianFamily::validate(double delta) const {
  if (dim() == 0 || b.size() != dim() || theta_hat.size() != dim()) {
    throw std::invalid_argument("gaussian family: inconsistent coordinate counts");
  }
  if (!(c_eps > 0.0)) throw std::invalid_argument("gaussian family: c_eps must be positive");
  for (size_t i = 0; i < dim(); ++i) {
    if (!(a[i] > 0.0)) throw std::invalid_argument("gaussian family: a must be positive");
    if (!(h(i, 1.0 - delta) > 0.0) || !(h(i, 1.0) > 0.0)) {
      throw std::invalid_argument("gaussian family: curvature not positive on [1-delta, 1]");
    }
  }
}

}  // namespace fedunlearn
