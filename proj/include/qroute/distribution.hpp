#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qroute/error.hpp"

namespace qroute {

/// Entries this far below zero are treated as rounding noise and clamped.
inline constexpr double kPmfClampTolerance = 1e-15;
/// Allowed deviation of the total mass from one.
inline constexpr double kPmfMassTolerance = 1e-9;
/// Per-entry tolerance used when comparing two distributions.
inline constexpr double kDistributionEqualityTolerance = 1e-9;

/// Probability mass function over the number of simultaneous entanglements,
/// support 0..cap.
class Distribution {
 public:
  Distribution() : pmf_{1.0} {}

  explicit Distribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {
    if (pmf_.empty()) throw InternalError("distribution needs at least one entry");
    double total = 0.0;
    for (std::size_t k = 0; k < pmf_.size(); ++k) {
      double& x = pmf_[k];
      if (!std::isfinite(x)) throw InternalError("non-finite probability at k=" + std::to_string(k));
      if (x < 0.0) {
        if (x < -kPmfClampTolerance) {
          throw InternalError("negative probability " + std::to_string(x) + " at k=" + std::to_string(k));
        }
        x = 0.0;
      }
      total += x;
    }
    if (std::abs(total - 1.0) > kPmfMassTolerance) {
      throw InternalError("distribution mass " + std::to_string(total) + " differs from 1");
    }
  }

  static Distribution point_mass(int cap, int k) {
    if (cap < 0 || k < 0 || k > cap) throw ValidationError("point mass outside support");
    std::vector<double> pmf(static_cast<std::size_t>(cap) + 1, 0.0);
    pmf[static_cast<std::size_t>(k)] = 1.0;
    return Distribution(std::move(pmf));
  }

  int cap() const { return static_cast<int>(pmf_.size()) - 1; }
  std::span<const double> pmf() const { return pmf_; }

  /// Probability of exactly k; zero outside the support.
  double operator[](int k) const {
    if (k < 0 || k > cap()) return 0.0;
    return pmf_[static_cast<std::size_t>(k)];
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t k = 1; k < pmf_.size(); ++k) m += static_cast<double>(k) * pmf_[k];
    return m;
  }

  /// Largest per-entry deviation, padding the shorter support with zeros.
  friend double max_abs_diff(const Distribution& x, const Distribution& y) {
    const int top = std::max(x.cap(), y.cap());
    double worst = 0.0;
    for (int k = 0; k <= top; ++k) worst = std::max(worst, std::abs(x[k] - y[k]));
    return worst;
  }

  friend bool approx_equal(const Distribution& x, const Distribution& y,
                           double tol = kDistributionEqualityTolerance) {
    return max_abs_diff(x, y) <= tol;
  }

 private:
  std::vector<double> pmf_;
};

}  // namespace qroute
