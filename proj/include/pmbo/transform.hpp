#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pmbo/error.hpp"

namespace pmbo {

/// Per-dimension min-max map from the box [lb, ub] onto [-1, 1]^m, with an
/// optional log10 scaling for dimensions spanning orders of magnitude.
class DomainTransform {
 public:
  DomainTransform() = default;

  DomainTransform(Eigen::VectorXd lower, Eigen::VectorXd upper, std::vector<bool> log_scale = {})
      : lower_(std::move(lower)), upper_(std::move(upper)), log_(std::move(log_scale)) {
    if (lower_.size() != upper_.size()) {
      throw Error(ErrorKind::dimension_mismatch, "bound vectors differ in length");
    }
    if (log_.empty()) log_.assign(static_cast<std::size_t>(lower_.size()), false);
    if (log_.size() != static_cast<std::size_t>(lower_.size())) {
      throw Error(ErrorKind::dimension_mismatch, "log flags differ in length from bounds");
    }
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
      if (!(lower_[i] < upper_[i])) {
        throw Error(ErrorKind::invalid_bounds, "lower bound must be below upper bound in dimension " +
                                                   std::to_string(i));
      }
      if (log_[static_cast<std::size_t>(i)] && !(lower_[i] > 0.0)) {
        throw Error(ErrorKind::invalid_bounds,
                    "log-scaled dimension " + std::to_string(i) + " needs a positive lower bound");
      }
    }
  }

  /// Identity map on [-1, 1]^m.
  static DomainTransform unit_cube(int m) {
    return {Eigen::VectorXd::Constant(m, -1.0), Eigen::VectorXd::Constant(m, 1.0)};
  }

  int dimension() const noexcept { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const noexcept { return lower_; }
  const Eigen::VectorXd& upper() const noexcept { return upper_; }
  bool log_scaled(int i) const { return log_[static_cast<std::size_t>(i)]; }
  bool empty() const noexcept { return lower_.size() == 0; }

  Eigen::VectorXd to_cube(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    check_dim(x.size());
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      // Allow round-off from a prior inverse map at the endpoints.
      const double slack = 1e-12 * (std::abs(lower_[i]) + std::abs(upper_[i]) + 1.0);
      if (!(x[i] >= lower_[i] - slack && x[i] <= upper_[i] + slack)) {
        throw Error(ErrorKind::out_of_bounds, "coordinate " + std::to_string(i) + " outside the box");
      }
      double lo = lower_[i];
      double hi = upper_[i];
      double v = x[i];
      if (log_[static_cast<std::size_t>(i)]) {
        lo = std::log10(lo);
        hi = std::log10(hi);
        v = std::log10(std::max(v, lower_[i]));
      }
      // Exact at both endpoints and at the midpoint.
      out[i] = std::clamp(((v - lo) - (hi - v)) / (hi - lo), -1.0, 1.0);
    }
    return out;
  }

  Eigen::VectorXd from_cube(const Eigen::Ref<const Eigen::VectorXd>& t) const {
    check_dim(t.size());
    Eigen::VectorXd out(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double u = std::clamp(t[i], -1.0, 1.0);
      if (log_[static_cast<std::size_t>(i)]) {
        const double lo = std::log10(lower_[i]);
        const double hi = std::log10(upper_[i]);
        out[i] = std::pow(10.0, lo + (u + 1.0) * 0.5 * (hi - lo));
      } else {
        out[i] = lower_[i] + (u + 1.0) * 0.5 * (upper_[i] - lower_[i]);
      }
      out[i] = std::clamp(out[i], lower_[i], upper_[i]);
    }
    return out;
  }

 private:
  void check_dim(Eigen::Index n) const {
    if (n != lower_.size()) {
      throw Error(ErrorKind::dimension_mismatch, "point has " + std::to_string(n) +
                                                     " coordinates, transform expects " +
                                                     std::to_string(lower_.size()));
    }
  }

  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  std::vector<bool> log_;
};

inline Eigen::VectorXd min_max_transform(const Eigen::Ref<const Eigen::VectorXd>& x,
                                         const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                         const std::vector<bool>& log_scale = {}) {
  return DomainTransform(lower, upper, log_scale).to_cube(x);
}

inline Eigen::VectorXd inverse_min_max_transform(const Eigen::Ref<const Eigen::VectorXd>& t,
                                                 const Eigen::VectorXd& lower,
                                                 const Eigen::VectorXd& upper,
                                                 const std::vector<bool>& log_scale = {}) {
  return DomainTransform(lower, upper, log_scale).from_cube(t);
}

}  // namespace pmbo
