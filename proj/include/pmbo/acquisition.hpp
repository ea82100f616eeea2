#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "pmbo/error.hpp"
#include "pmbo/gp.hpp"

namespace pmbo {

enum class AcquisitionFamily { expected_improvement, probability_of_improvement, upper_confidence_bound };

inline std::string_view to_string(AcquisitionFamily f) noexcept {
  switch (f) {
    case AcquisitionFamily::expected_improvement: return "ei";
    case AcquisitionFamily::probability_of_improvement: return "pi";
    case AcquisitionFamily::upper_confidence_bound: return "ucb";
  }
  return "?";
}

inline AcquisitionFamily parse_acquisition_family(std::string_view name) {
  if (name == "ei") return AcquisitionFamily::expected_improvement;
  if (name == "pi") return AcquisitionFamily::probability_of_improvement;
  if (name == "ucb") return AcquisitionFamily::upper_confidence_bound;
  throw Error(ErrorKind::invalid_config, "unknown acquisition '" + std::string(name) + "'");
}

struct AcquisitionSpec {
  AcquisitionFamily family = AcquisitionFamily::expected_improvement;
  double ucb_beta = 2.0;
  int candidate_count = 0;  // 0 selects 1000 * m
  bool refine = true;

  int candidates_for(int m) const { return candidate_count > 0 ? candidate_count : 1000 * m; }
};

inline double normal_pdf(double z) noexcept { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double z) noexcept { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Score to maximise, minimisation convention: improvement means falling below y_best.
inline double acquisition_value(const AcquisitionSpec& spec, double mean, double variance, double y_best) {
  const double s = std::sqrt(std::max(variance, 0.0));
  const double gain = y_best - mean;
  switch (spec.family) {
    case AcquisitionFamily::expected_improvement: {
      if (s <= 0.0) return std::max(gain, 0.0);
      const double z = gain / s;
      return std::max(gain * normal_cdf(z) + s * normal_pdf(z), 0.0);
    }
    case AcquisitionFamily::probability_of_improvement:
      if (s <= 0.0) return gain > 0.0 ? 1.0 : 0.0;
      return normal_cdf(gain / s);
    case AcquisitionFamily::upper_confidence_bound:
      return -mean + spec.ucb_beta * s;
  }
  return 0.0;
}

namespace detail {

inline double acquisition_at(const GpModel& model, const AcquisitionSpec& spec, double y_best,
                             const Eigen::VectorXd& x) {
  const auto post = model.posterior(x);
  return acquisition_value(spec, post.mean, post.variance, y_best);
}

// Projected quasi-Newton ascent on the cube with central finite-difference
// gradients. Returns the improved point, or `start` when nothing improved.
inline Eigen::VectorXd refine_in_cube(const GpModel& model, const AcquisitionSpec& spec, double y_best,
                                      Eigen::VectorXd start, double start_value) {
  const auto m = start.size();
  constexpr int kMaxIter = 30;
  constexpr double kStep = 1e-6;
  auto project = [](Eigen::VectorXd x) { return Eigen::VectorXd(x.cwiseMax(-1.0).cwiseMin(1.0)); };
  auto f = [&](const Eigen::VectorXd& x) { return -acquisition_at(model, spec, y_best, x); };
  auto grad = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      Eigen::VectorXd hi = x, lo = x;
      hi[i] = std::min(1.0, x[i] + kStep);
      lo[i] = std::max(-1.0, x[i] - kStep);
      g[i] = (f(hi) - f(lo)) / (hi[i] - lo[i]);
    }
    return g;
  };

  Eigen::VectorXd x = start;
  double fx = -start_value;
  Eigen::VectorXd g = grad(x);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(m, m);  // inverse Hessian approximation
  for (int it = 0; it < kMaxIter; ++it) {
    if (!g.allFinite() || g.norm() < 1e-12) break;
    Eigen::VectorXd dir = -H * g;
    if (dir.dot(g) >= 0.0) {
      H.setIdentity();
      dir = -g;
    }
    // Scale so the first trial step stays within the cube's diameter.
    const double dn = dir.norm();
    if (dn > 2.0) dir *= 2.0 / dn;
    double t = 1.0;
    Eigen::VectorXd x_new;
    double f_new = fx;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      x_new = project(x + t * dir);
      f_new = f(x_new);
      if (f_new < fx - 1e-4 * std::abs(g.dot(x_new - x))) {
        moved = true;
        break;
      }
    }
    if (!moved) break;
    const Eigen::VectorXd g_new = grad(x_new);
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-14) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
      H = (I - rho * s * yv.transpose()) * H * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
    }
    const bool converged = s.norm() < 1e-10;
    x = x_new;
    fx = f_new;
    g = g_new;
    if (converged) break;
  }
  return -fx > start_value ? x : start;
}

}  // namespace detail

/// Picks the next evaluation point in [-1, 1]^m: best of a uniform candidate
/// set, optionally polished by bounded quasi-Newton ascent. The incumbent is
/// the lowest training output of the model.
inline Eigen::VectorXd propose_next(const GpModel& model, const AcquisitionSpec& spec, std::uint64_t seed) {
  const int m = model.dimension();
  const int count = spec.candidates_for(m);
  if (count < 1) throw Error(ErrorKind::invalid_config, "candidate count must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd cand(count, m);
  for (int r = 0; r < count; ++r) {
    for (int c = 0; c < m; ++c) cand(r, c) = unif(rng);
  }

  const double y_best = model.best_output();
  Eigen::VectorXd mean, var;
  model.posterior_batch(cand, mean, var);
  Eigen::Index best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < cand.rows(); ++r) {
    const double score = acquisition_value(spec, mean[r], var[r], y_best);
    if (score > best_score) {  // strict: ties keep the lowest index
      best_score = score;
      best = r;
    }
  }
  Eigen::VectorXd x = cand.row(best).transpose();
  if (spec.refine && count > 1) x = detail::refine_in_cube(model, spec, y_best, x, best_score);
  return x;
}

}  // namespace pmbo
