#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pmbo/acquisition.hpp"
#include "pmbo/benchmarks.hpp"
#include "pmbo/design.hpp"
#include "pmbo/error.hpp"
#include "pmbo/gp.hpp"
#include "pmbo/interpolation.hpp"
#include "pmbo/multiindex.hpp"
#include "pmbo/regression.hpp"
#include "pmbo/transform.hpp"

namespace pmbo {

enum class Algorithm { pmbo, bo_fixed };

inline std::string_view to_string(Algorithm a) noexcept { return a == Algorithm::pmbo ? "pmbo" : "bo_fixed"; }

inline Algorithm parse_algorithm(std::string_view name) {
  if (name == "pmbo") return Algorithm::pmbo;
  if (name == "bo_fixed" || name == "bo") return Algorithm::bo_fixed;
  throw Error(ErrorKind::invalid_config, "unknown algorithm '" + std::string(name) + "'");
}

struct PmboConfig {
  int dimension = 0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  int initial_degree = 2;
  double degree_norm = 2.0;
  int initial_sample_count = 0;  // 0: 2 |A_{m,2,2}|
  int budget = 0;                // 0: 100 m
  SamplingStrategy sampling = SamplingStrategy::simple_random;
  KernelSpec kernel;
  AcquisitionSpec acquisition;
  std::vector<bool> log_scale;
  std::uint64_t seed = 0;
  VarianceForm variance_form = VarianceForm::universal_kriging;

  static PmboConfig for_objective(const ObjectiveSpec& objective, std::uint64_t seed = 0) {
    PmboConfig c;
    c.dimension = objective.dimension();
    c.lower = objective.lower();
    c.upper = objective.upper();
    c.seed = seed;
    return c;
  }

  int resolved_initial_count() const {
    return initial_sample_count > 0 ? initial_sample_count
                                    : 2 * static_cast<int>(cardinality(dimension, 2, 2.0));
  }
  int resolved_budget() const { return budget > 0 ? budget : 100 * dimension; }

  DomainTransform transform() const { return {lower, upper, log_scale}; }

  void validate() const {
    if (dimension < 1) throw Error(ErrorKind::invalid_dimension, "dimension must be >= 1");
    if (lower.size() != dimension || upper.size() != dimension) {
      throw Error(ErrorKind::dimension_mismatch, "bounds do not match the dimension");
    }
    (void)transform();  // checks lb < ub and log bounds
    kernel.validate();
    if (initial_degree < 0) throw Error(ErrorKind::invalid_degree_parameter, "initial degree must be >= 0");
    if (!(degree_norm > 0.0)) throw Error(ErrorKind::invalid_degree_parameter, "degree norm must be > 0");
    const int n0 = resolved_initial_count();
    if (n0 > resolved_budget()) {
      throw Error(ErrorKind::budget_exhausted_at_init, "initial sample count " + std::to_string(n0) +
                                                           " exceeds the budget " + std::to_string(resolved_budget()));
    }
    const auto coeffs = cardinality(dimension, initial_degree, degree_norm);
    if (static_cast<std::size_t>(n0) <= coeffs) {
      throw Error(ErrorKind::invalid_config, "initial sample count must exceed |A| = " + std::to_string(coeffs));
    }
    if (acquisition.candidates_for(dimension) < 1) {
      throw Error(ErrorKind::invalid_config, "candidate count must be >= 1");
    }
  }
};

struct IterationRecord {
  std::size_t iteration = 0;
  Eigen::VectorXd point;  // original coordinates
  double value = 0.0;
  double best_so_far = 0.0;
  int degree = -1;  // polynomial degree in effect; -1 without a polynomial mean
  bool degree_increased = false;
  bool rank_deficient = false;
  double wall_time_ms = 0.0;
};

struct OptimizationTrace {
  Algorithm algorithm = Algorithm::pmbo;
  std::vector<IterationRecord> records;
  std::size_t initial_count = 0;
  Eigen::VectorXd best_point;
  double best_value = std::numeric_limits<double>::infinity();

  int final_degree() const { return records.empty() ? -1 : records.back().degree; }

  Eigen::MatrixXd points() const {
    if (records.empty()) return {};
    Eigen::MatrixXd out(static_cast<Eigen::Index>(records.size()), records.front().point.size());
    for (std::size_t i = 0; i < records.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = records[i].point.transpose();
    return out;
  }
  Eigen::VectorXd values() const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i) out[static_cast<Eigen::Index>(i)] = records[i].value;
    return out;
  }
};

/// Failure during a run; carries everything recorded before it.
class RunError : public Error {
 public:
  RunError(ErrorKind kind, const std::string& message, OptimizationTrace partial)
      : Error(kind, message), partial_(std::move(partial)) {}
  const OptimizationTrace& partial_trace() const noexcept { return partial_; }

 private:
  OptimizationTrace partial_;
};

/// Seed streams derived from the master seed.
inline constexpr std::uint64_t kDesignStream = 1;
inline constexpr std::uint64_t kProposalStream = 2;
inline constexpr std::uint64_t kJitterStream = 3;

/// Degree reached by applying the growth rule repeatedly from `start`.
inline int degree_for_samples(int start, int m, double p, std::size_t samples) {
  int n = start;
  while (should_increase_degree(n, m, p, samples)) ++n;
  return n;
}

/// Least-squares polynomial of degree n on cube samples; nullopt on a
/// rank-deficient or underdetermined system.
inline std::optional<PolynomialSurrogate> try_fit_polynomial(int m, int n, double p,
                                                             const Eigen::Ref<const Eigen::MatrixXd>& cube_points,
                                                             const Eigen::Ref<const Eigen::VectorXd>& values) {
  const MultiIndexSet set(m, n, p);
  if (static_cast<std::size_t>(cube_points.rows()) < set.size()) return std::nullopt;
  try {
    return least_squares_fit(make_regression_problem(set, lcl_nodes(n), cube_points, values));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::rank_deficient || e.kind() == ErrorKind::underdetermined) return std::nullopt;
    throw;
  }
}

namespace detail {

inline OptimizationTrace run_loop(const ObjectiveSpec& objective, const PmboConfig& config, Algorithm algorithm) {
  using Clock = std::chrono::steady_clock;
  config.validate();
  if (objective.dimension() != config.dimension) {
    throw Error(ErrorKind::dimension_mismatch, "objective and config dimensions differ");
  }
  const int m = config.dimension;
  const int budget = config.resolved_budget();
  const int n_init = config.resolved_initial_count();
  const double p = config.degree_norm;
  const bool polynomial = algorithm == Algorithm::pmbo;
  const DomainTransform domain = config.transform();

  OptimizationTrace trace;
  trace.algorithm = algorithm;
  trace.initial_count = static_cast<std::size_t>(n_init);
  trace.records.reserve(static_cast<std::size_t>(budget));

  Eigen::MatrixXd cube(budget, m);
  Eigen::VectorXd y(budget);
  int count = 0;
  int degree = config.initial_degree;
  std::optional<PolynomialSurrogate> surrogate;

  auto evaluate = [&](const Eigen::VectorXd& t, IterationRecord rec, Clock::time_point start) {
    const Eigen::VectorXd x = domain.from_cube(t);
    double v = 0.0;
    try {
      v = objective(x);
    } catch (const std::exception& e) {
      throw RunError(ErrorKind::objective_evaluation_failure, e.what(), trace);
    }
    if (!std::isfinite(v)) {
      throw RunError(ErrorKind::objective_evaluation_failure, "objective returned a non-finite value", trace);
    }
    cube.row(count) = t.transpose();
    y[count] = v;
    ++count;
    if (v < trace.best_value) {
      trace.best_value = v;
      trace.best_point = x;
    }
    rec.iteration = trace.records.size();
    rec.point = x;
    rec.value = v;
    rec.best_so_far = trace.best_value;
    rec.wall_time_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    trace.records.push_back(std::move(rec));
  };

  const Eigen::MatrixXd design =
      initial_design(config.sampling, n_init, m, derive_seed(config.seed, kDesignStream, 0));
  for (int i = 0; i < n_init; ++i) {
    IterationRecord rec;
    rec.degree = polynomial ? degree : -1;
    evaluate(design.row(i).transpose(), std::move(rec), Clock::now());
  }

  std::mt19937_64 jitter_rng(derive_seed(config.seed, kJitterStream, 0));
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);

  while (count < budget) {
    const auto start = Clock::now();
    const auto X = cube.topRows(count);
    const auto Y = y.head(count);
    IterationRecord rec;

    std::optional<PolynomialSurrogate> mean;
    if (polynomial) {
      int trial = degree;
      if (should_increase_degree(degree, m, p, static_cast<std::size_t>(count))) {
        trial = degree + 1;
        rec.degree_increased = true;
      }
      auto fitted = try_fit_polynomial(m, trial, p, X, Y);
      if (fitted) {
        degree = trial;
        surrogate = std::move(fitted);
      } else {
        rec.rank_deficient = true;
        rec.degree_increased = false;  // keep the current degree and surrogate
      }
      rec.degree = surrogate ? surrogate->degree() : degree;
      mean = surrogate;
    }

    const GpModel gp = fit_gp(X, Y, std::move(mean), config.kernel, config.variance_form);
    Eigen::VectorXd t = propose_next(gp, config.acquisition,
                                     derive_seed(config.seed, kProposalStream, static_cast<std::uint64_t>(count)));
    // Keep the covariance invertible when the proposal repeats a sample.
    const bool duplicate = ((X.rowwise() - t.transpose()).rowwise().norm().array() < 1e-9).any();
    if (duplicate) {
      for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = std::clamp(t[i] + jitter(jitter_rng), -1.0, 1.0);
    }
    evaluate(t, std::move(rec), start);
  }
  return trace;
}

}  // namespace detail

/// Polynomial-model-based optimisation: least-squares polynomial surrogate
/// as the prior mean of a GP, refitted from scratch every iteration, with the
/// degree grown by one whenever the next space is smaller than the sample.
inline OptimizationTrace run_pmbo(const ObjectiveSpec& objective, const PmboConfig& config) {
  return detail::run_loop(objective, config, Algorithm::pmbo);
}

/// Bayesian optimisation with a zero prior mean and fixed kernel
/// hyper-parameters; same initial design and acquisition as run_pmbo.
inline OptimizationTrace run_bo_fixed(const ObjectiveSpec& objective, const PmboConfig& config) {
  return detail::run_loop(objective, config, Algorithm::bo_fixed);
}

inline OptimizationTrace run_algorithm(Algorithm algorithm, const ObjectiveSpec& objective, const PmboConfig& config) {
  return detail::run_loop(objective, config, algorithm);
}

/// Surrogate (GP posterior mean) built from samples in original coordinates,
/// the way the optimiser would build it. For pmbo the polynomial degree is
/// `degree`, stepped down until the least-squares system has full rank.
class FittedSurrogate {
 public:
  FittedSurrogate(GpModel model, DomainTransform domain) : model_(std::move(model)), domain_(std::move(domain)) {}

  const GpModel& model() const noexcept { return model_; }

  double operator()(const Eigen::VectorXd& x_original) const {
    return model_.posterior(domain_.to_cube(x_original)).mean;
  }

  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& points_original) const {
    Eigen::MatrixXd cube(points_original.rows(), points_original.cols());
    for (Eigen::Index r = 0; r < points_original.rows(); ++r) {
      cube.row(r) = domain_.to_cube(points_original.row(r).transpose()).transpose();
    }
    Eigen::VectorXd mean, var;
    model_.posterior_batch(cube, mean, var);
    return mean;
  }

 private:
  GpModel model_;
  DomainTransform domain_;
};

inline FittedSurrogate fit_surrogate(Algorithm algorithm, const Eigen::Ref<const Eigen::MatrixXd>& points_original,
                                     const Eigen::Ref<const Eigen::VectorXd>& values, const PmboConfig& config,
                                     int degree) {
  const DomainTransform domain = config.transform();
  Eigen::MatrixXd cube(points_original.rows(), points_original.cols());
  for (Eigen::Index r = 0; r < points_original.rows(); ++r) {
    cube.row(r) = domain.to_cube(points_original.row(r).transpose()).transpose();
  }
  std::optional<PolynomialSurrogate> mean;
  if (algorithm == Algorithm::pmbo) {
    for (int n = degree; n >= 0 && !mean; --n) {
      mean = try_fit_polynomial(config.dimension, n, config.degree_norm, cube, values);
    }
  }
  return {fit_gp(cube, values, std::move(mean), config.kernel, config.variance_form), domain};
}

}  // namespace pmbo
