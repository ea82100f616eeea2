#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "pmbo/error.hpp"

namespace pmbo {

struct KnownOptimum {
  Eigen::VectorXd x;
  double value = 0.0;
};

/// Black-box objective over a box, with an evaluation counter. Copies carry
/// the current count; the counter itself is atomic so replicates may share
/// one ObjectiveSpec across threads.
class ObjectiveSpec {
 public:
  using Evaluator = std::function<double(const Eigen::VectorXd&)>;

  ObjectiveSpec(std::string name, int id, Eigen::VectorXd lower, Eigen::VectorXd upper, Evaluator evaluator,
                std::optional<KnownOptimum> optimum = std::nullopt, std::optional<Eigen::VectorXd> shift = std::nullopt)
      : name_(std::move(name)), id_(id), lower_(std::move(lower)), upper_(std::move(upper)),
        evaluator_(std::move(evaluator)), optimum_(std::move(optimum)), shift_(std::move(shift)) {
    if (lower_.size() != upper_.size() || lower_.size() == 0) {
      throw Error(ErrorKind::dimension_mismatch, "objective bounds must be non-empty and of equal length");
    }
    if (!evaluator_) throw Error(ErrorKind::invalid_config, "objective needs an evaluator");
  }

  ObjectiveSpec(const ObjectiveSpec& o)
      : name_(o.name_), id_(o.id_), lower_(o.lower_), upper_(o.upper_), evaluator_(o.evaluator_),
        optimum_(o.optimum_), shift_(o.shift_), calls_(o.calls_.load()) {}
  ObjectiveSpec& operator=(const ObjectiveSpec& o) {
    if (this != &o) {
      name_ = o.name_;
      id_ = o.id_;
      lower_ = o.lower_;
      upper_ = o.upper_;
      evaluator_ = o.evaluator_;
      optimum_ = o.optimum_;
      shift_ = o.shift_;
      calls_ = o.calls_.load();
    }
    return *this;
  }

  double operator()(const Eigen::VectorXd& x) const {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return evaluator_(x);
  }
  /// Evaluates without touching the counter (for reporting and RMSE probes).
  double peek(const Eigen::VectorXd& x) const { return evaluator_(x); }

  const std::string& name() const noexcept { return name_; }
  int id() const noexcept { return id_; }
  int dimension() const noexcept { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const noexcept { return lower_; }
  const Eigen::VectorXd& upper() const noexcept { return upper_; }
  const std::optional<KnownOptimum>& known_optimum() const noexcept { return optimum_; }
  const std::optional<Eigen::VectorXd>& shift() const noexcept { return shift_; }

  std::size_t calls() const noexcept { return calls_.load(); }
  void reset_calls() const noexcept { calls_ = 0; }

 private:
  std::string name_;
  int id_ = 0;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  Evaluator evaluator_;
  std::optional<KnownOptimum> optimum_;
  std::optional<Eigen::VectorXd> shift_;
  mutable std::atomic<std::size_t> calls_{0};
};

namespace benchmark_id {
inline constexpr int sphere = 1;
inline constexpr int attractive_sector = 6;
inline constexpr int ellipsoidal = 10;
inline constexpr int rastrigin = 15;
inline constexpr int schwefel = 20;
}  // namespace benchmark_id

/// Location of the 1-D Schwefel minimum, x sin(sqrt(x)) maximal.
inline constexpr double kSchwefelArgmin = 420.96874635998202;
inline constexpr double kSchwefelOffset = 418.9828872724339;

inline const char* benchmark_name(int id) {
  switch (id) {
    case benchmark_id::sphere: return "Sphere";
    case benchmark_id::attractive_sector: return "AttractiveSector";
    case benchmark_id::ellipsoidal: return "Ellipsoidal";
    case benchmark_id::rastrigin: return "Rastrigin";
    case benchmark_id::schwefel: return "Schwefel";
    default: throw Error(ErrorKind::unknown_id, "no benchmark with id " + std::to_string(id));
  }
}

/// Canonical benchmark functions. With a shift seed the optimum is moved to
/// a uniform draw from the central 80% of the box (Schwefel stays unshifted).
inline ObjectiveSpec make_objective(int id, int m, std::optional<std::uint64_t> shift_seed = std::nullopt) {
  const char* name = benchmark_name(id);
  if (m < 1) throw Error(ErrorKind::invalid_dimension, "dimension must be >= 1");
  if (id == benchmark_id::ellipsoidal && m < 2) {
    throw Error(ErrorKind::invalid_dimension, "Ellipsoidal needs m >= 2");
  }
  const double half = id == benchmark_id::schwefel ? 500.0 : 5.0;
  Eigen::VectorXd lower = Eigen::VectorXd::Constant(m, -half);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(m, half);

  std::optional<Eigen::VectorXd> shift;
  Eigen::VectorXd center = Eigen::VectorXd::Zero(m);
  if (shift_seed && id != benchmark_id::schwefel) {
    std::mt19937_64 rng(*shift_seed);
    std::uniform_real_distribution<double> unif(-0.8 * half, 0.8 * half);
    center = Eigen::VectorXd::NullaryExpr(m, [&](Eigen::Index) { return unif(rng); });
    shift = center;
  }

  ObjectiveSpec::Evaluator f;
  Eigen::VectorXd x_star = center;
  switch (id) {
    case benchmark_id::sphere:
      f = [center](const Eigen::VectorXd& x) { return (x - center).squaredNorm(); };
      break;
    case benchmark_id::ellipsoidal: {
      Eigen::VectorXd w(m);
      for (int i = 0; i < m; ++i) w[i] = std::pow(10.0, 6.0 * i / (m - 1));
      f = [center, w](const Eigen::VectorXd& x) { return (w.array() * (x - center).array().square()).sum(); };
      break;
    }
    case benchmark_id::rastrigin:
      f = [center, m](const Eigen::VectorXd& x) {
        const Eigen::ArrayXd z = (x - center).array();
        return 10.0 * m + (z.square() - 10.0 * (2.0 * std::numbers::pi * z).cos()).sum();
      };
      break;
    case benchmark_id::attractive_sector: {
      // Sign reference for the sector test: the shift, or (1, ..., 1) unshifted.
      const Eigen::VectorXd ref = shift ? center : Eigen::VectorXd::Ones(m);
      f = [center, ref](const Eigen::VectorXd& x) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
          const double z = x[i] - center[i];
          const double s = z * ref[i] > 0.0 ? 100.0 : 1.0;
          sum += (s * z) * (s * z);
        }
        return sum;
      };
      break;
    }
    case benchmark_id::schwefel:
      f = [m](const Eigen::VectorXd& x) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) sum += x[i] * std::sin(std::sqrt(std::abs(x[i])));
        return kSchwefelOffset * m - sum;
      };
      x_star = Eigen::VectorXd::Constant(m, kSchwefelArgmin);
      break;
  }
  KnownOptimum opt{x_star, 0.0};
  return ObjectiveSpec(name, id, std::move(lower), std::move(upper), std::move(f), std::move(opt), std::move(shift));
}

/// G uniform test points in the objective's box (rows), drawn from `seed`.
inline Eigen::MatrixXd rmse_test_points(const ObjectiveSpec& objective, int grid_size, std::uint64_t seed) {
  if (grid_size < 1) throw Error(ErrorKind::invalid_config, "grid size must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int m = objective.dimension();
  Eigen::MatrixXd pts(grid_size, m);
  for (int g = 0; g < grid_size; ++g) {
    for (int i = 0; i < m; ++i) {
      pts(g, i) = objective.lower()[i] + unif(rng) * (objective.upper()[i] - objective.lower()[i]);
    }
  }
  return pts;
}

/// Root mean square error of a pointwise predictor against the objective.
template <class Predictor>
double surrogate_rmse(const Predictor& predictor, const ObjectiveSpec& objective, int grid_size,
                      std::uint64_t seed) {
  const Eigen::MatrixXd pts = rmse_test_points(objective, grid_size, seed);
  double sum = 0.0;
  for (Eigen::Index g = 0; g < pts.rows(); ++g) {
    const Eigen::VectorXd x = pts.row(g).transpose();
    const double e = predictor(x) - objective.peek(x);
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(pts.rows()));
}

/// Same as surrogate_rmse for a predictor mapping a point matrix (rows) to a
/// vector of predictions in one call.
template <class BatchPredictor>
double surrogate_rmse_batch(const BatchPredictor& predictor, const ObjectiveSpec& objective, int grid_size,
                            std::uint64_t seed) {
  const Eigen::MatrixXd pts = rmse_test_points(objective, grid_size, seed);
  const Eigen::VectorXd pred = predictor(pts);
  double sum = 0.0;
  for (Eigen::Index g = 0; g < pts.rows(); ++g) {
    const double e = pred[g] - objective.peek(pts.row(g).transpose());
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(pts.rows()));
}

}  // namespace pmbo
