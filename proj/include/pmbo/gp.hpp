#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "pmbo/error.hpp"
#include "pmbo/interpolation.hpp"

namespace pmbo {

enum class KernelFamily { matern32, matern52, squared_exponential };

inline std::string_view to_string(KernelFamily f) noexcept {
  switch (f) {
    case KernelFamily::matern32: return "matern32";
    case KernelFamily::matern52: return "matern52";
    case KernelFamily::squared_exponential: return "se";
  }
  return "?";
}

inline KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "matern32" || name == "Matern32") return KernelFamily::matern32;
  if (name == "matern52" || name == "Matern52") return KernelFamily::matern52;
  if (name == "se" || name == "squared_exponential" || name == "SquaredExponential") {
    return KernelFamily::squared_exponential;
  }
  throw Error(ErrorKind::invalid_config, "unknown kernel family '" + std::string(name) + "'");
}

struct KernelSpec {
  KernelFamily family = KernelFamily::matern32;
  double range = 1.0;             // l
  double process_variance = 1.0;  // sigma^2

  void validate() const {
    if (!(range > 0.0) || !(process_variance > 0.0)) {
      throw Error(ErrorKind::invalid_config, "kernel range and process variance must be positive");
    }
  }
};

/// Correlation as a function of the scaled distance r = |x - x'| / l.
inline double correlation_at(KernelFamily family, double r) noexcept {
  switch (family) {
    case KernelFamily::matern32: {
      const double s = std::sqrt(3.0) * r;
      return (1.0 + s) * std::exp(-s);
    }
    case KernelFamily::matern52: {
      const double s = std::sqrt(5.0) * r;
      return (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    case KernelFamily::squared_exponential:
      return std::exp(-0.5 * r * r);
  }
  return 0.0;
}

inline double kernel_correlation(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                                 const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::dimension_mismatch, "kernel arguments differ in length");
  return correlation_at(spec.family, (x - y).norm() / spec.range);
}

namespace detail {

// Squared distances between rows of a and rows of b, accumulated from
// coordinate differences so coincident points give exactly 0.
inline Eigen::ArrayXXd squared_distances(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                         const Eigen::Ref<const Eigen::MatrixXd>& b) {
  Eigen::ArrayXXd d2(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double sum = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) {
        const double d = a(i, k) - b(j, k);
        sum += d * d;
      }
      d2(i, j) = sum;
    }
  }
  return d2;
}

inline Eigen::MatrixXd correlation_from_squared(const KernelSpec& spec, const Eigen::ArrayXXd& d2) {
  const double inv_l = 1.0 / spec.range;
  switch (spec.family) {
    case KernelFamily::matern32: {
      const Eigen::ArrayXXd s = std::sqrt(3.0) * inv_l * d2.sqrt();
      return ((1.0 + s) * (-s).exp()).matrix();
    }
    case KernelFamily::matern52: {
      const Eigen::ArrayXXd s = std::sqrt(5.0) * inv_l * d2.sqrt();
      return ((1.0 + s + s.square() / 3.0) * (-s).exp()).matrix();
    }
    case KernelFamily::squared_exponential:
      return (-0.5 * inv_l * inv_l * d2).exp().matrix();
  }
  return {};
}

}  // namespace detail

/// Correlation block k(a_i, b_j), rows of a against rows of b. Coincident
/// points get correlation exactly 1.
inline Eigen::MatrixXd correlation_matrix(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& a,
                                          const Eigen::Ref<const Eigen::MatrixXd>& b) {
  return detail::correlation_from_squared(spec, detail::squared_distances(a, b));
}

/// Which form of the trend-uncertainty term enters the posterior variance.
/// universal_kriging uses u^T (R^T C^-1 R)^-1 u; literal uses u^T (R^T C^-1 R) u.
enum class VarianceForm { universal_kriging, literal };

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

inline constexpr double kInitialNugget = 1e-10;
inline constexpr double kMaxNugget = 1e-4;

/// Gaussian process conditioned on noiseless data, with either a zero prior
/// mean or a polynomial prior mean. Immutable once fitted.
class GpModel {
 public:
  const KernelSpec& kernel() const noexcept { return kernel_; }
  const Eigen::MatrixXd& inputs() const noexcept { return X_; }
  const Eigen::VectorXd& outputs() const noexcept { return Y_; }
  const std::optional<PolynomialSurrogate>& mean_model() const noexcept { return mean_; }
  int dimension() const noexcept { return static_cast<int>(X_.cols()); }
  Eigen::Index size() const noexcept { return X_.rows(); }

  /// Nugget actually added to the diagonal (absolute, already scaled by sigma^2).
  double nugget() const noexcept { return nugget_; }
  /// True when the nugget had to be escalated or carried a pivot of the
  /// factorization, i.e. the data were numerically (near-)singular.
  bool regularized() const noexcept { return regularized_; }
  /// Lowest observed output, the incumbent for acquisition.
  double best_output() const { return Y_.size() ? Y_.minCoeff() : 0.0; }

  /// Prior mean at a batch of points (rows).
  Eigen::VectorXd prior_mean(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
    if (!mean_) return Eigen::VectorXd::Zero(points.rows());
    return newton_matrix(mean_->index_set(), mean_->nodes(), points) * mean_->newton_coefficients();
  }

  /// Posterior mean and variance at every row of `points`.
  void posterior_batch(const Eigen::Ref<const Eigen::MatrixXd>& points, Eigen::VectorXd& mean,
                       Eigen::VectorXd& variance, Eigen::VectorXd* raw_variance = nullptr) const {
    if (points.rows() > 0 && points.cols() != X_.cols()) {
      throw Error(ErrorKind::dimension_mismatch, "query dimension differs from training inputs");
    }
    const double s2 = kernel_.process_variance;
    // The nugget is part of the process covariance at zero distance, so a
    // query on a training input sees that input's full row of C.
    const Eigen::ArrayXXd d2 = detail::squared_distances(X_, points);
    Eigen::MatrixXd cross = s2 * detail::correlation_from_squared(kernel_, d2);  // N x M, c(x)^T columns
    cross.array() += (d2 == 0.0).cast<double>() * nugget_;
    const Eigen::MatrixXd v = chol_.matrixL().solve(cross);  // L^-1 c^T
    Eigen::VectorXd var = ((s2 + nugget_) - v.colwise().squaredNorm().array()).matrix();

    Eigen::VectorXd prior = Eigen::VectorXd::Zero(points.rows());
    if (mean_) {
      const Eigen::MatrixXd nb = newton_matrix(mean_->index_set(), mean_->nodes(), points);
      prior.noalias() = nb * mean_->newton_coefficients();
      mean = prior;
      mean.noalias() += cross.transpose() * weights_;
      if (form_ == VarianceForm::universal_kriging) {
        // L_G^-1 u(x) = [L_G^-1 R^T C^-1] c^T(x) - [L_G^-1 T^T] N(x)^T
        Eigen::MatrixXd z;
        z.noalias() = trend_from_cross_ * cross;
        z.noalias() -= trend_from_newton_ * nb.transpose();
        var += z.colwise().squaredNorm().transpose();
      } else {
        // u(x) = R^T C^-1 c^T(x) - r(x), r(x) = T^T N(x)^T with T = lagrange_to_newton.
        Eigen::MatrixXd u;
        u.noalias() = whitened_trend_.transpose() * v;
        u.noalias() -= lagrange_to_newton_.transpose() * nb.transpose();
        var += (u.array() * (trend_gram_ * u).array()).colwise().sum().matrix().transpose();
      }
    } else {
      mean.noalias() = cross.transpose() * weights_;
    }
    // On a training input C^-1 c(x) is exactly the unit vector e_i, which
    // makes the correction term the stored residual and the variance zero.
    // Substituting that identity avoids the rounding of c^T C^-1 r, whose
    // weights grow like 1 / nugget when C is nearly singular.
    for (Eigen::Index j = 0; j < d2.cols(); ++j) {
      for (Eigen::Index i = 0; i < d2.rows(); ++i) {
        if (d2(i, j) == 0.0) {
          mean[j] = prior[j] + residual_[i];
          var[j] = 0.0;
          break;
        }
      }
    }
    if (raw_variance) *raw_variance = var;
    variance = var.cwiseMax(0.0);
  }

  Posterior posterior(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != X_.cols()) {
      throw Error(ErrorKind::dimension_mismatch, "query dimension differs from training inputs");
    }
    Eigen::VectorXd mean, var;
    posterior_batch(x.transpose(), mean, var);
    return {mean[0], var[0]};
  }

 private:
  friend GpModel fit_gp(Eigen::MatrixXd, Eigen::VectorXd, std::optional<PolynomialSurrogate>,
                        const KernelSpec&, VarianceForm);

  KernelSpec kernel_;
  VarianceForm form_ = VarianceForm::universal_kriging;
  Eigen::MatrixXd X_;
  Eigen::VectorXd Y_;
  std::optional<PolynomialSurrogate> mean_;
  Eigen::LLT<Eigen::MatrixXd> chol_;   // C = sigma^2 K + nugget I
  Eigen::VectorXd residual_;           // Y - m(X)
  Eigen::VectorXd weights_;            // C^-1 (Y - m(X))
  double nugget_ = 0.0;
  bool regularized_ = false;

  // Polynomial-mean only.
  Eigen::MatrixXd lagrange_to_newton_;  // |A| x |A|
  Eigen::MatrixXd whitened_trend_;      // L^-1 R_A, N x |A|
  Eigen::MatrixXd trend_gram_;          // R_A^T C^-1 R_A
  Eigen::LLT<Eigen::MatrixXd> trend_chol_;
  Eigen::MatrixXd trend_from_cross_;   // L_G^-1 R_A^T C^-1, |A| x N
  Eigen::MatrixXd trend_from_newton_;  // L_G^-1 T^T, |A| x |A|
};

/// Conditions the process on (X, Y). With a polynomial mean the regression
/// matrix R_A at X is assembled for the trend term of the variance.
inline GpModel fit_gp(Eigen::MatrixXd X, Eigen::VectorXd Y, std::optional<PolynomialSurrogate> mean_model,
                      const KernelSpec& kernel, VarianceForm form = VarianceForm::universal_kriging) {
  kernel.validate();
  if (X.rows() != Y.size()) throw Error(ErrorKind::length_mismatch, "inputs and outputs differ in count");
  if (X.rows() == 0) throw Error(ErrorKind::length_mismatch, "no training data");
  if (mean_model && mean_model->dimension() != X.cols()) {
    throw Error(ErrorKind::dimension_mismatch, "mean model dimension differs from inputs");
  }

  GpModel gp;
  gp.kernel_ = kernel;
  gp.form_ = form;
  const double s2 = kernel.process_variance;
  const Eigen::MatrixXd K = s2 * correlation_matrix(kernel, X, X);

  bool ok = false;
  for (double rel = kInitialNugget; rel <= kMaxNugget * (1.0 + 1e-9); rel *= 10.0) {
    gp.nugget_ = rel * s2;
    Eigen::MatrixXd C = K;
    C.diagonal().array() += gp.nugget_;
    gp.chol_.compute(C);
    if (gp.chol_.info() == Eigen::Success) {
      ok = true;
      gp.regularized_ = rel > kInitialNugget;
      break;
    }
  }
  if (!ok) {
    throw Error(ErrorKind::factorization_failure,
                "covariance matrix not positive definite after nugget escalation (near-duplicate inputs?)");
  }
  const Eigen::VectorXd pivots = gp.chol_.matrixLLT().diagonal();
  if ((pivots.array().square() < 10.0 * gp.nugget_).any()) gp.regularized_ = true;

  Eigen::VectorXd residual = Y;
  if (mean_model) {
    const auto& set = mean_model->index_set();
    const auto& nodes = mean_model->nodes();
    const Eigen::MatrixXd nb = newton_matrix(set, nodes, X);
    residual -= nb * mean_model->newton_coefficients();
    gp.lagrange_to_newton_ = lagrange_to_newton(set, nodes);
    const Eigen::MatrixXd R = nb * gp.lagrange_to_newton_;
    gp.whitened_trend_ = gp.chol_.matrixL().solve(R);
    gp.trend_gram_ = gp.whitened_trend_.transpose() * gp.whitened_trend_;
    if (form == VarianceForm::universal_kriging) {
      // Gram matrix can be numerically semi-definite when N ~ |A|; a relative
      // jitter keeps the inverse finite.
      Eigen::MatrixXd G = gp.trend_gram_;
      const double scale = std::max(G.diagonal().maxCoeff(), 1e-300);
      for (double rel = 0.0; rel <= 1e-6; rel = (rel == 0.0 ? 1e-14 : rel * 100.0)) {
        Eigen::MatrixXd Gj = G;
        Gj.diagonal().array() += rel * scale;
        gp.trend_chol_.compute(Gj);
        if (gp.trend_chol_.info() == Eigen::Success) break;
      }
      if (gp.trend_chol_.info() != Eigen::Success) {
        throw Error(ErrorKind::factorization_failure, "trend Gram matrix R^T C^-1 R is singular");
      }
      const Eigen::MatrixXd rc = gp.chol_.matrixU().solve(gp.whitened_trend_);  // C^-1 R_A
      gp.trend_from_cross_ = gp.trend_chol_.matrixL().solve(rc.transpose());
      gp.trend_from_newton_ = gp.trend_chol_.matrixL().solve(gp.lagrange_to_newton_.transpose());
    }
  }
  gp.weights_ = gp.chol_.solve(residual);
  gp.residual_ = std::move(residual);
  gp.X_ = std::move(X);
  gp.Y_ = std::move(Y);
  gp.mean_ = std::move(mean_model);
  return gp;
}

inline Posterior posterior(const GpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return model.posterior(x);
}

}  // namespace pmbo
