#pragma once

#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "pmbo/error.hpp"
#include "pmbo/interpolation.hpp"
#include "pmbo/multiindex.hpp"

namespace pmbo {

/// Least-squares problem min ||R_A c - F|| in the Lagrange basis.
struct RegressionProblem {
  MultiIndexSet index_set;
  NodeSequence nodes;
  Eigen::MatrixXd matrix;        // R_A, N x |A|
  Eigen::VectorXd observations;  // F, length N
};

/// Relative pivot threshold for rank detection in the column-pivoted QR.
inline constexpr double kRankTolerance = 1e-10;

inline Eigen::MatrixXd build_regression_matrix(const MultiIndexSet& set, const NodeSequence& nodes,
                                               const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  return lagrange_basis_matrix(set, nodes, samples);
}

inline RegressionProblem make_regression_problem(const MultiIndexSet& set, const NodeSequence& nodes,
                                                 const Eigen::Ref<const Eigen::MatrixXd>& samples,
                                                 const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (samples.rows() != values.size()) {
    throw Error(ErrorKind::length_mismatch, "sample and observation counts differ");
  }
  return {set, nodes, build_regression_matrix(set, nodes, samples), values};
}

/// Solves the problem by column-pivoted Householder QR and returns the
/// surrogate in Newton form. Throws rank_deficient when the numerical rank
/// falls below |A| and underdetermined when N < |A|.
inline PolynomialSurrogate least_squares_fit(const RegressionProblem& problem) {
  const auto& R = problem.matrix;
  const auto cols = static_cast<Eigen::Index>(problem.index_set.size());
  if (R.rows() != problem.observations.size()) {
    throw Error(ErrorKind::length_mismatch, "regression matrix rows differ from observation count");
  }
  if (R.cols() != cols) {
    throw Error(ErrorKind::length_mismatch, "regression matrix columns differ from |A|");
  }
  if (R.rows() < cols) {
    throw Error(ErrorKind::underdetermined, std::to_string(R.rows()) + " samples for " +
                                                std::to_string(cols) + " coefficients");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(R);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < cols) {
    throw Error(ErrorKind::rank_deficient,
                "numerical rank " + std::to_string(qr.rank()) + " < " + std::to_string(cols));
  }
  const Eigen::VectorXd lagrange_coeffs = qr.solve(problem.observations);
  return dds_fit(problem.index_set, problem.nodes, lagrange_coeffs);
}

/// Degree-growth rule: grow once the next space has fewer coefficients than
/// there are samples.
inline bool should_increase_degree(int current_degree, int m, double p, std::size_t sample_count) {
  if (sample_count == 0) return false;
  return cardinality(m, current_degree + 1, p) < sample_count;
}

}  // namespace pmbo
