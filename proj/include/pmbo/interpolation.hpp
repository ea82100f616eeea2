#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pmbo/error.hpp"
#include "pmbo/multiindex.hpp"
#include "pmbo/transform.hpp"

namespace pmbo {

/// One-dimensional generating nodes in [-1, 1], pairwise distinct.
class NodeSequence {
 public:
  NodeSequence() = default;
  explicit NodeSequence(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!(std::abs(values_[i]) <= 1.0)) {
        throw Error(ErrorKind::out_of_bounds, "node " + std::to_string(i) + " outside [-1, 1]");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (values_[i] == values_[j]) {
          throw Error(ErrorKind::invalid_config, "nodes must be pairwise distinct");
        }
      }
    }
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  const std::vector<double>& values() const noexcept { return values_; }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const NodeSequence&, const NodeSequence&) = default;

 private:
  std::vector<double> values_;
};

/// cos(k pi / n) for k = 0..n, written as sin(pi (n - 2k) / (2n)) so the set
/// is exactly symmetric and contains an exact 0 for even n.
inline NodeSequence chebyshev_lobatto(int n) {
  if (n < 0) throw Error(ErrorKind::invalid_degree_parameter, "degree must be >= 0");
  if (n == 0) return NodeSequence({1.0});
  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    v[static_cast<std::size_t>(k)] = std::sin(std::numbers::pi * (n - 2 * k) / (2.0 * n));
  }
  return NodeSequence(std::move(v));
}

/// Greedy Leja reordering. Starts at the node of largest modulus, then keeps
/// picking the node maximising the product of distances to those already
/// chosen. Ties (relative 1e-14) go to the larger node value.
inline NodeSequence leja_order(const NodeSequence& nodes) {
  std::vector<double> rest = nodes.values();
  std::vector<double> out;
  out.reserve(rest.size());
  std::vector<double> score(rest.size());
  for (std::size_t i = 0; i < rest.size(); ++i) score[i] = std::abs(rest[i]);

  while (!rest.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < rest.size(); ++i) {
      const double tol = 1e-14 * std::max(std::abs(score[i]), std::abs(score[best]));
      if (score[i] > score[best] + tol ||
          (std::abs(score[i] - score[best]) <= tol && rest[i] > rest[best])) {
        best = i;
      }
    }
    const double chosen = rest[best];
    out.push_back(chosen);
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(best));
    score.erase(score.begin() + static_cast<std::ptrdiff_t>(best));
    for (std::size_t i = 0; i < rest.size(); ++i) {
      score[i] = (out.size() == 1 ? 1.0 : score[i]) * std::abs(rest[i] - chosen);
    }
  }
  return NodeSequence(std::move(out));
}

/// Leja-ordered Chebyshev-Lobatto nodes of degree n.
inline NodeSequence lcl_nodes(int n) { return leja_order(chebyshev_lobatto(n)); }

/// Points p_alpha = (q_{alpha_1}, ..., q_{alpha_m}), one row per multi-index.
struct UnisolventGrid {
  MultiIndexSet index_set;
  NodeSequence nodes;
  Eigen::MatrixXd points;  // |A| x m
};

namespace detail {

inline void require_nodes(const MultiIndexSet& set, const NodeSequence& nodes) {
  if (nodes.size() < static_cast<std::size_t>(set.max_exponent()) + 1) {
    throw Error(ErrorKind::insufficient_nodes,
                "need " + std::to_string(set.max_exponent() + 1) + " generating nodes, got " +
                    std::to_string(nodes.size()));
  }
}

// Fills basis[a] = N_alpha(x) for every alpha. Per-dimension Newton prefix
// products are tabulated once, so each basis value costs m multiplications.
inline void newton_basis_into(const MultiIndexSet& set, const NodeSequence& nodes,
                              const double* x, std::vector<double>& prefix, double* basis) {
  const int m = set.dimension();
  const int n = set.max_exponent();
  const std::size_t stride = static_cast<std::size_t>(n) + 1;
  prefix.resize(stride * static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double* row = prefix.data() + static_cast<std::size_t>(i) * stride;
    row[0] = 1.0;
    for (int k = 1; k <= n; ++k) row[k] = row[k - 1] * (x[i] - nodes[static_cast<std::size_t>(k - 1)]);
  }
  for (std::size_t a = 0; a < set.size(); ++a) {
    const auto alpha = set[a];
    double v = 1.0;
    for (int i = 0; i < m; ++i) v *= prefix[static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(alpha[static_cast<std::size_t>(i)])];
    basis[a] = v;
  }
}

// Index chains along dimension `dim`: each chain lists the positions of
// alpha, alpha + e_dim, alpha + 2 e_dim, ... starting from alpha_dim = 0.
inline std::vector<std::vector<std::size_t>> lines_along(const MultiIndexSet& set, int dim) {
  std::vector<std::vector<std::size_t>> lines;
  std::vector<int> probe(static_cast<std::size_t>(set.dimension()));
  for (std::size_t a = 0; a < set.size(); ++a) {
    const auto alpha = set[a];
    if (alpha[static_cast<std::size_t>(dim)] != 0) continue;
    std::vector<std::size_t> line{a};
    std::copy(alpha.begin(), alpha.end(), probe.begin());
    for (;;) {
      ++probe[static_cast<std::size_t>(dim)];
      const auto next = set.find(probe);
      if (!next) break;
      line.push_back(*next);
    }
    if (line.size() > 1) lines.push_back(std::move(line));
  }
  return lines;
}

// Tensorised divided differences on a downward-closed set: 1-D Newton
// divided differences along every line of every dimension, in place. Works
// column-wise on a |A| x k block so several right-hand sides share the sweep.
inline void divided_differences(const MultiIndexSet& set, const NodeSequence& nodes,
                                Eigen::Ref<Eigen::MatrixXd> values) {
  for (int dim = 0; dim < set.dimension(); ++dim) {
    for (const auto& line : lines_along(set, dim)) {
      const std::size_t len = line.size();
      for (std::size_t k = 1; k < len; ++k) {
        for (std::size_t j = len - 1; j >= k; --j) {
          const double denom = nodes[j] - nodes[j - k];
          values.row(static_cast<Eigen::Index>(line[j])) =
              (values.row(static_cast<Eigen::Index>(line[j])) -
               values.row(static_cast<Eigen::Index>(line[j - 1]))) /
              denom;
        }
      }
    }
  }
}

}  // namespace detail

inline UnisolventGrid unisolvent_grid(const MultiIndexSet& set, const NodeSequence& nodes) {
  detail::require_nodes(set, nodes);
  const auto m = static_cast<Eigen::Index>(set.dimension());
  Eigen::MatrixXd points(static_cast<Eigen::Index>(set.size()), m);
  for (std::size_t a = 0; a < set.size(); ++a) {
    const auto alpha = set[a];
    for (Eigen::Index i = 0; i < m; ++i) {
      points(static_cast<Eigen::Index>(a), i) = nodes[static_cast<std::size_t>(alpha[static_cast<std::size_t>(i)])];
    }
  }
  return {set, nodes, std::move(points)};
}

/// Newton-form polynomial over a multi-index set: Q(x) = sum_alpha c_alpha N_alpha(x).
class PolynomialSurrogate {
 public:
  PolynomialSurrogate(MultiIndexSet set, NodeSequence nodes, Eigen::VectorXd coefficients,
                      DomainTransform domain = {})
      : set_(std::move(set)), nodes_(std::move(nodes)), coeffs_(std::move(coefficients)),
        domain_(std::move(domain)) {
    detail::require_nodes(set_, nodes_);
    if (static_cast<std::size_t>(coeffs_.size()) != set_.size()) {
      throw Error(ErrorKind::length_mismatch, "coefficient count differs from |A|");
    }
    if (domain_.empty()) domain_ = DomainTransform::unit_cube(set_.dimension());
  }

  const MultiIndexSet& index_set() const noexcept { return set_; }
  const NodeSequence& nodes() const noexcept { return nodes_; }
  const Eigen::VectorXd& newton_coefficients() const noexcept { return coeffs_; }
  const DomainTransform& domain() const noexcept { return domain_; }
  int dimension() const noexcept { return set_.dimension(); }
  int degree() const noexcept { return set_.degree(); }

  /// Evaluates at x in [-1, 1]^m.
  double operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Evaluates at a point given in the original (untransformed) box.
  double evaluate_original(const Eigen::Ref<const Eigen::VectorXd>& x_original) const {
    return (*this)(domain_.to_cube(x_original));
  }

  PolynomialSurrogate with_domain(DomainTransform domain) const {
    return {set_, nodes_, coeffs_, std::move(domain)};
  }

 private:
  MultiIndexSet set_;
  NodeSequence nodes_;
  Eigen::VectorXd coeffs_;
  DomainTransform domain_;
};

/// Row vector (N_alpha(x))_alpha.
inline Eigen::VectorXd newton_basis(const MultiIndexSet& set, const NodeSequence& nodes,
                                    const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != set.dimension()) {
    throw Error(ErrorKind::dimension_mismatch, "point dimension differs from the index set's");
  }
  detail::require_nodes(set, nodes);
  Eigen::VectorXd basis(static_cast<Eigen::Index>(set.size()));
  const Eigen::VectorXd xc = x;
  std::vector<double> prefix;
  detail::newton_basis_into(set, nodes, xc.data(), prefix, basis.data());
  return basis;
}

/// N x |A| matrix of Newton basis values, one row per point.
inline Eigen::MatrixXd newton_matrix(const MultiIndexSet& set, const NodeSequence& nodes,
                                     const Eigen::Ref<const Eigen::MatrixXd>& points) {
  if (points.rows() > 0 && points.cols() != set.dimension()) {
    throw Error(ErrorKind::dimension_mismatch, "point dimension differs from the index set's");
  }
  detail::require_nodes(set, nodes);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor out(points.rows(), static_cast<Eigen::Index>(set.size()));
  std::vector<double> prefix;
  Eigen::VectorXd x(set.dimension());
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    x = points.row(r).transpose();
    detail::newton_basis_into(set, nodes, x.data(), prefix, out.row(r).data());
  }
  return out;
}

inline double newton_evaluate(const PolynomialSurrogate& q, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != q.dimension()) {
    throw Error(ErrorKind::dimension_mismatch, "point dimension differs from the surrogate's");
  }
  const auto& set = q.index_set();
  const auto& nodes = q.nodes();
  const int m = set.dimension();
  const int n = set.max_exponent();
  const std::size_t stride = static_cast<std::size_t>(n) + 1;
  // Small stack-friendly table of 1-D Newton prefix products per dimension.
  std::vector<double> prefix(stride * static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double* row = prefix.data() + static_cast<std::size_t>(i) * stride;
    row[0] = 1.0;
    for (int k = 1; k <= n; ++k) row[k] = row[k - 1] * (x[i] - nodes[static_cast<std::size_t>(k - 1)]);
  }
  const auto& c = q.newton_coefficients();
  double sum = 0.0;
  for (std::size_t a = 0; a < set.size(); ++a) {
    const auto alpha = set[a];
    double v = c[static_cast<Eigen::Index>(a)];
    for (int i = 0; i < m; ++i) v *= prefix[static_cast<std::size_t>(i) * stride + static_cast<std::size_t>(alpha[static_cast<std::size_t>(i)])];
    sum += v;
  }
  return sum;
}

inline double PolynomialSurrogate::operator()(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return newton_evaluate(*this, x);
}

/// Newton interpolant through values at the unisolvent grid (values in
/// index-set order).
inline PolynomialSurrogate dds_fit(const MultiIndexSet& set, const NodeSequence& nodes,
                                   const Eigen::Ref<const Eigen::VectorXd>& values) {
  detail::require_nodes(set, nodes);
  if (static_cast<std::size_t>(values.size()) != set.size()) {
    throw Error(ErrorKind::length_mismatch, "expected " + std::to_string(set.size()) +
                                                " grid values, got " + std::to_string(values.size()));
  }
  Eigen::MatrixXd c = values;
  detail::divided_differences(set, nodes, c);
  return {set, nodes, c.col(0)};
}

/// |A| x |A| matrix whose column alpha holds the Newton coefficients of the
/// Lagrange polynomial L_alpha.
inline Eigen::MatrixXd lagrange_to_newton(const MultiIndexSet& set, const NodeSequence& nodes) {
  detail::require_nodes(set, nodes);
  const auto size = static_cast<Eigen::Index>(set.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(size, size);
  detail::divided_differences(set, nodes, c);
  return c;
}

/// Entry (i, alpha) = L_alpha(x_i).
inline Eigen::MatrixXd lagrange_basis_matrix(const MultiIndexSet& set, const NodeSequence& nodes,
                                             const Eigen::Ref<const Eigen::MatrixXd>& points) {
  if (points.rows() == 0) return Eigen::MatrixXd(0, static_cast<Eigen::Index>(set.size()));
  return newton_matrix(set, nodes, points) * lagrange_to_newton(set, nodes);
}

}  // namespace pmbo
