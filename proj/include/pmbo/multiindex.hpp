#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmbo/error.hpp"

namespace pmbo {

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

namespace detail {

// True iff ||alpha||_p <= n. Integer arithmetic for p in {1, 2, inf}.
inline bool in_lp_ball(std::span<const int> alpha, int n, double p) {
  if (std::isinf(p)) {
    return std::all_of(alpha.begin(), alpha.end(), [n](int a) { return a <= n; });
  }
  if (p == 1.0) {
    long sum = 0;
    for (int a : alpha) sum += a;
    return sum <= n;
  }
  if (p == 2.0) {
    long sum = 0;
    for (int a : alpha) sum += static_cast<long>(a) * a;
    return sum <= static_cast<long>(n) * n;
  }
  double sum = 0.0;
  for (int a : alpha) sum += std::pow(static_cast<double>(a), p);
  const double bound = std::pow(static_cast<double>(n), p);
  return sum <= bound * (1.0 + 1e-12);
}

// Ordering with the last coordinate most significant.
inline bool lex_less(std::span<const int> a, std::span<const int> b) {
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace detail

/// Multi-index set {alpha in N^m : ||alpha||_p <= n}, stored as a flat
/// row-major array in ascending lexicographic order (last coordinate most
/// significant). The set is downward closed, so every alpha - e_i with
/// alpha_i > 0 is also a member.
class MultiIndexSet {
 public:
  MultiIndexSet(int dimension, int degree, double norm_p = 2.0)
      : dim_(dimension), degree_(degree), p_(norm_p) {
    if (dimension < 1) {
      throw Error(ErrorKind::invalid_dimension, "dimension must be >= 1");
    }
    if (degree < 0) {
      throw Error(ErrorKind::invalid_degree_parameter, "degree must be >= 0");
    }
    if (!(norm_p > 0.0)) {
      throw Error(ErrorKind::invalid_degree_parameter, "norm parameter p must be > 0");
    }
    enumerate();
  }

  int dimension() const noexcept { return dim_; }
  int degree() const noexcept { return degree_; }
  double norm() const noexcept { return p_; }
  std::size_t size() const noexcept { return exponents_.size() / static_cast<std::size_t>(dim_); }

  std::span<const int> operator[](std::size_t k) const {
    return {exponents_.data() + k * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }

  /// Position of alpha in the set, if present.
  std::optional<std::size_t> find(std::span<const int> alpha) const {
    std::size_t lo = 0;
    std::size_t hi = size();
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (detail::lex_less((*this)[mid], alpha)) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    if (lo < size() && std::equal(alpha.begin(), alpha.end(), (*this)[lo].begin())) return lo;
    return std::nullopt;
  }

  bool contains(std::span<const int> alpha) const { return find(alpha).has_value(); }

  /// Largest single exponent appearing in the set (equals the degree).
  int max_exponent() const noexcept {
    return exponents_.empty() ? 0 : *std::max_element(exponents_.begin(), exponents_.end());
  }

  friend bool operator==(const MultiIndexSet& a, const MultiIndexSet& b) {
    return a.dim_ == b.dim_ && a.exponents_ == b.exponents_;
  }

 private:
  // Odometer over the downward-closed ball: bump the lowest coordinate, and on
  // leaving the ball reset it and carry into the next one.
  void enumerate() {
    std::vector<int> alpha(static_cast<std::size_t>(dim_), 0);
    for (;;) {
      exponents_.insert(exponents_.end(), alpha.begin(), alpha.end());
      std::size_t i = 0;
      for (; i < alpha.size(); ++i) {
        ++alpha[i];
        if (detail::in_lp_ball(alpha, degree_, p_)) break;
        alpha[i] = 0;
      }
      if (i == alpha.size()) break;
    }
  }

  int dim_;
  int degree_;
  double p_;
  std::vector<int> exponents_;
};

inline MultiIndexSet build_multi_index_set(int m, int n, double p = 2.0) { return {m, n, p}; }

inline std::size_t cardinality(const MultiIndexSet& set) noexcept { return set.size(); }

/// |A_{m,n,p}| without keeping the set around.
inline std::size_t cardinality(int m, int n, double p) { return MultiIndexSet(m, n, p).size(); }

}  // namespace pmbo
