#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include <boost/random/sobol.hpp>
#include <Eigen/Dense>

#include "pmbo/error.hpp"
#include "pmbo/interpolation.hpp"
#include "pmbo/multiindex.hpp"

namespace pmbo {

/// SplitMix64 finaliser; the counter-based seed derivation used everywhere a
/// master seed fans out into independent streams.
inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of stream `stream`, element `index`, under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

enum class SamplingStrategy { simple_random, sobol, lcl };

inline std::string_view to_string(SamplingStrategy s) noexcept {
  switch (s) {
    case SamplingStrategy::simple_random: return "random";
    case SamplingStrategy::sobol: return "sobol";
    case SamplingStrategy::lcl: return "lcl";
  }
  return "?";
}

inline SamplingStrategy parse_sampling_strategy(std::string_view name) {
  if (name == "random") return SamplingStrategy::simple_random;
  if (name == "sobol") return SamplingStrategy::sobol;
  if (name == "lcl") return SamplingStrategy::lcl;
  throw Error(ErrorKind::invalid_config, "unknown sampling strategy '" + std::string(name) + "'");
}

/// count points in [-1, 1]^m (rows).
///  simple_random: i.i.d. uniform from the seed.
///  sobol: leading points of the base-2 Sobol' sequence (seed unused).
///  lcl: leading unisolvent points of the tensor grid A_{m,n',inf}, with n'
///       the smallest degree whose grid holds `count` points (seed unused).
inline Eigen::MatrixXd initial_design(SamplingStrategy strategy, int count, int m, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::invalid_config, "initial sample count must be >= 1");
  if (m < 1) throw Error(ErrorKind::invalid_dimension, "dimension must be >= 1");
  Eigen::MatrixXd pts(count, m);
  switch (strategy) {
    case SamplingStrategy::simple_random: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      for (int r = 0; r < count; ++r) {
        for (int c = 0; c < m; ++c) pts(r, c) = unif(rng);
      }
      break;
    }
    case SamplingStrategy::sobol: {
      boost::random::sobol gen(static_cast<std::size_t>(m));
      const double scale = 1.0 / (static_cast<double>(gen.max()) + 1.0);
      for (int r = 0; r < count; ++r) {
        for (int c = 0; c < m; ++c) pts(r, c) = 2.0 * (static_cast<double>(gen()) * scale) - 1.0;
      }
      break;
    }
    case SamplingStrategy::lcl: {
      int n = 0;
      while (cardinality(m, n, kInfNorm) < static_cast<std::size_t>(count)) ++n;
      const auto grid = unisolvent_grid(MultiIndexSet(m, n, kInfNorm), lcl_nodes(n));
      pts = grid.points.topRows(count);
      break;
    }
  }
  return pts;
}

}  // namespace pmbo
