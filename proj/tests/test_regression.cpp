#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "pmbo/regression.hpp"

using namespace pmbo;

namespace {

Eigen::MatrixXd uniform_points(int count, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return Eigen::MatrixXd::NullaryExpr(count, m, [&] { return u(rng); });
}

// A random element of the space: random values on the grid, interpolated.
PolynomialSurrogate random_polynomial(const MultiIndexSet& set, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const Eigen::VectorXd v =
      Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(set.size()), [&] { return normal(rng); });
  return dds_fit(set, lcl_nodes(set.degree()), v);
}

Eigen::VectorXd evaluate_rows(const PolynomialSurrogate& q, const Eigen::MatrixXd& pts) {
  Eigen::VectorXd out(pts.rows());
  for (Eigen::Index r = 0; r < pts.rows(); ++r) out[r] = q(pts.row(r).transpose());
  return out;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io_failure;
}

}  // namespace

TEST(RegressionMatrix, IdentityOnGrid) {
  const MultiIndexSet set(2, 3, 2.0);
  const auto nodes = lcl_nodes(3);
  const auto R = build_regression_matrix(set, nodes, unisolvent_grid(set, nodes).points);
  EXPECT_LT((R - Eigen::MatrixXd::Identity(R.rows(), R.cols())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RegressionMatrix, SingleSampleRowSumsToOne) {
  Eigen::MatrixXd x(1, 1);
  x << 0.37;
  const auto R = build_regression_matrix(MultiIndexSet(1, 1, kInfNorm), lcl_nodes(1), x);
  ASSERT_EQ(R.cols(), 2);
  EXPECT_NEAR(R.sum(), 1.0, 1e-14);
}

TEST(RegressionMatrix, EmptySamples) {
  const auto R = build_regression_matrix(MultiIndexSet(2, 2, 2.0), lcl_nodes(2), Eigen::MatrixXd(0, 2));
  EXPECT_EQ(R.rows(), 0);
  EXPECT_EQ(R.cols(), 6);
}

TEST(LeastSquares, ExactRecovery) {
  std::mt19937_64 rng(21);
  for (double p : {1.0, 2.0, kInfNorm}) {
    for (int m = 1; m <= 3; ++m) {
      for (int n = 1; n <= 4; ++n) {
        const MultiIndexSet set(m, n, p);
        const auto g = random_polynomial(set, rng);
        const Eigen::MatrixXd x = uniform_points(2 * static_cast<int>(set.size()), m, rng);
        const auto q = least_squares_fit(make_regression_problem(set, lcl_nodes(n), x, evaluate_rows(g, x)));
        const Eigen::MatrixXd fresh = uniform_points(100, m, rng);
        const Eigen::VectorXd want = evaluate_rows(g, fresh);
        EXPECT_LT((evaluate_rows(q, fresh) - want).cwiseAbs().maxCoeff(), 1e-8 * std::max(1.0, want.cwiseAbs().maxCoeff()))
            << "m=" << m << " n=" << n << " p=" << p;
      }
    }
  }
}

TEST(LeastSquares, GridSamplesMatchInterpolation) {
  std::mt19937_64 rng(2);
  const MultiIndexSet set(2, 4, 2.0);
  const auto nodes = lcl_nodes(4);
  const auto grid = unisolvent_grid(set, nodes);
  const Eigen::VectorXd f = Eigen::VectorXd::Random(grid.points.rows());
  const auto ls = least_squares_fit(make_regression_problem(set, nodes, grid.points, f));
  const auto dd = dds_fit(set, nodes, f);
  EXPECT_LT((ls.newton_coefficients() - dd.newton_coefficients()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(LeastSquares, NoisyResidualBounded) {
  std::mt19937_64 rng(6);
  const MultiIndexSet set(2, 3, 2.0);
  const auto g = random_polynomial(set, rng);
  const int N = 60;
  const double eps = 1e-3;
  const Eigen::MatrixXd x = uniform_points(N, 2, rng);
  std::uniform_real_distribution<double> noise(-eps, eps);
  Eigen::VectorXd f = evaluate_rows(g, x);
  for (auto& v : f) v += noise(rng);
  const auto q = least_squares_fit(make_regression_problem(set, lcl_nodes(3), x, f));
  EXPECT_LE((evaluate_rows(q, x) - f).norm(), eps * std::sqrt(N));
}

TEST(LeastSquares, PermutationInvariant) {
  std::mt19937_64 rng(9);
  const MultiIndexSet set(2, 3, 2.0);
  const Eigen::MatrixXd x = uniform_points(30, 2, rng);
  const Eigen::VectorXd f = x.col(0).array().sin() + x.col(1).array().square();
  std::vector<int> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd xp(30, 2);
  Eigen::VectorXd fp(30);
  for (int i = 0; i < 30; ++i) {
    xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    fp[i] = f[perm[static_cast<std::size_t>(i)]];
  }
  const auto a = least_squares_fit(make_regression_problem(set, lcl_nodes(3), x, f));
  const auto b = least_squares_fit(make_regression_problem(set, lcl_nodes(3), xp, fp));
  EXPECT_LT((a.newton_coefficients() - b.newton_coefficients()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LeastSquares, Underdetermined) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = uniform_points(4, 2, rng);
  EXPECT_EQ(kind_of([&] {
              (void)least_squares_fit(make_regression_problem(MultiIndexSet(2, 2, 2.0), lcl_nodes(2), x,
                                                              Eigen::VectorXd::Zero(4)));
            }),
            ErrorKind::underdetermined);
}

TEST(LeastSquares, RankDeficientOnCollinearSamples) {
  // Every sample on the line x2 = 0: the x2-dependent columns vanish up to combination.
  Eigen::MatrixXd x(20, 2);
  x.col(0) = Eigen::VectorXd::LinSpaced(20, -1.0, 1.0);
  x.col(1).setZero();
  EXPECT_EQ(kind_of([&] {
              (void)least_squares_fit(make_regression_problem(MultiIndexSet(2, 2, 2.0), lcl_nodes(2), x,
                                                              x.col(0)));
            }),
            ErrorKind::rank_deficient);
}

TEST(LeastSquares, LengthMismatch) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = uniform_points(10, 2, rng);
  EXPECT_THROW((void)make_regression_problem(MultiIndexSet(2, 1, 2.0), lcl_nodes(1), x, Eigen::VectorXd::Zero(9)),
               Error);
}

TEST(DegreeGrowth, Examples) {
  EXPECT_LT(cardinality(2, 3, 2.0), 30u);
  EXPECT_TRUE(should_increase_degree(2, 2, 2.0, 30));
  EXPECT_EQ(cardinality(2, 3, kInfNorm), 16u);
  EXPECT_FALSE(should_increase_degree(2, 2, kInfNorm, 9));
  EXPECT_FALSE(should_increase_degree(2, 2, 2.0, 0));
}

TEST(DegreeGrowth, MonotoneInSampleCount) {
  for (double p : {1.0, 2.0, kInfNorm}) {
    for (int n = 0; n <= 5; ++n) {
      bool seen = false;
      for (std::size_t N = 0; N <= 80; ++N) {
        const bool now = should_increase_degree(n, 2, p, N);
        EXPECT_TRUE(now || !seen);
        seen = seen || now;
        EXPECT_EQ(now, cardinality(2, n + 1, p) < N);
      }
    }
  }
}
