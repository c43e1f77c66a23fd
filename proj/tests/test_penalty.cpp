#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "ligme/design.hpp"
#include "ligme/penalty.hpp"
#include "test_util.hpp"

using namespace ligme;
using testutil::randn;
using testutil::uniform;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

LinOp scalar_op(double b) { return LinOp::dense(Matrix::Constant(1, 1, b)); }

// Closed form of the normalized MC penalty scaled by gamma / 2.
double mc_closed(double x, double g) {
  const double a = std::abs(x);
  return a <= g ? a - x * x / (2 * g) : g / 2;
}

Problem random_problem(Index m, Index n, Index l, double mu, double theta) {
  const Matrix A = randn(m, n);
  const Matrix L = randn(l, n);
  Problem p{LinOp::dense(A), randn(m), LinOp::dense(L), LinOp::dense(design_b(A, L, mu, theta).B), mu,
            PenaltySpec::l1(l)};
  return p;
}

}  // namespace

TEST_CASE("gme_value: B = 0 returns Psi") {
  const Vector z = randn(6);
  const auto g = gme_value(PenaltySpec::l1(6), LinOp::zero(6, 6), z);
  CHECK(g.converged);
  CHECK(g.value == doctest::Approx(z.lpNorm<1>()).epsilon(1e-15));
  CHECK(g.iterations == 0);
}

TEST_CASE("gme_value: scalar MC bridge") {
  for (double g : {1.0, 0.1, 0.01}) {
    const LinOp b = scalar_op(1.0 / std::sqrt(g));
    for (double r : {-3.0, -1.0, -0.6, -0.1, 0.0, 0.3, 0.99, 1.0, 1.7}) {
      const double x = r * g;
      const auto v = gme_value(PenaltySpec::l1(1), b, scalar(x));
      CHECK(v.converged);
      CHECK(std::abs(v.value - mc_closed(x, g)) <= 1e-8);
      const double normalized = 2.0 / g * v.value;
      CHECK(normalized >= -1e-12);
      CHECK(normalized <= 1.0 + 1e-12);
      if (std::abs(x) >= g) CHECK(normalized == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("gme_value: B = c Id equals Psi minus the Moreau envelope") {
  const PenaltySpec s = PenaltySpec::separable({{1.0, PenaltySpec::l1(2)}, {0.5, PenaltySpec::nuclear(2, 2)}});
  for (double c : {0.3, 1.0, 2.5}) {
    for (int t = 0; t < 5; ++t) {
      const Vector z = 2 * randn(6);
      const auto v = gme_value(s, LinOp::dense(c * Matrix::Identity(6, 6)), z);
      CHECK(v.converged);
      CHECK(std::abs(v.value - (eval(s, z) - moreau_envelope(s, z, 1.0 / (c * c)))) <= 1e-8);
    }
  }
}

TEST_CASE("gme_value: 2-d grid oracle") {
  for (int t = 0; t < 5; ++t) {
    const Matrix bm = randn(2, 2);
    const Vector z = 2 * randn(2);
    double best = 1e300;
    for (int i = 0; i <= 1000; ++i) {
      for (int j = 0; j <= 1000; ++j) {
        Vector v(2);
        v << -5 + 1e-2 * i, -5 + 1e-2 * j;
        const Vector d = bm * (z - v);
        best = std::min(best, v.lpNorm<1>() + 0.5 * d.squaredNorm());
      }
    }
    const double oracle = z.lpNorm<1>() - best;
    const auto v = gme_value(PenaltySpec::l1(2), LinOp::dense(bm), z);
    CHECK(std::abs(v.value - oracle) <= 2e-2);
  }
}

TEST_CASE("gme_value is bounded by 0 and Psi") {
  const PenaltySpec s = PenaltySpec::l1(5);
  for (int t = 0; t < 20; ++t) {
    const Vector z = 2 * randn(5);
    const auto v = gme_value(s, LinOp::dense(randn(3, 5)), z);
    CHECK(v.value >= -1e-9);
    CHECK(v.value <= eval(s, z) + 1e-12);
  }
}

TEST_CASE("gme_value reports inner non-convergence") {
  InnerSolveCfg cfg;
  cfg.max_iter = 1;
  cfg.tol = 1e-15;
  const auto v = gme_value(PenaltySpec::l1(4), LinOp::dense(randn(4, 4)), 3 * randn(4), cfg);
  CHECK_FALSE(v.converged);
  CHECK(v.iterations == 1);
}

TEST_CASE("objective") {
  Problem p{LinOp::dense(randn(4, 5)), Vector::Zero(4), LinOp::identity(5), LinOp::zero(5, 5), 0.7,
            PenaltySpec::l1(5)};
  CHECK(objective(p, Vector::Zero(5)).value == 0.0);

  p.y = randn(4);
  const Vector x = randn(5);
  const double lasso = 0.5 * (p.y - p.A.apply(x)).squaredNorm() + 0.7 * x.lpNorm<1>();
  CHECK(objective(p, x).value == doctest::Approx(lasso).epsilon(1e-14));
  CHECK_THROWS_AS(objective(p, Vector::Zero(4)), std::invalid_argument);
}

TEST_CASE("objective is convex along segments when the certificate holds") {
  for (int inst = 0; inst < 4; ++inst) {
    const Problem p = random_problem(8, 6, 4, uniform(0.5, 3.0), 1.0);
    REQUIRE(certify_convexity(p).holds);
    for (int t = 0; t < 25; ++t) {
      const Vector a = 3 * randn(6), b = 3 * randn(6);
      const double mid = objective(p, 0.5 * (a + b)).value;
      CHECK(mid <= 0.5 * objective(p, a).value + 0.5 * objective(p, b).value + 1e-8);
    }
  }
}

TEST_CASE("certificate fails when mu exceeds the design and a segment breaks") {
  // A = L = B = 1: A^T A - mu B^T B = 1 - mu
  Problem p{scalar_op(1.0), scalar(0.0), scalar_op(1.0), scalar_op(1.0), 0.4, PenaltySpec::l1(1)};
  CHECK(certify_convexity(p).holds);
  CHECK(certify_convexity(p).min_eig == doctest::Approx(0.6));
  p.mu = 2.0;
  const auto cert = certify_convexity(p);
  CHECK_FALSE(cert.holds);
  CHECK(cert.min_eig == doctest::Approx(-1.0));

  bool broken = false;
  for (double a = -3.0; a <= 3.0 && !broken; a += 0.1)
    for (double b = -3.0; b <= 3.0 && !broken; b += 0.1) {
      const double mid = objective(p, scalar(0.5 * (a + b))).value;
      broken = mid > 0.5 * objective(p, scalar(a)).value + 0.5 * objective(p, scalar(b)).value + 1e-8;
    }
  CHECK(broken);
}

TEST_CASE("certify_convexity") {
  const Matrix A = randn(6, 4);
  Problem p{LinOp::dense(A), randn(6), LinOp::identity(4), LinOp::zero(4, 4), 1.0, PenaltySpec::l1(4)};
  const auto c = certify_convexity(p);
  CHECK(c.holds);
  const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(A.transpose() * A).eigenvalues().minCoeff();
  CHECK(c.min_eig == doctest::Approx(lmin).epsilon(1e-10));
  CHECK(c.tolerance == 1e-8);

  for (int t = 0; t < 5; ++t) CHECK(certify_convexity(random_problem(7, 9, 5, uniform(0.1, 10.0), 1.0)).min_eig >= -1e-8);

  CHECK_THROWS_AS(certify_convexity(p, 1e-8, 3), std::length_error);
  p.mu = -1.0;
  CHECK_THROWS_AS(certify_convexity(p), std::invalid_argument);
}

TEST_CASE("check_l1_linear_region") {
  const LinOp L = LinOp::dense(randn(4, 6));
  CHECK(check_l1_linear_region(LinOp::dense(randn(4, 4)), L, Vector::Zero(6)));
  CHECK(check_l1_linear_region(LinOp::zero(4, 4), L, 100 * randn(6)));

  int inside = 0;
  for (int t = 0; t < 200 && inside < 20; ++t) {
    const LinOp B = LinOp::dense(0.5 * randn(4, 4));
    const Vector x = 0.2 * randn(6);
    if (!check_l1_linear_region(B, L, x)) continue;
    ++inside;
    const Vector lx = L.apply(x);
    const double closed = lx.lpNorm<1>() - 0.5 * B.apply(lx).squaredNorm();
    CHECK(std::abs(gme_value(PenaltySpec::l1(4), B, lx).value - closed) <= 1e-6);
  }
  CHECK(inside >= 10);

  // outside the region the closed form over-counts
  const LinOp b = scalar_op(1.0);
  CHECK_FALSE(check_l1_linear_region(b, scalar_op(1.0), scalar(2.0)));
  CHECK(gme_value(PenaltySpec::l1(1), b, scalar(2.0)).value > 2.0 - 0.5 * 4.0);
}
