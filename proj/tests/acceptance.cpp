// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ligme/design.hpp"
#include "ligme/harness.hpp"
#include "ligme/penalty.hpp"
#include "ligme/prox.hpp"
#include "ligme/solver.hpp"

using namespace ligme;

namespace {

std::mt19937_64 gen(424242);

Matrix randn(Index r, Index c) {
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = n(gen);
  return m;
}

Vector randn(Index n) { return randn(n, 1).col(0); }

double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

// 1. Certificates for designed B on random instances.
Outcome certificate_soundness() {
  const auto t0 = std::chrono::steady_clock::now();
  const double thetas[] = {0.0, 0.5, 0.99, 1.0};
  double worst = 1e300;
  for (int t = 0; t < 50; ++t) {
    const Matrix A = randn(20, 30);
    const Matrix L = randn(10, 30);
    const double mu = uniform(0.1, 10.0);
    const double theta = thetas[t % 4];
    const BDesign d = design_b(A, L, mu, theta);
    const Problem p{LinOp::dense(A), Vector::Zero(20), LinOp::dense(L), LinOp::dense(d.B), mu, PenaltySpec::l1(10)};
    worst = std::min(worst, certify_convexity(p, 1e-8).min_eig);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream os;
  os << "worst min_eig " << worst << ", " << secs << " s";
  return {worst >= -1e-8 && secs < 30.0, os.str()};
}

// 2. L = Id gives B^T B = (theta/mu) A^T A.
Outcome selesnick_reduction() {
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Matrix A = randn(20, 30);
    const double mu = uniform(0.1, 10.0);
    const double theta = t % 2 ? 1.0 : uniform(0.0, 1.0);
    const BDesign d = design_b(A, Matrix::Identity(30, 30), mu, theta);
    const Matrix target = theta / mu * A.transpose() * A;
    worst = std::max(worst, (d.B.transpose() * d.B - target).norm() / target.norm());
  }
  std::ostringstream os;
  os << "worst relative Frobenius error " << worst;
  return {worst <= 1e-9, os.str()};
}

// 3. solve and the Selesnick iteration reach the same objective.
Outcome cross_algorithm() {
  double worst = 0.0;
  int max_iters = 0;
  for (int t = 0; t < 10; ++t) {
    const Matrix A = randn(20, 30);
    const Vector y = randn(20);
    const double mu = uniform(0.2, 2.0);
    const double theta = 0.5;
    const Matrix B = design_b(A, Matrix::Identity(30, 30), mu, theta).B;
    const Problem p{LinOp::dense(A), y, LinOp::identity(30), LinOp::dense(B), mu, PenaltySpec::l1(30)};
    SolverConfig cfg;
    cfg.max_iter = 50000;
    cfg.p_residual_tol = 1e-13;
    const SolveReport a = solve(p, cfg);
    SelesnickConfig sc;
    sc.max_iter = 50000;
    sc.tol = 1e-14;
    const SelesnickReport b = selesnick_solve(A, B, y, mu, theta, sc);
    const double ja = objective(p, a.x).value;
    const double jb = objective(p, b.x).value;
    worst = std::max(worst, std::abs(ja - jb) / std::abs(ja));
    max_iters = std::max({max_iters, a.iterations, b.iterations});
  }
  std::ostringstream os;
  os << "worst relative objective gap " << worst << ", max iterations " << max_iters;
  return {worst <= 1e-6, os.str()};
}

// 4. Identity LASSO limit.
Outcome closed_form_limit() {
  const Index n = 50;
  const Vector y = 3.0 * randn(n);
  const double mu = 1.1;
  const Problem p{LinOp::identity(n), y, LinOp::identity(n), LinOp::zero(n, n), mu, PenaltySpec::l1(n)};
  SolverConfig cfg;
  cfg.max_iter = 100000;
  cfg.p_residual_tol = 1e-15;
  const SolveReport r = solve(p, cfg);
  const double err = (r.x - soft_threshold(y, mu)).lpNorm<Eigen::Infinity>();
  std::ostringstream os;
  os << "sup error " << err << " after " << r.iterations << " iterations";
  return {err <= 1e-8, os.str()};
}

// 5. Fejer monotonicity on the 1-d TV instance.
Outcome fejer() {
  ExperimentSpec spec = ExperimentSpec::defaults(Scenario::Tv1d);
  Rng rng = make_stream(spec.seed, 0);
  const ScenarioInstance inst = gen_scenario(spec, rng);
  bool ok = true;
  std::ostringstream os;
  for (const Variant& v : inst.variants) {
    SolverConfig cfg;
    cfg.kappa = spec.kappa;
    cfg.p_residual_tol = 0.0;
    cfg.max_iter = 150000;
    const LigmeOperator op(v.problem, cfg);
    const SolverState ref = solve(op, cfg).final_state;
    SolverState u = SolverState::zeros(v.problem);
    double prev = op.p_distance(u, ref);
    const double start = prev;
    double worst = -1e300;
    for (int k = 1; k <= 15000; ++k) {
      u = op.step(u);
      const double d = op.p_distance(u, ref);
      worst = std::max(worst, d - prev);
      prev = d;
    }
    ok = ok && worst <= 1e-9;
    os << v.name << ": max increase " << worst << " (distance " << start << " -> " << prev << "); ";
  }
  return {ok, os.str()};
}

// 6. Scalar GME with B = 1/sqrt(gamma) is the normalized MC penalty.
Outcome mc_bridge() {
  double worst = 0.0;
  bool range_ok = true;
  for (double g : {1.0, 0.1}) {
    const LinOp b = LinOp::dense(Matrix::Constant(1, 1, 1.0 / std::sqrt(g)));
    for (int i = -400; i <= 400; ++i) {
      const double x = g * i / 100.0;
      const double v = gme_value(PenaltySpec::l1(1), b, Vector::Constant(1, x)).value;
      const double a = std::abs(x);
      const double mc = a >= g ? 1.0 : 2 * a / g - x * x / (g * g);
      const double normalized = 2.0 / g * v;
      worst = std::max(worst, std::abs(normalized - mc));
      range_ok = range_ok && normalized >= -1e-12 && normalized <= 1.0 + 1e-12;
    }
  }
  const double g = 1e-3;
  const LinOp b = LinOp::dense(Matrix::Constant(1, 1, 1.0 / std::sqrt(g)));
  const double at_gamma = 2.0 / g * gme_value(PenaltySpec::l1(1), b, Vector::Constant(1, g)).value;
  std::ostringstream os;
  os << "worst deviation " << worst << ", normalized value at |x| = gamma = 1e-3: " << at_gamma;
  return {worst <= 1e-8 && range_ok && at_gamma >= 0.99, os.str()};
}

// 7. 1-d TV experiment.
Outcome tv_experiment() {
  ExperimentSpec spec = ExperimentSpec::defaults(Scenario::Tv1d);
  spec.replications = 20;
  const ExperimentResult r = run_experiment(spec);
  const double ratio = r.ligme().mse / r.convex().mse;
  std::ostringstream os;
  os << "MSE TV " << r.convex().mse << ", LiGME " << r.ligme().mse << ", ratio " << ratio
     << (r.certificates_hold() ? "" : ", certificate FAILED");
  return {r.certificates_hold() && r.ligme().mse < r.convex().mse && ratio <= 0.5, os.str()};
}

// 8. Low-rank completion rank recovery.
Outcome completion_experiment() {
  ExperimentSpec spec = ExperimentSpec::defaults(Scenario::Completion);
  spec.replications = 20;
  const ExperimentResult r = run_experiment(spec);
  int ligme3 = 0, nuc_over = 0;
  for (int k : r.ligme().num_ranks) ligme3 += (k == 3);
  for (int k : r.convex().num_ranks) nuc_over += (k > 3);
  const double fl = ligme3 / 20.0, fn = nuc_over / 20.0;
  std::ostringstream os;
  os << "LiGME rank 3 in " << ligme3 << "/20, nuclear rank > 3 in " << nuc_over << "/20; MSE nuclear "
     << r.convex().mse << ", LiGME " << r.ligme().mse;
  return {r.certificates_hold() && fl >= 0.8 && fn >= 0.8, os.str()};
}

// Independent 2 x 2 singular value thresholding through the closed-form
// eigendecomposition of X^T X.
Matrix svt2x2(const Matrix& x, double g) {
  const Matrix s = x.transpose() * x;
  const double phi = 0.5 * std::atan2(2 * s(0, 1), s(0, 0) - s(1, 1));
  const double c = std::cos(phi), sn = std::sin(phi);
  Vector v1(2), v2(2);
  v1 << c, sn;
  v2 << -sn, c;
  Matrix out = Matrix::Zero(2, 2);
  for (const Vector& v : {v1, v2}) {
    const double sigma = std::sqrt(std::max(0.0, v.dot(s * v)));
    if (sigma > g) out += (1.0 - g / sigma) * x * v * v.transpose();
  }
  return out;
}

// 9. Prox oracles.
Outcome prox_oracles() {
  const double h = 1e-4;
  double worst_l1 = 0.0, worst_nuc = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double z = uniform(-3.0, 3.0), g = uniform(0.05, 2.0);
    double best = 0.0, best_val = 1e300;
    for (double y = -4.0; y <= 4.0; y += h) {
      const double val = g * std::abs(y) + 0.5 * (z - y) * (z - y);
      if (val < best_val) {
        best_val = val;
        best = y;
      }
    }
    worst_l1 = std::max(worst_l1, std::abs(prox(PenaltySpec::l1(1), Vector::Constant(1, z), g)(0) - best));

    const Matrix x = randn(2, 2);
    const double gn = uniform(0.05, 1.5);
    const Vector p = prox(PenaltySpec::nuclear(2, 2), Eigen::Map<const Vector>(x.data(), 4), gn);
    worst_nuc = std::max(worst_nuc, (Eigen::Map<const Matrix>(p.data(), 2, 2) - svt2x2(x, gn)).cwiseAbs().maxCoeff());
  }
  std::ostringstream os;
  os << "worst l1 deviation " << worst_l1 << ", worst nuclear deviation " << worst_nuc;
  return {worst_l1 <= 2 * h && worst_nuc <= 2 * h, os.str()};
}

// 10. Gradient of the Moreau envelope against central differences.
Outcome gradient_check() {
  const PenaltySpec specs[] = {
      PenaltySpec::l1(6), PenaltySpec::nuclear(2, 3),
      PenaltySpec::separable({{0.5, PenaltySpec::l1(2)}, {1.5, PenaltySpec::nuclear(2, 2)}})};
  const double h = 1e-5;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const PenaltySpec& s = specs[t % 3];
    const Vector x = 2.0 * randn(6);
    const double g = uniform(0.3, 2.0);
    const Vector grad = moreau_gradient(s, x, g);
    for (Index i = 0; i < 6; ++i) {
      Vector xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      const double fd = (moreau_envelope(s, xp, g) - moreau_envelope(s, xm, g)) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad(i)));
    }
  }
  std::ostringstream os;
  os << "worst deviation " << worst;
  return {worst <= 1e-5, os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"certificate soundness", certificate_soundness},
      {"Selesnick reduction", selesnick_reduction},
      {"cross-algorithm agreement", cross_algorithm},
      {"closed-form limit", closed_form_limit},
      {"averagedness / Fejer monotonicity", fejer},
      {"MC-penalty bridge", mc_bridge},
      {"1-d TV experiment", tv_experiment},
      {"low-rank completion experiment", completion_experiment},
      {"prox oracles", prox_oracles},
      {"Moreau gradient check", gradient_check},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2zu: %s  %s [%s] (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
