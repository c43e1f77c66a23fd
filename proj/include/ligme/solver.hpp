#pragma once

#include <optional>
#include <vector>

#include "ligme/penalty.hpp"

namespace ligme {

struct SolverConfig {
  double kappa = 1.001;
  /// Step sizes; unset means the default choice from auto_step_sizes.
  std::optional<double> sigma;
  std::optional<double> tau;
  int max_iter = 100000;
  /// Stop once ||u_{k+1} - u_k||_P <= p_residual_tol * (1 + ||u_k||_P).
  /// Zero runs exactly max_iter iterations.
  double p_residual_tol = 1e-9;
  /// Constant Krasnosel'skii-Mann relaxation alpha in (0, 1]; 1 is the plain iteration.
  double relaxation = 1.0;
  /// Record J(x_k) every this many iterations (0 disables; the final value is
  /// always recorded when positive).
  int objective_every = 0;
  InnerSolveCfg inner;
  /// Confirm P > 0 by a Cholesky factorization at setup.
  bool verify_metric = true;
};

/// (x, v, w) in X x Z x Z.
struct SolverState {
  Vector x;
  Vector v;
  Vector w;
  int k = 0;

  static SolverState zeros(const Problem& p);
};

struct StepSizes {
  double sigma = 0.0;
  double tau = 0.0;
};

/// sigma = ||(kappa/2) A^T A + mu L^T L||_op + (kappa - 1),
/// tau   = (kappa/2 + 2/kappa) mu ||B||_op^2 + (kappa - 1).
/// Throws std::invalid_argument if kappa <= 1.
StepSizes auto_step_sizes(const Problem& p, double kappa);

/// Precomputed dense pieces of the operator T and its metric P for one problem.
///
/// Setup validates the problem, picks step sizes, and checks the step-size
/// condition; it throws std::invalid_argument if the condition fails.
class LigmeOperator {
 public:
  LigmeOperator(Problem p, const SolverConfig& cfg);

  const Problem& problem() const { return p_; }
  double sigma() const { return sigma_; }
  double tau() const { return tau_; }
  double kappa() const { return kappa_; }

  /// Same operator with a different observation vector y (no re-validation).
  LigmeOperator with_observation(const Vector& y) const;

  /// One application of T: (x, v, w) -> (xi, zeta, eta).
  SolverState step(const SolverState& s) const;

  /// <a, b>_P.
  double p_inner(const SolverState& a, const SolverState& b) const;
  double p_norm(const SolverState& s) const;
  /// ||a - b||_P.
  double p_distance(const SolverState& a, const SolverState& b) const;

  /// The block operator P materialized as a dense (n + 2l) square matrix.
  Matrix metric_matrix() const;
  /// Smallest eigenvalue of sigma Id - (kappa/2) A^T A - mu L^T L.
  double stepsize_margin() const;

 private:
  Problem p_;
  double sigma_ = 0.0;
  double tau_ = 0.0;
  double kappa_ = 0.0;
  Matrix ata_;
  Matrix btb_;
  Vector aty_;
  bool has_b_ = false;
};

/// Convenience form of LigmeOperator::step.
SolverState t_step(const Problem& p, const SolverConfig& cfg, const SolverState& s);

struct SolveReport {
  Vector x;
  SolverState final_state;
  int iterations = 0;
  bool converged = false;
  double sigma = 0.0;
  double tau = 0.0;
  std::vector<double> p_residual;
  /// (iteration, J) pairs.
  std::vector<std::pair<int, double>> objective;
  /// ||x_k - ground_truth||^2 per iteration, when a ground truth is supplied.
  std::vector<double> se;
  ConvexityCertificate certificate;
};

/// Iterates u_{k+1} = (1 - alpha) u_k + alpha T(u_k) from `init`.
/// Throws std::runtime_error if the state becomes non-finite. A failed
/// convexity certificate is reported, not fatal; in that case the metric
/// check at setup is skipped, since P > 0 is no longer guaranteed.
SolveReport solve(const Problem& p, const SolverConfig& cfg,
                  const std::optional<SolverState>& init = std::nullopt,
                  const std::optional<Vector>& ground_truth = std::nullopt);

/// Same iteration on a prebuilt operator; no convexity certificate is computed.
SolveReport solve(const LigmeOperator& op, const SolverConfig& cfg,
                  const std::optional<SolverState>& init = std::nullopt,
                  const std::optional<Vector>& ground_truth = std::nullopt);

struct SelesnickConfig {
  int max_iter = 50000;
  double tol = 1e-12;  // on ||x_{k+1} - x_k|| / (1 + ||x_k||); zero disables
  /// Fraction of the admissible step bound.
  double step_fraction = 0.9;
};

struct SelesnickReport {
  Vector x;
  Vector v;
  int iterations = 0;
  bool converged = false;
  double step = 0.0;
};

/// Forward-backward iteration for 0.5||y - Ax||^2 + mu (||.||_1)_B(x) in the
/// case B^T B = (theta / mu) A^T A, theta in [0, 1).
/// Throws std::invalid_argument when that relation fails (1e-8 relative).
SelesnickReport selesnick_solve(const Matrix& A, const Matrix& B, const Vector& y, double mu,
                                double theta, const SelesnickConfig& cfg = {},
                                const std::optional<std::pair<Vector, Vector>>& init = std::nullopt);

}  // namespace ligme
