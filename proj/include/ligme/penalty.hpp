#pragma once

#include "ligme/linops.hpp"
#include "ligme/prox.hpp"

namespace ligme {

/// Regularized least-squares instance
///   J(x) = 0.5 ||y - A x||^2 + mu * Psi_B(L x),
/// where Psi_B(z) = Psi(z) - min_v [Psi(v) + 0.5 ||B (z - v)||^2].
struct Problem {
  LinOp A;
  Vector y;
  LinOp L;
  LinOp B;
  double mu = 1.0;
  PenaltySpec psi = PenaltySpec::l1(1);

  /// Throws std::invalid_argument when shapes disagree or mu <= 0.
  void validate() const;
};

struct InnerSolveCfg {
  double tol = 1e-10;
  int max_iter = 100000;
};

struct GmeValue {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
  double residual = 0.0;
};

/// Psi_B(z). The inner minimization is solved by forward-backward splitting
/// started at v = z; non-convergence is reported through `converged`.
GmeValue gme_value(const PenaltySpec& psi, const LinOp& B, const Vector& z,
                   const InnerSolveCfg& inner = {});

/// J(x). `converged` mirrors the inner solve.
GmeValue objective(const Problem& p, const Vector& x, const InnerSolveCfg& inner = {});

struct ConvexityCertificate {
  double min_eig = 0.0;
  bool holds = false;
  double tolerance = 1e-8;
};

/// Minimum eigenvalue of A^T A - mu L^T B^T B L.
/// Throws std::length_error if the domain dimension exceeds `max_dim`.
ConvexityCertificate certify_convexity(const Problem& p, double tol = 1e-8,
                                       Index max_dim = 4096);

/// For Psi = l1: the closed form Psi_B(Lx) = ||Lx||_1 - 0.5 ||B L x||^2 holds
/// iff ||B^T B L x||_inf <= 1.
bool check_l1_linear_region(const LinOp& B, const LinOp& L, const Vector& x);

/// A^T A - mu L^T B^T B L, symmetrized.
Matrix convexity_matrix(const Problem& p);

}  // namespace ligme
