#pragma once

#include <optional>
#include <vector>

#include "ligme/linops.hpp"

namespace ligme {

/// B_theta = sqrt(theta / mu) Lambda^{1/2} U^T together with the intermediate
/// quantities that define it.
struct BDesign {
  Matrix B;        // l x l
  double theta = 0.0;
  Matrix tilde_L;  // n x n, bottom l rows equal L
  Vector spectrum; // eigenvalues of the Schur complement, clamped at 0
};

/// Completes a full-row-rank l x n matrix L to a nonsingular n x n matrix
/// [T; L], with T an orthonormal basis of null(L).
/// Throws std::invalid_argument("L must have full row rank") otherwise.
Matrix complete_to_square(const Matrix& L);

/// Schur-complement design of B guaranteeing A^T A - mu L^T B^T B L >= 0.
///
/// With [A1 A2] = A * inv(tilde_L) (A1 holding the first n - l columns), the
/// Schur complement S = A2^T A2 - A2^T A1 pinv(A1^T A1) A1^T A2 = U Lambda U^T
/// is formed and B = sqrt(theta / mu) Lambda^{1/2} U^T.
///
/// Throws std::invalid_argument for theta outside [0, 1], mu <= 0, a rank
/// deficient L, a singular or mismatched override, or a Schur complement with
/// materially negative eigenvalues.
BDesign design_b(const Matrix& A, const Matrix& L, double mu, double theta,
                 const std::optional<Matrix>& tilde_L_override = std::nullopt);

struct DesignPart {
  Matrix L;
  double mu = 1.0;     // weight of this penalty inside the product-space penalty
  double theta = 0.99;
  std::optional<Matrix> tilde_L;
};

struct MultiDesign {
  Matrix B;                    // block diagonal, blocks sqrt(mu_i) B_i
  std::vector<BDesign> blocks; // B_i before the sqrt(mu_i) scaling
};

/// Block design for sum_i mu_i (Psi_i)_{B_i} o L_i under the
/// global weight mu. Each block is designed for (sqrt(omega_i / mu) A, L_i, mu_i).
/// Throws std::invalid_argument unless the omegas are positive and sum to 1.
MultiDesign design_b_multi(const Matrix& A, const std::vector<DesignPart>& parts, double mu,
                           const std::vector<double>& omega);

/// [E; D_V] completion of the vertical difference operator for n x n images.
Matrix tilde_diff_v(Index n);
/// [I_n 0; D_H] completion of the horizontal difference operator.
Matrix tilde_diff_h(Index n);
/// [e_1^T; D] completion of the 1-d difference operator.
Matrix tilde_diff_1d(Index n);

}  // namespace ligme
