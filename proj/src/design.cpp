#include "ligme/design.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ligme {
namespace {

constexpr double kRankCutoff = 1e-10;

bool nonsingular(const Matrix& m) {
  const Vector s = Eigen::BDCSVD<Matrix>(m).singularValues();
  return s.size() > 0 && s(s.size() - 1) > kRankCutoff * s(0);
}

}  // namespace

Matrix complete_to_square(const Matrix& L) {
  const Index l = L.rows();
  const Index n = L.cols();
  if (l > n || l == 0) throw std::invalid_argument("L must have full row rank");
  Eigen::BDCSVD<Matrix> svd(L, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  if (!(s(l - 1) > kRankCutoff * s(0))) throw std::invalid_argument("L must have full row rank");

  Matrix out(n, n);
  // Right singular vectors l..n-1 span null(L).
  out.topRows(n - l) = svd.matrixV().rightCols(n - l).transpose();
  out.bottomRows(l) = L;
  return out;
}

BDesign design_b(const Matrix& A, const Matrix& L, double mu, double theta,
                 const std::optional<Matrix>& tilde_L_override) {
  if (!(mu > 0.0)) throw std::invalid_argument("design_b: mu must be positive");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("design_b: theta must lie in [0, 1]");
  if (A.cols() != L.cols()) throw std::invalid_argument("design_b: A and L column counts differ");
  const Index n = L.cols();
  const Index l = L.rows();

  BDesign out;
  out.theta = theta;
  if (tilde_L_override) {
    const Matrix& t = *tilde_L_override;
    if (t.rows() != n || t.cols() != n)
      throw std::invalid_argument("design_b: tilde_L must be n x n");
    if (!(t.bottomRows(l) - L).isZero(1e-12))
      throw std::invalid_argument("design_b: bottom rows of tilde_L must equal L");
    if (!nonsingular(t)) throw std::invalid_argument("design_b: tilde_L is singular");
    out.tilde_L = t;
  } else {
    out.tilde_L = complete_to_square(L);
  }

  // [A1 A2] = A inv(tilde_L)
  const Matrix a_tilde =
      out.tilde_L.transpose().partialPivLu().solve(A.transpose()).transpose();
  const Matrix a1 = a_tilde.leftCols(n - l);
  const Matrix a2 = a_tilde.rightCols(l);

  // A2^T A1 pinv(A1^T A1) A1^T A2 = A2^T P A2 with P the projector onto
  // range(A1); the cutoff on sigma^2 matches an SVD pseudo-inverse of A1^T A1.
  Matrix residual = a2;
  if (n - l > 0 && a1.rows() > 0) {
    Eigen::BDCSVD<Matrix> svd(a1, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    Index rank = 0;
    if (s.size() > 0 && s(0) > 0.0) {
      while (rank < s.size() && s(rank) * s(rank) > kRankCutoff * s(0) * s(0)) ++rank;
    }
    if (rank > 0) {
      const Matrix u = svd.matrixU().leftCols(rank);
      residual.noalias() -= u * (u.transpose() * a2);
    }
  }
  Matrix schur = residual.transpose() * residual;
  schur = 0.5 * (schur + schur.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(schur);
  Vector lambda = eig.eigenvalues();
  const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  if (lambda.size() > 0 && lambda.minCoeff() < -kRankCutoff * scale)
    throw std::invalid_argument("design_b: Schur complement is not positive semidefinite");
  lambda = lambda.cwiseMax(0.0);
  out.spectrum = lambda;

  if (theta == 0.0) {
    out.B = Matrix::Zero(l, l);
  } else {
    out.B = std::sqrt(theta / mu) * lambda.cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  }
  return out;
}

MultiDesign design_b_multi(const Matrix& A, const std::vector<DesignPart>& parts, double mu,
                           const std::vector<double>& omega) {
  if (!(mu > 0.0)) throw std::invalid_argument("design_b_multi: mu must be positive");
  if (parts.empty() || omega.size() != parts.size())
    throw std::invalid_argument("design_b_multi: need one omega per part");
  double total = 0.0;
  for (double w : omega) {
    if (!(w > 0.0)) throw std::invalid_argument("design_b_multi: omegas must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("design_b_multi: omegas must sum to 1");

  MultiDesign out;
  Index dim = 0;
  for (const auto& p : parts) dim += p.L.rows();
  out.B = Matrix::Zero(dim, dim);
  Index off = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    if (!(p.mu > 0.0)) throw std::invalid_argument("design_b_multi: part weights must be positive");
    const Matrix scaled_a = std::sqrt(omega[i] / mu) * A;
    BDesign d = design_b(scaled_a, p.L, p.mu, p.theta, p.tilde_L);
    const Index l = p.L.rows();
    out.B.block(off, off, l, l) = std::sqrt(p.mu) * d.B;
    off += l;
    out.blocks.push_back(std::move(d));
  }
  return out;
}

Matrix tilde_diff_1d(Index n) {
  Matrix t = Matrix::Zero(n, n);
  t(0, 0) = 1.0;
  t.bottomRows(n - 1) = make_diff_1d(n).to_dense();
  return t;
}

Matrix tilde_diff_v(Index n) {
  const Index nn = n * n;
  Matrix t = Matrix::Zero(nn, nn);
  for (Index i = 0; i < n; ++i) t(i, i * n) = 1.0;
  t.bottomRows(n * (n - 1)) = make_diff_2d(n).first.to_dense();
  return t;
}

Matrix tilde_diff_h(Index n) {
  const Index nn = n * n;
  Matrix t = Matrix::Zero(nn, nn);
  t.topLeftCorner(n, n).setIdentity();
  t.bottomRows(n * (n - 1)) = make_diff_2d(n).second.to_dense();
  return t;
}

}  // namespace ligme
