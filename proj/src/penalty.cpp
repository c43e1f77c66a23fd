#include "ligme/penalty.hpp"

#include <cmath>
#include <stdexcept>

namespace ligme {

void Problem::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("Problem: mu must be positive");
  if (A.rows() != y.size()) throw std::invalid_argument("Problem: A.rows != len(y)");
  if (A.cols() != L.cols()) throw std::invalid_argument("Problem: A.cols != L.cols");
  if (L.rows() != B.cols()) throw std::invalid_argument("Problem: L.rows != B.cols");
  if (L.rows() != psi.total_len()) throw std::invalid_argument("Problem: L.rows != psi length");
}

GmeValue gme_value(const PenaltySpec& psi, const LinOp& B, const Vector& z,
                   const InnerSolveCfg& inner) {
  if (z.size() != psi.total_len() || B.cols() != z.size())
    throw std::invalid_argument("gme_value: dimension mismatch");
  if (!(inner.tol > 0.0)) throw std::invalid_argument("gme_value: inner tol must be positive");

  GmeValue out;
  const double psi_z = eval(psi, z);
  if (B.is_zero()) {
    out.value = psi_z;
    return out;
  }

  // min_v Psi(v) + 0.5 ||B (z - v)||^2; smooth part has gradient B^T B (v - z).
  const Matrix btb = B.gram();
  const double lip = Eigen::SelfAdjointEigenSolver<Matrix>(btb, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
  const double step = 1.0 / lip;

  Vector v = z;
  out.converged = false;
  for (int it = 1; it <= inner.max_iter; ++it) {
    Vector next = prox(psi, v - step * (btb * (v - z)), step);
    out.residual = (next - v).norm() / step;
    v = std::move(next);
    out.iterations = it;
    if (out.residual <= inner.tol) {
      out.converged = true;
      break;
    }
  }
  const Vector d = z - v;
  const double inner_min = eval(psi, v) + 0.5 * d.dot(btb * d);
  out.value = psi_z - inner_min;
  return out;
}

GmeValue objective(const Problem& p, const Vector& x, const InnerSolveCfg& inner) {
  if (x.size() != p.A.cols()) throw std::invalid_argument("objective: dimension mismatch");
  GmeValue pen = gme_value(p.psi, p.B, p.L.apply(x), inner);
  GmeValue out = pen;
  out.value = 0.5 * (p.y - p.A.apply(x)).squaredNorm() + p.mu * pen.value;
  return out;
}

Matrix convexity_matrix(const Problem& p) {
  Matrix m = p.A.gram();
  if (!p.B.is_zero()) {
    const Matrix bl = p.B.to_dense() * p.L.to_dense();
    m.noalias() -= p.mu * (bl.transpose() * bl);
  }
  return 0.5 * (m + m.transpose());
}

ConvexityCertificate certify_convexity(const Problem& p, double tol, Index max_dim) {
  p.validate();
  if (p.A.cols() > max_dim) {
    throw std::length_error(
        "certify_convexity: dimension exceeds the dense cap; use randomized probes instead");
  }
  ConvexityCertificate cert;
  cert.tolerance = tol;
  const Matrix m = convexity_matrix(p);
  cert.min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly)
                     .eigenvalues()
                     .minCoeff();
  cert.holds = cert.min_eig >= -tol;
  return cert;
}

bool check_l1_linear_region(const LinOp& B, const LinOp& L, const Vector& x) {
  if (B.is_zero()) return true;
  const Vector r = B.adjoint_apply(B.apply(L.apply(x)));
  return r.size() == 0 || r.lpNorm<Eigen::Infinity>() <= 1.0;
}

}  // namespace ligme
