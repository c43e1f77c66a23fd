#include "ligme/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ligme {
namespace {

double max_eig(const Matrix& sym) {
  if (sym.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

double min_eig(const Matrix& sym) {
  if (sym.size() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

bool all_finite(const SolverState& s) {
  return s.x.allFinite() && s.v.allFinite() && s.w.allFinite();
}

}  // namespace

SolverState SolverState::zeros(const Problem& p) {
  return SolverState{Vector::Zero(p.A.cols()), Vector::Zero(p.L.rows()), Vector::Zero(p.L.rows()), 0};
}

StepSizes auto_step_sizes(const Problem& p, double kappa) {
  if (!(kappa > 1.0)) throw std::invalid_argument("auto_step_sizes: kappa must exceed 1");
  p.validate();
  const Matrix m = 0.5 * kappa * p.A.gram() + p.mu * p.L.gram();
  StepSizes out;
  out.sigma = max_eig(m) + (kappa - 1.0);
  const double b_norm_sq = p.B.is_zero() ? 0.0 : max_eig(p.B.gram());
  out.tau = (0.5 * kappa + 2.0 / kappa) * p.mu * b_norm_sq + (kappa - 1.0);
  return out;
}

LigmeOperator::LigmeOperator(Problem p, const SolverConfig& cfg) : p_(std::move(p)) {
  p_.validate();
  if (!(cfg.kappa > 1.0)) throw std::invalid_argument("LigmeOperator: kappa must exceed 1");
  kappa_ = cfg.kappa;

  ata_ = p_.A.gram();
  aty_ = p_.A.adjoint_apply(p_.y);
  has_b_ = !p_.B.is_zero();
  if (has_b_) btb_ = p_.B.gram();
  const double b_norm_sq = has_b_ ? max_eig(btb_) : 0.0;

  if (cfg.sigma && cfg.tau) {
    sigma_ = *cfg.sigma;
    tau_ = *cfg.tau;
  } else {
    const Matrix m = 0.5 * kappa_ * ata_ + p_.mu * p_.L.gram();
    sigma_ = cfg.sigma ? *cfg.sigma : max_eig(m) + (kappa_ - 1.0);
    tau_ = cfg.tau ? *cfg.tau : (0.5 * kappa_ + 2.0 / kappa_) * p_.mu * b_norm_sq + (kappa_ - 1.0);
  }
  if (!(sigma_ > 0.0) || !(tau_ > 0.0))
    throw std::invalid_argument("LigmeOperator: step sizes must be positive");
  if (tau_ < (0.5 * kappa_ + 2.0 / kappa_) * p_.mu * b_norm_sq)
    throw std::invalid_argument("LigmeOperator: tau violates the step-size condition");
  if (cfg.sigma && !(stepsize_margin() > 0.0))
    throw std::invalid_argument("LigmeOperator: sigma violates the step-size condition");

  if (cfg.verify_metric) {
    Eigen::LLT<Matrix> llt(metric_matrix());
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("LigmeOperator: metric P is not positive definite");
  }
}

SolverState LigmeOperator::step(const SolverState& s) const {
  const double mu = p_.mu;
  const Vector lx = p_.L.apply(s.x);

  // B^T B (v - L x) + w collects every L^T term of the x-update.
  Vector r = s.w;
  if (has_b_) r.noalias() += btb_ * (s.v - lx);

  SolverState out;
  out.k = s.k + 1;
  out.x = s.x - (ata_ * s.x + mu * p_.L.adjoint_apply(r) - aty_) / sigma_;

  const Vector q = p_.L.apply(2.0 * out.x - s.x);
  const double gamma = mu / tau_;
  if (has_b_) {
    out.v = prox(p_.psi, s.v + gamma * (btb_ * (q - s.v)), gamma);
  } else {
    out.v = prox(p_.psi, s.v, gamma);
  }
  out.w = prox_conjugate(p_.psi, q + s.w);
  return out;
}

double LigmeOperator::p_inner(const SolverState& a, const SolverState& b) const {
  const double mu = p_.mu;
  const Vector la = p_.L.apply(a.x);
  const Vector lb = p_.L.apply(b.x);
  Vector ra = a.w;
  Vector rb = b.w;
  if (has_b_) {
    ra.noalias() += btb_ * a.v;
    rb.noalias() += btb_ * b.v;
  }
  return sigma_ * a.x.dot(b.x) + tau_ * a.v.dot(b.v) + mu * a.w.dot(b.w) -
         mu * (la.dot(rb) + lb.dot(ra));
}

double LigmeOperator::p_norm(const SolverState& s) const {
  return std::sqrt(std::max(0.0, p_inner(s, s)));
}

double LigmeOperator::p_distance(const SolverState& a, const SolverState& b) const {
  SolverState d{a.x - b.x, a.v - b.v, a.w - b.w, 0};
  return p_norm(d);
}

Matrix LigmeOperator::metric_matrix() const {
  const Index n = p_.A.cols();
  const Index l = p_.L.rows();
  const double mu = p_.mu;
  const Matrix L = p_.L.to_dense();
  Matrix m = Matrix::Zero(n + 2 * l, n + 2 * l);
  m.topLeftCorner(n, n) = sigma_ * Matrix::Identity(n, n);
  if (has_b_) {
    const Matrix btbl = btb_ * L;
    m.block(n, 0, l, n) = -mu * btbl;
    m.block(0, n, n, l) = -mu * btbl.transpose();
  }
  m.block(n, n, l, l) = tau_ * Matrix::Identity(l, l);
  m.block(n + l, 0, l, n) = -mu * L;
  m.block(0, n + l, n, l) = -mu * L.transpose();
  m.block(n + l, n + l, l, l) = mu * Matrix::Identity(l, l);
  return m;
}

double LigmeOperator::stepsize_margin() const {
  const Index n = p_.A.cols();
  const Matrix m = sigma_ * Matrix::Identity(n, n) - 0.5 * kappa_ * ata_ - p_.mu * p_.L.gram();
  return min_eig(m);
}

SolverState t_step(const Problem& p, const SolverConfig& cfg, const SolverState& s) {
  SolverConfig c = cfg;
  c.verify_metric = false;
  return LigmeOperator(p, c).step(s);
}

LigmeOperator LigmeOperator::with_observation(const Vector& y) const {
  if (y.size() != p_.A.rows()) throw std::invalid_argument("with_observation: dimension mismatch");
  LigmeOperator out = *this;
  out.p_.y = y;
  out.aty_ = p_.A.adjoint_apply(y);
  return out;
}

SolveReport solve(const LigmeOperator& op, const SolverConfig& cfg, const std::optional<SolverState>& init,
                const std::optional<Vector>& ground_truth) {
  const Problem& p = op.problem();
  if (!(cfg.relaxation > 0.0 && cfg.relaxation <= 1.0))
    throw std::invalid_argument("solve: relaxation must lie in (0, 1]");
  SolverState u = init ? *init : SolverState::zeros(p);
  if (u.x.size() != p.A.cols() || u.v.size() != p.L.rows() || u.w.size() != p.L.rows())
    throw std::invalid_argument("solve: initial state has wrong dimensions");
  if (ground_truth && ground_truth->size() != p.A.cols())
    throw std::invalid_argument("solve: ground truth has wrong dimension");

  SolveReport rep;
  rep.sigma = op.sigma();
  rep.tau = op.tau();
  rep.p_residual.reserve(static_cast<std::size_t>(std::min(cfg.max_iter, 1 << 20)));
  const double alpha = cfg.relaxation;

  for (int k = 1; k <= cfg.max_iter; ++k) {
    SolverState next = op.step(u);
    if (alpha != 1.0) {
      next.x = (1.0 - alpha) * u.x + alpha * next.x;
      next.v = (1.0 - alpha) * u.v + alpha * next.v;
      next.w = (1.0 - alpha) * u.w + alpha * next.w;
    }
    if (!all_finite(next)) {
      throw std::runtime_error("solve: non-finite state at iteration " + std::to_string(k));
    }
    const double resid = op.p_distance(next, u);
    const double scale = 1.0 + op.p_norm(u);
    u = std::move(next);
    rep.iterations = k;
    rep.p_residual.push_back(resid);
    if (ground_truth) rep.se.push_back((u.x - *ground_truth).squaredNorm());
    if (cfg.objective_every > 0 && k % cfg.objective_every == 0)
      rep.objective.emplace_back(k, objective(p, u.x, cfg.inner).value);
    if (cfg.p_residual_tol > 0.0 && resid <= cfg.p_residual_tol * scale) {
      rep.converged = true;
      break;
    }
  }
  if (cfg.objective_every > 0 && (rep.objective.empty() || rep.objective.back().first != rep.iterations))
    rep.objective.emplace_back(rep.iterations, objective(p, u.x, cfg.inner).value);
  rep.x = u.x;
  rep.final_state = std::move(u);
  return rep;
}

SolveReport solve(const Problem& p, const SolverConfig& cfg, const std::optional<SolverState>& init,
                  const std::optional<Vector>& ground_truth) {
  ConvexityCertificate cert;
  SolverConfig c = cfg;
  if (p.A.cols() <= 4096) {
    cert = certify_convexity(p);
    // P > 0 leans on overall convexity; without it the run is for research use only
    if (!cert.holds) c.verify_metric = false;
  }
  LigmeOperator op(p, c);
  SolveReport rep = solve(op, c, init, ground_truth);
  rep.certificate = cert;
  return rep;
}

SelesnickReport selesnick_solve(const Matrix& A, const Matrix& B, const Vector& y, double mu,
                                double theta, const SelesnickConfig& cfg,
                                const std::optional<std::pair<Vector, Vector>>& init) {
  if (!(mu > 0.0)) throw std::invalid_argument("selesnick_solve: mu must be positive");
  if (!(theta >= 0.0 && theta < 1.0)) throw std::invalid_argument("selesnick_solve: theta must lie in [0, 1)");
  const Index n = A.cols();
  if (A.rows() != y.size() || B.cols() != n)
    throw std::invalid_argument("selesnick_solve: dimension mismatch");

  const Matrix ata = A.transpose() * A;
  const Matrix btb = B.transpose() * B;
  const Matrix target = (theta / mu) * ata;
  const double diff = (btb - target).norm();
  if (diff > 1e-8 * std::max(target.norm(), btb.norm()))
    throw std::invalid_argument("selesnick_solve: B^T B must equal (theta/mu) A^T A");

  const double rho = max_eig(ata);
  const double bound = 2.0 / (std::max(1.0, theta / (1.0 - theta)) * rho);
  SelesnickReport rep;
  rep.step = cfg.step_fraction * bound;
  const double t = rep.step;
  const Vector aty = A.transpose() * y;

  Vector x = init ? init->first : Vector::Zero(n);
  Vector v = init ? init->second : Vector::Zero(n);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Vector grad_x = ata * (x + theta * (v - x)) - aty;
    const Vector grad_v = theta * (ata * (v - x));
    Vector xn = soft_threshold(x - t * grad_x, t * mu);
    Vector vn = soft_threshold(v - t * grad_v, t * mu);
    const double change = std::sqrt((xn - x).squaredNorm() + (vn - v).squaredNorm());
    const double scale = 1.0 + std::sqrt(x.squaredNorm() + v.squaredNorm());
    x = std::move(xn);
    v = std::move(vn);
    rep.iterations = k;
    if (!x.allFinite() || !v.allFinite())
      throw std::runtime_error("selesnick_solve: non-finite iterate");
    if (cfg.tol > 0.0 && change <= cfg.tol * scale) {
      rep.converged = true;
      break;
    }
  }
  rep.x = std::move(x);
  rep.v = std::move(v);
  return rep;
}

}  // namespace ligme
