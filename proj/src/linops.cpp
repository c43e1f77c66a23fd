#include "ligme/linops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace ligme {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::pair<Index, Index> shape_of(const LinOp::Kind& kind) {
  return std::visit(
      Overloaded{
          [](const LinOp::Dense& k) { return std::pair{k.matrix.rows(), k.matrix.cols()}; },
          [](const LinOp::Identity& k) { return std::pair{k.n, k.n}; },
          [](const LinOp::Diff1d& k) { return std::pair{k.n - 1, k.n}; },
          [](const LinOp::DiffV& k) { return std::pair{k.n * (k.n - 1), k.n * k.n}; },
          [](const LinOp::DiffH& k) { return std::pair{k.n * (k.n - 1), k.n * k.n}; },
          [](const LinOp::Kronecker& k) {
            return std::pair{k.left.rows() * k.right.rows(), k.left.cols() * k.right.cols()};
          },
          [](const LinOp::Mask& k) { return std::pair{k.n, k.n}; },
          [](const LinOp::VStack& k) {
            if (k.children.empty()) throw std::invalid_argument("vstack: no operators");
            Index rows = 0;
            const Index cols = k.children.front().cols();
            for (const auto& c : k.children) {
              if (c.cols() != cols) throw std::invalid_argument("vstack: column counts differ");
              rows += c.rows();
            }
            return std::pair{rows, cols};
          },
          [](const LinOp::BlockDiag& k) {
            Index rows = 0, cols = 0;
            for (const auto& b : k.blocks) {
              rows += b.rows();
              cols += b.cols();
            }
            return std::pair{rows, cols};
          },
      },
      kind);
}

void check_size(Index got, Index want, const char* what) {
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (got " +
                                std::to_string(got) + ", expected " + std::to_string(want) + ")");
  }
}

}  // namespace

LinOp::LinOp() : LinOp(Dense{Matrix(0, 0)}) {}

LinOp::LinOp(Kind kind) {
  auto [r, c] = shape_of(kind);
  rows_ = r;
  cols_ = c;
  kind_ = std::make_shared<const Kind>(std::move(kind));
}

LinOp LinOp::dense(Matrix m) { return LinOp(Dense{std::move(m)}); }
LinOp LinOp::identity(Index n) { return LinOp(Identity{n}); }
LinOp LinOp::zero(Index rows, Index cols) { return LinOp(Dense{Matrix::Zero(rows, cols)}); }

Vector LinOp::apply(const Vector& x) const {
  check_size(x.size(), cols_, "apply");
  return std::visit(
      Overloaded{
          [&](const Dense& k) -> Vector { return k.matrix * x; },
          [&](const Identity&) -> Vector { return x; },
          [&](const Diff1d& k) -> Vector {
            return x.tail(k.n - 1) - x.head(k.n - 1);
          },
          [&](const DiffV& k) -> Vector {
            const Index n = k.n;
            Vector y(n * (n - 1));
            for (Index c = 0; c < n; ++c) {
              y.segment(c * (n - 1), n - 1) =
                  x.segment(c * n + 1, n - 1) - x.segment(c * n, n - 1);
            }
            return y;
          },
          [&](const DiffH& k) -> Vector {
            const Index m = k.n * (k.n - 1);
            return x.tail(m) - x.head(m);
          },
          [&](const Kronecker& k) -> Vector {
            Eigen::Map<const Matrix> X(x.data(), k.right.cols(), k.left.cols());
            Matrix Y = k.right * X * k.left.transpose();
            return Eigen::Map<const Vector>(Y.data(), Y.size());
          },
          [&](const Mask& k) -> Vector {
            Vector y = Vector::Zero(k.n);
            for (Index i : k.kept) y[i] = x[i];
            return y;
          },
          [&](const VStack& k) -> Vector {
            Vector y(rows_);
            Index off = 0;
            for (const auto& c : k.children) {
              y.segment(off, c.rows()) = c.apply(x);
              off += c.rows();
            }
            return y;
          },
          [&](const BlockDiag& k) -> Vector {
            Vector y(rows_);
            Index ro = 0, co = 0;
            for (const auto& b : k.blocks) {
              y.segment(ro, b.rows()) = b.apply(x.segment(co, b.cols()));
              ro += b.rows();
              co += b.cols();
            }
            return y;
          },
      },
      *kind_);
}

Vector LinOp::adjoint_apply(const Vector& y) const {
  check_size(y.size(), rows_, "adjoint_apply");
  return std::visit(
      Overloaded{
          [&](const Dense& k) -> Vector { return k.matrix.transpose() * y; },
          [&](const Identity&) -> Vector { return y; },
          [&](const Diff1d& k) -> Vector {
            Vector x = Vector::Zero(k.n);
            x.tail(k.n - 1) += y;
            x.head(k.n - 1) -= y;
            return x;
          },
          [&](const DiffV& k) -> Vector {
            const Index n = k.n;
            Vector x = Vector::Zero(n * n);
            for (Index c = 0; c < n; ++c) {
              const auto seg = y.segment(c * (n - 1), n - 1);
              x.segment(c * n + 1, n - 1) += seg;
              x.segment(c * n, n - 1) -= seg;
            }
            return x;
          },
          [&](const DiffH& k) -> Vector {
            const Index m = k.n * (k.n - 1);
            Vector x = Vector::Zero(k.n * k.n);
            x.tail(m) += y;
            x.head(m) -= y;
            return x;
          },
          [&](const Kronecker& k) -> Vector {
            Eigen::Map<const Matrix> Y(y.data(), k.right.rows(), k.left.rows());
            Matrix X = k.right.transpose() * Y * k.left;
            return Eigen::Map<const Vector>(X.data(), X.size());
          },
          [&](const Mask& k) -> Vector {
            Vector x = Vector::Zero(k.n);
            for (Index i : k.kept) x[i] = y[i];
            return x;
          },
          [&](const VStack& k) -> Vector {
            Vector x = Vector::Zero(cols_);
            Index off = 0;
            for (const auto& c : k.children) {
              x += c.adjoint_apply(y.segment(off, c.rows()));
              off += c.rows();
            }
            return x;
          },
          [&](const BlockDiag& k) -> Vector {
            Vector x(cols_);
            Index ro = 0, co = 0;
            for (const auto& b : k.blocks) {
              x.segment(co, b.cols()) = b.adjoint_apply(y.segment(ro, b.rows()));
              ro += b.rows();
              co += b.cols();
            }
            return x;
          },
      },
      *kind_);
}

Matrix LinOp::to_dense() const {
  return std::visit(
      Overloaded{
          [&](const Dense& k) -> Matrix { return k.matrix; },
          [&](const Identity& k) -> Matrix { return Matrix::Identity(k.n, k.n); },
          [&](const Kronecker& k) -> Matrix {
            Matrix out(rows_, cols_);
            for (Index i = 0; i < k.left.rows(); ++i)
              for (Index j = 0; j < k.left.cols(); ++j)
                out.block(i * k.right.rows(), j * k.right.cols(), k.right.rows(), k.right.cols()) =
                    k.left(i, j) * k.right;
            return out;
          },
          [&](const VStack& k) -> Matrix {
            Matrix out(rows_, cols_);
            Index off = 0;
            for (const auto& c : k.children) {
              out.middleRows(off, c.rows()) = c.to_dense();
              off += c.rows();
            }
            return out;
          },
          [&](const BlockDiag& k) -> Matrix {
            Matrix out = Matrix::Zero(rows_, cols_);
            Index ro = 0, co = 0;
            for (const auto& b : k.blocks) {
              out.block(ro, co, b.rows(), b.cols()) = b.to_dense();
              ro += b.rows();
              co += b.cols();
            }
            return out;
          },
          [&](const auto&) -> Matrix {
            // Column-by-column through the structured fast path.
            Matrix out(rows_, cols_);
            Vector e = Vector::Zero(cols_);
            for (Index j = 0; j < cols_; ++j) {
              e[j] = 1.0;
              out.col(j) = apply(e);
              e[j] = 0.0;
            }
            return out;
          },
      },
      *kind_);
}

Matrix LinOp::gram() const {
  if (const auto* id = std::get_if<Identity>(kind_.get())) return Matrix::Identity(id->n, id->n);
  if (const auto* mk = std::get_if<Mask>(kind_.get())) {
    Matrix g = Matrix::Zero(mk->n, mk->n);
    for (Index i : mk->kept) g(i, i) = 1.0;
    return g;
  }
  const Matrix d = to_dense();
  Matrix g = Matrix::Zero(cols_, cols_);
  g.selfadjointView<Eigen::Lower>().rankUpdate(d.transpose());
  return g.selfadjointView<Eigen::Lower>();
}

bool LinOp::is_zero() const {
  if (const auto* d = std::get_if<Dense>(kind_.get())) return d->matrix.isZero(0.0);
  if (const auto* b = std::get_if<BlockDiag>(kind_.get()))
    return std::all_of(b->blocks.begin(), b->blocks.end(), [](const LinOp& op) { return op.is_zero(); });
  if (const auto* m = std::get_if<Mask>(kind_.get())) return m->kept.empty();
  return rows_ == 0 || cols_ == 0;
}

OpNormResult op_norm(const LinOp& op, double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("op_norm: tol must be positive");
  OpNormResult res;
  if (op.cols() == 0 || op.rows() == 0 || op.is_zero()) {
    res.converged = true;
    return res;
  }
  std::mt19937_64 rng(0x5eed1u);
  std::normal_distribution<double> normal;
  Vector v(op.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  v.normalize();

  double lambda = 0.0;
  int restarts = 0;
  for (int it = 1; it <= max_iter; ++it) {
    Vector w = op.adjoint_apply(op.apply(v));
    lambda = v.dot(w);
    res.iterations = it;
    if (lambda <= 0.0) {
      // Start vector landed in the null space; redraw.
      if (++restarts > 8) break;
      for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
      v.normalize();
      continue;
    }
    const double resid = (w - lambda * v).norm();
    const double wn = w.norm();
    v = w / wn;
    if (resid <= tol * lambda) {
      lambda = wn;  // ||L^T L v|| >= Rayleigh quotient; tighter from above
      res.converged = true;
      break;
    }
  }
  res.value = std::sqrt(std::max(lambda, 0.0));
  return res;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

LinOp make_diff_1d(Index n) {
  if (n < 2) throw std::invalid_argument("make_diff_1d: n must be >= 2");
  return LinOp(LinOp::Diff1d{n});
}

std::pair<LinOp, LinOp> make_diff_2d(Index n) {
  if (n < 2) throw std::invalid_argument("make_diff_2d: n must be >= 2");
  return {LinOp(LinOp::DiffV{n}), LinOp(LinOp::DiffH{n})};
}

Matrix blur_factor(Index n) {
  if (n < 2) throw std::invalid_argument("blur_factor: n must be >= 2");
  Matrix a = Matrix::Zero(n, n);
  const double scale = 1.0 / std::sqrt(1.62 * std::numbers::pi);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const Index d = std::abs(i - j);
      if (d < 6) a(i, j) = scale * std::exp(-static_cast<double>(d * d) / 1.62);
    }
  }
  return a;
}

LinOp make_blur(Index n) {
  Matrix a = blur_factor(n);
  return LinOp(LinOp::Kronecker{a, a});
}

LinOp make_mask(Index n, std::span<const Index> kept_one_based) {
  if (n < 2) throw std::invalid_argument("make_mask: n must be >= 2");
  std::vector<Index> kept;
  kept.reserve(kept_one_based.size());
  for (Index i : kept_one_based) {
    if (i < 1 || i > n) throw std::invalid_argument("make_mask: index out of range");
    kept.push_back(i - 1);
  }
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  return LinOp(LinOp::Mask{n, std::move(kept)});
}

LinOp vstack(std::vector<LinOp> ops) { return LinOp(LinOp::VStack{std::move(ops)}); }

LinOp block_diag(std::vector<LinOp> blocks) { return LinOp(LinOp::BlockDiag{std::move(blocks)}); }

}  // namespace ligme
