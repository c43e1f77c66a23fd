#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace ligme {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Bounded linear operator between finite-dimensional coordinate spaces.
///
/// Values are immutable once built; copies share the underlying storage, so
/// passing a LinOp around by value is cheap and thread-safe.
class LinOp {
 public:
  struct Dense {
    Matrix matrix;
  };
  struct Identity {
    Index n;
  };
  /// First-order forward difference, (n-1) x n, rows (-1, 1).
  struct Diff1d {
    Index n;
  };
  /// Vertical differences of an n x n image stored column-major: blockdiag(D, ..., D).
  struct DiffV {
    Index n;
  };
  /// Horizontal differences of an n x n image stored column-major.
  struct DiffH {
    Index n;
  };
  /// left (x) right, acting on column-major vec(X) as vec(right * X * left^T).
  struct Kronecker {
    Matrix left;
    Matrix right;
  };
  /// Square diagonal 0/1 selector; `kept` holds 0-based indices.
  struct Mask {
    Index n;
    std::vector<Index> kept;
  };
  struct VStack {
    std::vector<LinOp> children;
  };
  struct BlockDiag {
    std::vector<LinOp> blocks;
  };

  using Kind = std::variant<Dense, Identity, Diff1d, DiffV, DiffH, Kronecker,
                            Mask, VStack, BlockDiag>;

  LinOp();  // 0 x 0 dense
  explicit LinOp(Kind kind);

  static LinOp dense(Matrix m);
  static LinOp identity(Index n);
  static LinOp zero(Index rows, Index cols);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const Kind& kind() const { return *kind_; }

  /// L x. Throws std::invalid_argument on dimension mismatch.
  Vector apply(const Vector& x) const;
  /// L^T y. Throws std::invalid_argument on dimension mismatch.
  Vector adjoint_apply(const Vector& y) const;

  Matrix to_dense() const;
  /// L^T L, materialized.
  Matrix gram() const;

  bool is_zero() const;

 private:
  std::shared_ptr<const Kind> kind_;
  Index rows_ = 0;
  Index cols_ = 0;
};

struct OpNormResult {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Largest singular value by power iteration on L^T L.
///
/// Stops once the Rayleigh residual ||L^T L v - lambda v|| falls below
/// tol * lambda. The start vector is drawn from a fixed seed so repeated calls
/// return identical results.
OpNormResult op_norm(const LinOp& op, double tol = 1e-9, int max_iter = 10000);

/// Exact spectral norm of a dense matrix (SVD); used where a certified bound is needed.
double spectral_norm(const Matrix& m);

LinOp make_diff_1d(Index n);
/// Returns (D_V, D_H), each n(n-1) x n^2.
std::pair<LinOp, LinOp> make_diff_2d(Index n);
/// The 1-d Gaussian blur factor, entries exp(-|i-j|^2/1.62)/sqrt(1.62 pi) for |i-j| < 6.
Matrix blur_factor(Index n);
/// Separable blur blur_factor(n) (x) blur_factor(n), acting on n^2 vectors.
LinOp make_blur(Index n);
/// Diagonal selector on R^n keeping the 1-based indices in `kept_one_based`.
LinOp make_mask(Index n, std::span<const Index> kept_one_based);
LinOp vstack(std::vector<LinOp> ops);
LinOp block_diag(std::vector<LinOp> blocks);

}  // namespace ligme
