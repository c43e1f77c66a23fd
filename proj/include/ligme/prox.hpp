#pragma once

#include <memory>
#include <vector>

#include "ligme/linops.hpp"

namespace ligme {

struct PenaltyPart;

/// Convex, even-symmetric, coercive penalty with a closed-form proximity operator.
///
/// Three kinds are supported:
///   - l1(n):          sum |z_i|
///   - nuclear(m, n):  sum of singular values of the m x n matrix whose
///                     column-major vectorization is z
///   - separable:      sum_i w_i * Psi_i(z_i) over consecutive slices z_i
class PenaltySpec {
 public:
  enum class Kind { L1, Nuclear, Separable };

  using Part = PenaltyPart;

  static PenaltySpec l1(Index n);
  static PenaltySpec nuclear(Index rows, Index cols);
  /// Throws std::invalid_argument if any weight is not strictly positive.
  static PenaltySpec separable(std::vector<Part> parts);

  Kind kind() const { return kind_; }
  Index total_len() const { return total_len_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const std::vector<Part>& parts() const { return *parts_; }
  /// Start offset of each part's slice (separable only).
  const std::vector<Index>& offsets() const { return offsets_; }

 private:
  PenaltySpec() = default;

  Kind kind_ = Kind::L1;
  Index total_len_ = 0;
  Index rows_ = 0;
  Index cols_ = 0;
  std::shared_ptr<const std::vector<Part>> parts_;
  std::vector<Index> offsets_;
};

struct PenaltyPart {
  double weight;
  PenaltySpec spec;
};

/// Psi(z).
double eval(const PenaltySpec& spec, const Vector& z);

/// argmin_p gamma * Psi(p) + 0.5 * ||z - p||^2.
Vector prox(const PenaltySpec& spec, const Vector& z, double gamma);

/// Prox of the Fenchel conjugate Psi^*, via Moreau's decomposition z - prox(z, 1).
Vector prox_conjugate(const PenaltySpec& spec, const Vector& z);

/// min_p Psi(p) + ||x - p||^2 / (2 gamma).
double moreau_envelope(const PenaltySpec& spec, const Vector& x, double gamma);

/// (x - prox(x, gamma)) / gamma, the gradient of the Moreau envelope.
Vector moreau_gradient(const PenaltySpec& spec, const Vector& x, double gamma);

/// Componentwise soft-thresholding at level t.
Vector soft_threshold(const Vector& z, double t);

/// Singular values (descending) of the matrix whose column-major vectorization is z.
Vector singular_values_of(const Vector& z, Index rows, Index cols);

}  // namespace ligme
