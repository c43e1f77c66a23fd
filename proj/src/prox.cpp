#include "ligme/prox.hpp"

#include <stdexcept>
#include <string>

namespace ligme {
namespace {

void check_len(const PenaltySpec& spec, const Vector& z, const char* what) {
  if (z.size() != spec.total_len()) {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(spec.total_len()) + ", got " +
                                std::to_string(z.size()));
  }
}

void check_gamma(double gamma, const char* what) {
  if (!(gamma > 0.0)) throw std::invalid_argument(std::string(what) + ": gamma must be positive");
}

Vector nuclear_prox(const Vector& z, Index rows, Index cols, double t) {
  Eigen::Map<const Matrix> X(z.data(), rows, cols);
  Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector s = (svd.singularValues().array() - t).max(0.0).matrix();
  Matrix out = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  return Eigen::Map<const Vector>(out.data(), out.size());
}

// Unchecked recursion shared by the public entry points.
Vector prox_impl(const PenaltySpec& spec, const Vector& z, double gamma) {
  switch (spec.kind()) {
    case PenaltySpec::Kind::L1:
      return soft_threshold(z, gamma);
    case PenaltySpec::Kind::Nuclear:
      return nuclear_prox(z, spec.rows(), spec.cols(), gamma);
    case PenaltySpec::Kind::Separable: {
      Vector out(z.size());
      const auto& parts = spec.parts();
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const Index off = spec.offsets()[i];
        const Index len = parts[i].spec.total_len();
        out.segment(off, len) =
            prox_impl(parts[i].spec, z.segment(off, len), gamma * parts[i].weight);
      }
      return out;
    }
  }
  throw std::logic_error("prox: unknown penalty kind");
}

double eval_impl(const PenaltySpec& spec, const Vector& z) {
  switch (spec.kind()) {
    case PenaltySpec::Kind::L1:
      return z.lpNorm<1>();
    case PenaltySpec::Kind::Nuclear:
      return singular_values_of(z, spec.rows(), spec.cols()).sum();
    case PenaltySpec::Kind::Separable: {
      double total = 0.0;
      const auto& parts = spec.parts();
      for (std::size_t i = 0; i < parts.size(); ++i) {
        total += parts[i].weight *
                 eval_impl(parts[i].spec, z.segment(spec.offsets()[i], parts[i].spec.total_len()));
      }
      return total;
    }
  }
  throw std::logic_error("eval: unknown penalty kind");
}

}  // namespace

PenaltySpec PenaltySpec::l1(Index n) {
  if (n < 1) throw std::invalid_argument("PenaltySpec::l1: length must be positive");
  PenaltySpec s;
  s.kind_ = Kind::L1;
  s.total_len_ = n;
  return s;
}

PenaltySpec PenaltySpec::nuclear(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("PenaltySpec::nuclear: bad shape");
  PenaltySpec s;
  s.kind_ = Kind::Nuclear;
  s.rows_ = rows;
  s.cols_ = cols;
  s.total_len_ = rows * cols;
  return s;
}

PenaltySpec PenaltySpec::separable(std::vector<Part> parts) {
  if (parts.empty()) throw std::invalid_argument("PenaltySpec::separable: no parts");
  PenaltySpec s;
  s.kind_ = Kind::Separable;
  Index off = 0;
  for (const auto& p : parts) {
    if (!(p.weight > 0.0))
      throw std::invalid_argument("PenaltySpec::separable: weights must be positive");
    s.offsets_.push_back(off);
    off += p.spec.total_len();
  }
  s.total_len_ = off;
  s.parts_ = std::make_shared<const std::vector<Part>>(std::move(parts));
  return s;
}

Vector soft_threshold(const Vector& z, double t) {
  return (z.array().sign() * (z.array().abs() - t).max(0.0)).matrix();
}

Vector singular_values_of(const Vector& z, Index rows, Index cols) {
  if (z.size() != rows * cols) throw std::invalid_argument("singular_values_of: size mismatch");
  Eigen::Map<const Matrix> X(z.data(), rows, cols);
  return Eigen::JacobiSVD<Matrix>(X).singularValues();
}

double eval(const PenaltySpec& spec, const Vector& z) {
  check_len(spec, z, "eval");
  return eval_impl(spec, z);
}

Vector prox(const PenaltySpec& spec, const Vector& z, double gamma) {
  check_gamma(gamma, "prox");
  check_len(spec, z, "prox");
  return prox_impl(spec, z, gamma);
}

Vector prox_conjugate(const PenaltySpec& spec, const Vector& z) {
  check_len(spec, z, "prox_conjugate");
  return z - prox_impl(spec, z, 1.0);
}

double moreau_envelope(const PenaltySpec& spec, const Vector& x, double gamma) {
  check_gamma(gamma, "moreau_envelope");
  check_len(spec, x, "moreau_envelope");
  const Vector p = prox_impl(spec, x, gamma);
  return eval_impl(spec, p) + (x - p).squaredNorm() / (2.0 * gamma);
}

Vector moreau_gradient(const PenaltySpec& spec, const Vector& x, double gamma) {
  check_gamma(gamma, "moreau_gradient");
  check_len(spec, x, "moreau_gradient");
  return (x - prox_impl(spec, x, gamma)) / gamma;
}

}  // namespace ligme
