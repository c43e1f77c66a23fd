#pragma once

#include <random>

#include "ligme/linops.hpp"

namespace testutil {

using ligme::Index;
using ligme::Matrix;
using ligme::Vector;

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline Matrix randn(Index r, Index c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = n(rng());
  return m;
}

inline Vector randn(Index n) { return randn(n, 1).col(0); }

inline double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

}  // namespace testutil
