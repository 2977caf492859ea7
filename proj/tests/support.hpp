#pragma once

#include "cofmat/linalg.hpp"

#include <cmath>
#include <complex>
#include <random>

namespace testing {

using cofmat::CMatrix;
using cofmat::Complex;
using cofmat::Index;
using cofmat::Matrix;
using cofmat::Vector;

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double max_diff(const Matrix& a, const Matrix& b) { return max_abs(a - b); }

// f(A) for symmetric A through an eigendecomposition done here, independent
// of the library routes.
template <class F>
Matrix symmetric_function(const Matrix& a, F f) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
  Vector d = es.eigenvalues();
  for (Index i = 0; i < d.size(); ++i) d(i) = f(d(i));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline Matrix cos_oracle(const Matrix& a, double t) {
  return symmetric_function(a, [t](double l) { return std::cos(t * std::sqrt(-l)); });
}

inline Matrix sin_oracle(const Matrix& a, double t) {
  return symmetric_function(a, [t](double l) {
    const double w = std::sqrt(-l);
    return std::sin(t * w) / w;
  });
}

inline std::mt19937_64 rng(unsigned seed) { return std::mt19937_64(seed); }

}  // namespace testing
