#include "cofmat/linalg.hpp"

#include "cofmat/error.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

namespace cofmat {

void require_square(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionError(std::string(what) + ": expected a non-empty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw DomainError(std::string(what) + ": matrix has non-finite entries");
  }
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

bool is_diagonal(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

CVector eigenvalues(const Matrix& m) {
  require_square(m, "eigenvalues");
  const Index n = m.rows();
  Matrix work = m;
  std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
  const lapack_int info =
      LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', static_cast<lapack_int>(n), work.data(),
                    static_cast<lapack_int>(n), wr.data(), wi.data(), nullptr, 1, nullptr, 1);
  if (info != 0) {
    throw SpectralError("eigenvalues: dgeev failed with info = " + std::to_string(info));
  }
  std::vector<Complex> ev(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < ev.size(); ++k) ev[k] = {wr[k], wi[k]};
  std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  CVector out(n);
  for (Index k = 0; k < n; ++k) out(k) = ev[static_cast<std::size_t>(k)];
  return out;
}

Vector symmetric_eigenvalues(const Matrix& m) {
  require_square(m, "symmetric_eigenvalues");
  Matrix work = m;
  Vector w(m.rows());
  const lapack_int n = static_cast<lapack_int>(m.rows());
  if (n == 0) return w;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, w.data());
  if (info != 0) throw SpectralError("symmetric_eigenvalues: dsyevd failed with info = " + std::to_string(info));
  return w;
}

SymmetricEigen symmetric_eigen(const Matrix& m) {
  require_square(m, "symmetric_eigen");
  SymmetricEigen out{Vector(m.rows()), m};
  const lapack_int n = static_cast<lapack_int>(m.rows());
  if (n == 0) return out;
  const lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n, out.values.data());
  if (info != 0) throw SpectralError("symmetric_eigen: dsyevd failed with info = " + std::to_string(info));
  return out;
}

namespace {

template <class M>
double largest_singular_value(const M& m) {
  if (m.size() == 0) return 0.0;
  // σ_max² is the top eigenvalue of the smaller Gram matrix.
  using Scalar = typename M::Scalar;
  using Gram = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Gram g = m.rows() >= m.cols() ? Gram(m.adjoint() * m) : Gram(m * m.adjoint());
  if (g.rows() == 1) return std::sqrt(std::abs(g(0, 0)));
  if constexpr (std::is_same_v<Scalar, double>) {
    return std::sqrt(std::max(0.0, symmetric_eigenvalues(g).maxCoeff()));
  } else {
    Eigen::SelfAdjointEigenSolver<Gram> es(g, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
}

}  // namespace

double spectral_norm(const Matrix& m) {
  // Gram squaring loses accuracy only for the small singular values.
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return scale * largest_singular_value(Matrix(m / scale));
}

double spectral_norm(const CMatrix& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return scale * largest_singular_value(CMatrix(m / scale));
}

Vector singular_values(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

double condition_number(const Matrix& m) {
  require_square(m, "condition_number");
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) return std::numeric_limits<double>::infinity();
  const Matrix inv = lu.inverse();
  const double a = m.cwiseAbs().colwise().sum().maxCoeff();
  const double b = inv.cwiseAbs().colwise().sum().maxCoeff();
  return a * b;
}

Matrix block_diagonal(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix random_symmetric_negative_definite(Index n, std::mt19937_64& rng, double lo, double hi) {
  if (n < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw DomainError("random_symmetric_negative_definite: need n >= 1 and 0 < lo <= hi");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(lo, hi);
  Matrix g(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ();
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = -unif(rng);
  Matrix a = q * d.asDiagonal() * q.transpose();
  return 0.5 * (a + a.transpose());
}

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> unif(-scale, scale);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = unif(rng);
  return m;
}

}  // namespace cofmat
