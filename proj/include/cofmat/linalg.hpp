#pragma once

#include <Eigen/Dense>

#include <complex>
#include <random>
#include <string_view>

namespace cofmat {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Relative tolerance used when a matrix is declared symmetric.
inline constexpr double kSymmetryTol = 1e-12;

void require_square(const Matrix& m, std::string_view what);
void require_finite(const Matrix& m, std::string_view what);

/// ‖M − Mᵀ‖_max ≤ tol · max(1, ‖M‖_max).
bool is_symmetric(const Matrix& m, double tol = kSymmetryTol);

bool is_diagonal(const Matrix& m);

/// Eigenvalues of a general real matrix, sorted by (real, imag) ascending.
CVector eigenvalues(const Matrix& m);

/// Eigenvalues of a symmetric matrix, ascending.
Vector symmetric_eigenvalues(const Matrix& m);

struct SymmetricEigen {
  Vector values;   ///< ascending
  Matrix vectors;  ///< orthonormal columns
};

/// Full eigendecomposition of a symmetric matrix (lower triangle is read).
/// Throws SpectralError if the solver does not converge.
SymmetricEigen symmetric_eigen(const Matrix& m);

/// Largest singular value (2-norm).
double spectral_norm(const Matrix& m);
double spectral_norm(const CMatrix& m);

/// Singular values sorted descending.
Vector singular_values(const Matrix& m);

/// 1-norm condition number ‖M‖₁‖M⁻¹‖₁; +inf when M is numerically singular.
double condition_number(const Matrix& m);

/// Block-diagonal concatenation.
Matrix block_diagonal(const Matrix& a, const Matrix& b);

/// Kronecker product.
Matrix kron(const Matrix& a, const Matrix& b);

/// Random symmetric negative definite matrix Q diag(−d) Qᵀ with d drawn
/// uniformly from [lo, hi] and Q a Haar-like orthogonal factor.
Matrix random_symmetric_negative_definite(Index n, std::mt19937_64& rng, double lo = 0.5,
                                          double hi = 10.0);

/// Matrix with independent entries uniform in [−scale, scale].
Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0);

}  // namespace cofmat
