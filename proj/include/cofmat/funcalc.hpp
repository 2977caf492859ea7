#pragma once

// Matrix-function kernels for cosine and sine operator families.
//
// For a square matrix A the cosine family is C(t,A) = Σ t^{2k}Aᵏ/(2k)! and the
// sine family S(t,A) = Σ t^{2k+1}Aᵏ/(2k+1)!. Three evaluation routes are
// provided and must agree:
//   series     scaled power series followed by double-angle recovery
//   spectral   eigendecomposition, exact for diagonalizable inputs
//   reduction  the blocks of exp(t [[0, I], [A, 0]])
// The reduction route is the defining one; the series route is the default.

#include "cofmat/graded_space.hpp"
#include "cofmat/linalg.hpp"

#include <string_view>

namespace cofmat {

enum class CofMethod { series, spectral, reduction };

std::string_view to_string(CofMethod m);
CofMethod parse_cof_method(std::string_view s);

inline constexpr double kDefaultTol = 1e-12;

struct CofSof {
  Matrix cos;
  Matrix sin;
};

/// C(t,A) and S(t,A) in one evaluation.
CofSof cof_sof_eval(const Matrix& a, double t, CofMethod method = CofMethod::series,
                    double tol = kDefaultTol);

Matrix cof_eval(const Matrix& a, double t, CofMethod method = CofMethod::series,
                double tol = kDefaultTol);

Matrix sof_eval(const Matrix& a, double t, CofMethod method = CofMethod::series,
                double tol = kDefaultTol);

/// exp(tM) by scaling and squaring with a degree-13 Padé approximant.
/// Throws RangeError when ‖tM‖ is beyond the squaring budget.
Matrix expm(const Matrix& m, double t = 1.0);

/// The reduction matrix [[0, I], [A, 0]] of ü = Au.
Matrix reduction_matrix(const Matrix& a);

/// A generator together with its cosine/sine families.
class CofPair {
 public:
  explicit CofPair(Matrix generator, CofMethod method = CofMethod::series,
                   double tol = kDefaultTol);

  const Matrix& generator() const { return generator_; }
  CofMethod method() const { return method_; }

  Matrix cos_at(double t) const { return cof_eval(generator_, t, method_, tol_); }
  Matrix sin_at(double t) const { return sof_eval(generator_, t, method_, tol_); }
  CofSof at(double t) const { return cof_sof_eval(generator_, t, method_, tol_); }

 private:
  Matrix generator_;
  CofMethod method_;
  double tol_;
};

struct SquareRoot {
  Matrix root;              ///< R = (−A)^{1/2}, positive and self-adjoint in the base space
  GradedSpace kisynski;     ///< ‖x‖_V = ‖Rx‖ in the base space
};

/// (−A)^{1/2} for negative definite A and the associated Kisyński space.
/// A must be symmetric, or self-adjoint in `base` for the second overload;
/// throws SpectralError otherwise.
SquareRoot sqrt_neg_half(const Matrix& a);
SquareRoot sqrt_neg_half(const Matrix& a, const GradedSpace& base);

/// max_{x≠0} ‖Mx‖_to / ‖x‖_from.
double op_norm(const Matrix& m, const GradedSpace& from, const GradedSpace& to);

}  // namespace cofmat
