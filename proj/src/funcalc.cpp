#include "cofmat/funcalc.hpp"

#include "cofmat/error.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace cofmat {

std::string_view to_string(CofMethod m) {
  switch (m) {
    case CofMethod::series: return "series";
    case CofMethod::spectral: return "spectral";
    case CofMethod::reduction: return "reduction";
  }
  return "?";
}

CofMethod parse_cof_method(std::string_view s) {
  if (s == "series") return CofMethod::series;
  if (s == "spectral") return CofMethod::spectral;
  if (s == "reduction") return CofMethod::reduction;
  throw DomainError("unknown cof method '" + std::string(s) + "'");
}

namespace {

double norm1(const Matrix& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); }

void check_args(const Matrix& a, double t, double tol, std::string_view what) {
  require_square(a, what);
  require_finite(a, what);
  if (!std::isfinite(t)) throw DomainError(std::string(what) + ": time must be finite");
  if (!(tol > 0.0)) throw DomainError(std::string(what) + ": tolerance must be positive");
}

CofSof series_route(const Matrix& a, double t, double tol) {
  const Index n = a.rows();
  const Matrix eye = Matrix::Identity(n, n);
  const double tau0 = std::abs(t);
  const double arg = tau0 * tau0 * norm1(a);
  int halvings = 0;
  if (arg > 1.0) halvings = static_cast<int>(std::ceil(std::log(arg) / std::log(4.0)));
  const double tau = std::ldexp(tau0, -halvings);
  const Matrix x = (tau * tau) * a;

  // ‖x‖₁ ≤ 1, so the k-th terms are bounded by 1/(2k)! and the loop is short.
  const double stop = 1e-2 * std::min(tol, std::numeric_limits<double>::epsilon());
  Matrix c = eye;
  Matrix s = eye;
  Matrix power = eye;
  double fact_even = 1.0;  // (2k)!
  double fact_odd = 1.0;   // (2k+1)!
  for (int k = 1; k < 40; ++k) {
    power = power * x;
    fact_even *= (2.0 * k - 1.0) * (2.0 * k);
    fact_odd *= (2.0 * k) * (2.0 * k + 1.0);
    c += power / fact_even;
    s += power / fact_odd;
    if (norm1(power) / fact_even <= stop) break;
  }
  s *= tau;

  for (int i = 0; i < halvings; ++i) {
    Matrix s2 = 2.0 * (s * c);
    c = 2.0 * (c * c) - eye;
    s = std::move(s2);
  }
  if (t < 0.0) s = -s;
  return {c, s};
}

// cos(t√(−λ)) and sin(t√(−λ))/√(−λ); even in the square root so any branch works.
std::pair<Complex, Complex> scalar_cos_sin(Complex lambda, double t) {
  const Complex z = t * std::sqrt(-lambda);
  const Complex cz = std::cos(z);
  Complex sz;
  if (std::abs(z) < 1e-4) {
    const Complex z2 = z * z;
    sz = t * (1.0 - z2 / 6.0 + z2 * z2 / 120.0);
  } else {
    sz = t * std::sin(z) / z;
  }
  return {cz, sz};
}

CofSof spectral_route(const Matrix& a, double t) {
  const Index n = a.rows();
  if (is_symmetric(a)) {
    SymmetricEigen es;
    try {
      es = symmetric_eigen(0.5 * (a + a.transpose()));
    } catch (const SpectralError&) {
      throw MethodUnavailable("spectral: eigensolver failed");
    }
    Vector fc(n), fs(n);
    for (Index i = 0; i < n; ++i) {
      const auto [cz, sz] = scalar_cos_sin(Complex(es.values(i), 0.0), t);
      fc(i) = cz.real();
      fs(i) = sz.real();
    }
    const Matrix& q = es.vectors;
    return {q * fc.asDiagonal() * q.transpose(), q * fs.asDiagonal() * q.transpose()};
  }
  Eigen::EigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw MethodUnavailable("spectral: eigensolver failed");
  const CMatrix p = es.eigenvectors();
  Eigen::PartialPivLU<CMatrix> lu(p);
  const CMatrix pinv = lu.inverse();
  const double cond = p.cwiseAbs().colwise().sum().maxCoeff() *
                      pinv.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(cond) || cond > 1e8) {
    throw MethodUnavailable("spectral: matrix is not diagonalizable within tolerance (cond(P) = " +
                            std::to_string(cond) + ")");
  }
  CVector fc(n), fs(n);
  for (Index i = 0; i < n; ++i) {
    const auto [cz, sz] = scalar_cos_sin(es.eigenvalues()(i), t);
    fc(i) = cz;
    fs(i) = sz;
  }
  return {(p * fc.asDiagonal() * pinv).real(), (p * fs.asDiagonal() * pinv).real()};
}

CofSof reduction_route(const Matrix& a, double t) {
  const Index n = a.rows();
  const Matrix e = expm(reduction_matrix(a), t);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, n)};
}

}  // namespace

Matrix reduction_matrix(const Matrix& a) {
  require_square(a, "reduction_matrix");
  const Index n = a.rows();
  Matrix m = Matrix::Zero(2 * n, 2 * n);
  m.topRightCorner(n, n).setIdentity();
  m.bottomLeftCorner(n, n) = a;
  return m;
}

CofSof cof_sof_eval(const Matrix& a, double t, CofMethod method, double tol) {
  check_args(a, t, tol, "cof_eval");
  const Index n = a.rows();
  if (t == 0.0) return {Matrix::Identity(n, n), Matrix::Zero(n, n)};
  switch (method) {
    case CofMethod::series: return series_route(a, t, tol);
    case CofMethod::spectral: return spectral_route(a, t);
    case CofMethod::reduction: return reduction_route(a, t);
  }
  throw DomainError("cof_eval: unknown method");
}

Matrix cof_eval(const Matrix& a, double t, CofMethod method, double tol) {
  return cof_sof_eval(a, t, method, tol).cos;
}

Matrix sof_eval(const Matrix& a, double t, CofMethod method, double tol) {
  return cof_sof_eval(a, t, method, tol).sin;
}

Matrix expm(const Matrix& m, double t) {
  require_square(m, "expm");
  require_finite(m, "expm");
  const Index n = m.rows();
  const Matrix eye = Matrix::Identity(n, n);
  if (t == 0.0) return eye;
  const Matrix a = t * m;
  const double nrm = norm1(a);
  if (!std::isfinite(nrm)) throw RangeError("expm: ‖tM‖ is not finite");
  if (nrm == 0.0) return eye;

  // Higham (2005) degree selection and coefficients.
  static constexpr std::array<double, 4> theta = {1.495585217958292e-2, 2.539398330063230e-1,
                                                  9.504178996162932e-1, 2.097847961257068e0};
  static constexpr double theta13 = 5.371920351148152e0;
  static constexpr std::array<double, 4> b3 = {120., 60., 12., 1.};
  static constexpr std::array<double, 6> b5 = {30240., 15120., 3360., 420., 30., 1.};
  static constexpr std::array<double, 8> b7 = {17297280., 8648640., 1995840., 277200.,
                                               25200.,    1512.,    56.,      1.};
  static constexpr std::array<double, 10> b9 = {17643225600., 8821612800., 2075673600.,
                                                302702400.,   30270240.,   2162160.,
                                                110880.,      3960.,       90.,
                                                1.};
  static constexpr std::array<double, 14> b13 = {
      64764752532480000., 32382376266240000., 7771770303897600., 1187353796428800.,
      129060195264000.,   10559470521600.,    670442572800.,    33522128640.,
      1323241920.,        40840800.,          960960.,          16380.,
      182.,               1.};

  auto pade_low = [&](const auto& b, const Matrix& x) {
    // U = x Σ b_{2k+1} x^{2k}, V = Σ b_{2k} x^{2k}
    const Matrix x2 = x * x;
    Matrix pw = eye;
    Matrix u = b[1] * eye;
    Matrix v = b[0] * eye;
    for (std::size_t k = 2; k < b.size(); k += 2) {
      pw = pw * x2;
      v += b[k] * pw;
      if (k + 1 < b.size()) u += b[k + 1] * pw;
    }
    u = x * u;
    return std::pair<Matrix, Matrix>{u, v};
  };

  Matrix u, v;
  int squarings = 0;
  if (nrm <= theta[0]) {
    std::tie(u, v) = pade_low(b3, a);
  } else if (nrm <= theta[1]) {
    std::tie(u, v) = pade_low(b5, a);
  } else if (nrm <= theta[2]) {
    std::tie(u, v) = pade_low(b7, a);
  } else if (nrm <= theta[3]) {
    std::tie(u, v) = pade_low(b9, a);
  } else {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / theta13))));
    if (squarings > 1000) throw RangeError("expm: ‖tM‖ exceeds the scaling budget");
    const Matrix x = std::ldexp(1.0, -squarings) * a;
    const Matrix x2 = x * x;
    const Matrix x4 = x2 * x2;
    const Matrix x6 = x4 * x2;
    u = x * (x6 * (b13[13] * x6 + b13[11] * x4 + b13[9] * x2) + b13[7] * x6 + b13[5] * x4 +
             b13[3] * x2 + b13[1] * eye);
    v = x6 * (b13[12] * x6 + b13[10] * x4 + b13[8] * x2) + b13[6] * x6 + b13[4] * x4 +
        b13[2] * x2 + b13[0] * eye;
  }
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  if (!r.allFinite()) throw RangeError("expm: result overflowed");
  return r;
}

CofPair::CofPair(Matrix generator, CofMethod method, double tol)
    : generator_(std::move(generator)), method_(method), tol_(tol) {
  require_square(generator_, "CofPair");
  require_finite(generator_, "CofPair");
}

namespace {

Matrix neg_sqrt_root(const Matrix& a) {
  require_square(a, "sqrt_neg_half");
  require_finite(a, "sqrt_neg_half");
  if (!is_symmetric(a)) throw SpectralError("sqrt_neg_half: input is not symmetric");
  const SymmetricEigen es = symmetric_eigen(0.5 * (a + a.transpose()));
  const Vector& ev = es.values;
  if (!(ev.maxCoeff() < 0.0)) {
    throw SpectralError("sqrt_neg_half: input is not negative definite (max eig " +
                        std::to_string(ev.maxCoeff()) + ")");
  }
  const Matrix& q = es.vectors;
  Matrix r = q * (-ev).cwiseSqrt().asDiagonal() * q.transpose();
  return 0.5 * (r + r.transpose());
}

}  // namespace

SquareRoot sqrt_neg_half(const Matrix& a) {
  Matrix r = neg_sqrt_root(a);
  Matrix w = r * r;
  return {std::move(r), GradedSpace(0.5 * (w + w.transpose()), "kisynski")};
}

SquareRoot sqrt_neg_half(const Matrix& a, const GradedSpace& base) {
  if (base.dim() != a.rows()) throw DimensionError("sqrt_neg_half: base space dimension mismatch");
  // root of the symmetric representative G^{1/2} A G^{-1/2}, mapped back
  const Matrix rh = neg_sqrt_root(base.apply_inv_sqrt_right(base.apply_sqrt_left(a)));
  Matrix r = base.inv_sqrt_weight() * rh * base.sqrt_weight();
  const Matrix gs = base.sqrt_weight();
  Matrix w = gs * rh * rh * gs;
  return {std::move(r), GradedSpace(0.5 * (w + w.transpose()), "kisynski")};
}

double op_norm(const Matrix& m, const GradedSpace& from, const GradedSpace& to) {
  if (m.cols() != from.dim() || m.rows() != to.dim()) {
    throw DimensionError("op_norm: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " operator does not map " + from.label() + "(" +
                         std::to_string(from.dim()) + ") to " + to.label() + "(" +
                         std::to_string(to.dim()) + ")");
  }
  return spectral_norm(to.apply_factor_left(from.apply_inv_factor_right(m)));
}

}  // namespace cofmat
