#include "cofmat/diagnostics.hpp"

#include "cofmat/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cofmat {

ParabolaFit parabola_fit(const std::vector<Complex>& eigs, double vertex_gap) {
  if (eigs.empty()) throw DomainError("parabola_fit: empty spectrum");
  if (!(vertex_gap > 0.0)) throw DomainError("parabola_fit: vertex gap must be positive");
  double scale = 1.0;
  double abscissa = -std::numeric_limits<double>::infinity();
  for (const Complex& z : eigs) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw DomainError("parabola_fit: non-finite eigenvalue");
    }
    scale = std::max(scale, std::abs(z));
    abscissa = std::max(abscissa, z.real());
  }
  const double imag_tol = 1e-9 * scale;

  ParabolaFit fit;
  fit.eigenvalues = eigs;
  fit.real_spectrum = std::none_of(eigs.begin(), eigs.end(),
                                   [&](const Complex& z) { return std::abs(z.imag()) > imag_tol; });
  if (fit.real_spectrum) {
    fit.omega = abscissa;
    fit.c = std::numeric_limits<double>::infinity();
  } else {
    fit.omega = abscissa + vertex_gap;
    fit.c = std::numeric_limits<double>::infinity();
    for (const Complex& z : eigs) {
      if (std::abs(z.imag()) <= imag_tol) continue;
      fit.c = std::min(fit.c, (fit.omega - z.real()) / (z.imag() * z.imag()));
    }
  }
  fit.margin = -std::numeric_limits<double>::infinity();
  for (const Complex& z : eigs) {
    const double bend = std::abs(z.imag()) <= imag_tol ? 0.0 : fit.c * z.imag() * z.imag();
    fit.margin = std::max(fit.margin, z.real() - fit.omega + bend);
  }
  fit.pass = fit.margin <= 1e-12 * scale;
  return fit;
}

ParabolaFit parabola_fit(const CVector& eigs, double vertex_gap) {
  return parabola_fit(std::vector<Complex>(eigs.data(), eigs.data() + eigs.size()), vertex_gap);
}

std::vector<double> energy_trace(const Trajectory& traj, const GradedSpace& v,
                                 const GradedSpace& x) {
  if (traj.u.size() != traj.t.size() || traj.v.size() != traj.t.size()) {
    throw DimensionError("energy_trace: trajectory arrays differ in length");
  }
  std::vector<double> e;
  e.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (traj.u[k].size() != v.dim() || traj.v[k].size() != x.dim()) {
      throw DimensionError("energy_trace: sample " + std::to_string(k) +
                           " does not match the spaces");
    }
    e.push_back(0.5 * (x.norm_squared(traj.v[k]) + v.norm_squared(traj.u[k])));
  }
  return e;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("loglog_slope: need two or more paired samples");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lx = std::log(x[k]);
    const double ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

RefinementTable refinement_probe(const std::function<MeshOperator(Index)>& builder,
                                 const std::vector<Index>& meshes) {
  if (meshes.size() < 2) throw DomainError("refinement_probe: need at least two meshes");
  RefinementTable tab;
  for (Index n : meshes) {
    const MeshOperator m = builder(n);
    tab.meshes.push_back(n);
    tab.h.push_back(1.0 / static_cast<double>(n + 1));
    tab.norms.push_back(op_norm(m.op, m.from, m.to));
  }
  const auto [lo, hi] = std::minmax_element(tab.norms.begin(), tab.norms.end());
  tab.ratio = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  tab.rate = *lo > 0.0 ? loglog_slope(tab.h, tab.norms) : 0.0;
  tab.uniform = tab.ratio <= kUniformRatio && tab.rate > kGrowthRate;
  return tab;
}

double functional_equation_residual(const Matrix& a, const std::vector<double>& ts,
                                    const std::vector<double>& ss, CofMethod method) {
  require_square(a, "functional_equation_residual");
  double worst = 0.0;
  for (double t : ts) {
    const Matrix ct = cof_eval(a, t, method);
    for (double s : ss) {
      const Matrix r = cof_eval(a, t + s, method) + cof_eval(a, t - s, method) -
                       2.0 * ct * cof_eval(a, s, method);
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

CompactnessProfile compactness_proxy(const Matrix& m, double lambda) {
  require_square(m, "compactness_proxy");
  const Matrix shifted = lambda * Matrix::Identity(m.rows(), m.cols()) - m;
  const Vector sv = singular_values(shifted);  // descending
  if (sv(sv.size() - 1) <= sv(0) * 1e-14) {
    const CVector ev = eigenvalues(m);
    Complex nearest = ev(0);
    for (Index k = 1; k < ev.size(); ++k)
      if (std::abs(ev(k) - lambda) < std::abs(nearest - lambda)) nearest = ev(k);
    throw ResolventError("compactness_proxy: λ is in the spectrum", nearest.real(), nearest.imag());
  }
  CompactnessProfile out;
  // singular values of the inverse are the reciprocals, reversed
  for (Index k = sv.size() - 1; k >= 0; --k) out.singular_values.push_back(1.0 / sv(k));
  out.decay = out.singular_values.back() / out.singular_values.front();
  out.decaying = out.decay <= 0.1;
  std::vector<double> idx(out.singular_values.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<double>(k + 1);
  out.slope = loglog_slope(idx, out.singular_values);
  return out;
}

}  // namespace cofmat
