#include "cofmat/damped.hpp"

#include "cofmat/discrete.hpp"
#include "cofmat/error.hpp"
#include "cofmat/funcalc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cofmat {

CompleteProblem reduction_complete(const Matrix& a, const Matrix& c, const GradedSpace& v,
                                   const GradedSpace& x) {
  require_square(a, "reduction_complete: A");
  require_square(c, "reduction_complete: C");
  const Index n = a.rows();
  if (c.rows() != n || v.dim() != n || x.dim() != n) {
    throw DimensionError("reduction_complete: A, C, V and X must share one dimension");
  }
  CompleteProblem p;
  p.a = a;
  p.c = c;
  p.v = v;
  p.x = x;
  p.reduction = Matrix::Zero(2 * n, 2 * n);
  p.reduction.topRightCorner(n, n).setIdentity();
  p.reduction.bottomLeftCorner(n, n) = a;
  p.reduction.bottomRightCorner(n, n) = c;
  p.a_norm = op_norm(a, v, x);
  return p;
}

CompleteProblem compl_instance(int dim, Index n) {
  const Mesh mesh = Mesh::make(dim, n);
  const DiscreteOperator a = laplacian(mesh, Bc::dirichlet);
  const DiscreteOperator c = bilaplacian_hinged(mesh);
  const SquareRoot root = sqrt_neg_half(c.matrix, c.domain);
  return reduction_complete(a.matrix, c.matrix, root.kisynski, a.codomain);
}

DampedRun overdamped_simulate(const CompleteProblem& p, const Vector& f, const Vector& g,
                              double t_end, int samples, double fd_step) {
  const Index n = p.a.rows();
  if (f.size() != n || g.size() != n) {
    throw DimensionError("overdamped_simulate: initial data must have size " + std::to_string(n));
  }
  if (!(t_end > 0.0) || samples < 1) throw DomainError("overdamped_simulate: need T > 0, samples >= 1");
  if (!(fd_step > 0.0)) throw DomainError("overdamped_simulate: finite-difference step must be positive");
  Vector z0(2 * n);
  z0 << f, g;
  const GradedSpace phase = p.phase();

  DampedRun run;
  for (int k = 0; k <= samples; ++k) {
    const double t = t_end * k / samples;
    const Vector z = expm(p.reduction, t) * z0;
    const Vector u = z.head(n);
    const Vector ud = z.tail(n);
    run.traj.t.push_back(t);
    run.traj.u.push_back(u);
    run.traj.v.push_back(ud);
    run.state_norms.push_back(phase.norm(z));
    if (t <= fd_step) continue;
    const Vector ahead = expm(p.reduction, t + fd_step) * z0;
    const Vector behind = expm(p.reduction, t - fd_step) * z0;
    const Vector udd = (ahead.tail(n) - behind.tail(n)) / (2.0 * fd_step);
    const Vector au = p.a * u;
    const Vector cud = p.c * ud;
    const double scale = p.x.norm(au) + p.x.norm(cud);
    const double res = p.x.norm(udd - au - cud);
    run.residual = std::max(run.residual, scale > 0.0 ? res / scale : res);
  }
  return run;
}

std::vector<double> damped_energy(const CompleteProblem& p, const Trajectory& traj) {
  const SquareRoot root = sqrt_neg_half(p.a, p.x);
  return energy_trace(traj, root.kisynski, p.x);
}

std::vector<double> default_sector_angles() {
  const double edge = std::numbers::pi - kSectorMargin;
  std::vector<double> th;
  const int steps = 40;
  for (int k = 0; k <= steps; ++k) th.push_back(-edge + 2.0 * edge * k / steps);
  th.push_back(std::numbers::pi / 2);
  th.push_back(-std::numbers::pi / 2);
  std::sort(th.begin(), th.end());
  th.erase(std::unique(th.begin(), th.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }),
           th.end());
  return th;
}

std::vector<double> default_sector_radii() {
  std::vector<double> r;
  for (int k = 0; k <= 45; ++k) r.push_back(std::pow(10.0, -3.0 + 9.0 * k / 45));
  r.push_back(1.0);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

double spectral_half_angle(const CVector& eigs) {
  double worst = 0.0;
  for (Index k = 0; k < eigs.size(); ++k) {
    const Complex z = eigs(k);
    if (z.imag() == 0.0 && z.real() >= 0.0) return std::numbers::pi;
    worst = std::max(worst, std::numbers::pi - std::abs(std::arg(z)));
  }
  return worst;
}

SectorTable sector_probe(const Matrix& m, double omega, const std::vector<double>& angles,
                         const std::vector<double>& radii, const std::optional<GradedSpace>& space) {
  require_square(m, "sector_probe");
  const Index n = m.rows();
  if (space && space->dim() != n) throw DimensionError("sector_probe: space dimension mismatch");
  for (double th : angles) {
    if (!(std::abs(th) < std::numbers::pi)) throw DomainError("sector_probe: angles must lie in (−π, π)");
  }
  for (double r : radii) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("sector_probe: radii must be positive");
  }
  // M in the weighted coordinates G^{1/2} M G^{-1/2}
  const Matrix mw = space ? Matrix(space->apply_inv_sqrt_right(space->apply_sqrt_left(m))) : m;

  std::vector<std::pair<double, double>> grid;
  for (double th : angles)
    for (double r : radii) grid.emplace_back(th, r);
  const double edge = std::numbers::pi - kSectorMargin;
  const CVector ev = eigenvalues(m);
  for (Index k = 0; k < ev.size(); ++k) {
    const Complex d = ev(k) - omega;
    if (std::abs(d) == 0.0) {
      grid.emplace_back(0.0, std::numeric_limits<double>::min());
      continue;
    }
    const double th = std::arg(d);
    if (std::abs(th) > edge) continue;
    grid.emplace_back(th, std::abs(d));
    for (double r : radii) grid.emplace_back(th, r);
  }

  const double mscale = std::max(1.0, spectral_norm(mw));
  SectorTable table;
  for (const auto& [th, r] : grid) {
    SectorSample s;
    s.theta = th;
    s.r = r;
    s.in_sector = std::abs(th) <= edge + 1e-12;
    const Complex lam = omega + std::polar(r, th);
    CMatrix shifted = -mw.cast<Complex>();
    shifted.diagonal().array() += lam;
    Eigen::BDCSVD<CMatrix> svd(shifted);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    const double gap = std::abs(lam - omega);
    if (smin <= 1e-14 * std::max(mscale, std::abs(lam))) {
      s.hit = true;
      s.value = std::numeric_limits<double>::infinity();
    } else {
      s.value = gap / smin;
    }
    s.pass = !s.hit && s.value <= kSectorBound;
    table.rows.push_back(s);
  }
  table.pass = true;
  for (const auto& s : table.rows) {
    if (!s.in_sector) continue;
    table.max_value = std::max(table.max_value, s.value);
    table.pass = table.pass && s.pass;
  }
  return table;
}

}  // namespace cofmat
