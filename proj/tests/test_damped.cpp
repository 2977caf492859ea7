#include "cofmat/damped.hpp"
#include "cofmat/discrete.hpp"
#include "cofmat/error.hpp"
#include "cofmat/funcalc.hpp"
#include "cofmat/quadrature.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace cofmat;
using testing::max_abs;
using testing::max_diff;

namespace {

Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

CompleteProblem scalar_problem(double a, double c) {
  const GradedSpace e = GradedSpace::euclidean(1, "E");
  return reduction_complete(scalar(a), scalar(c), e, e);
}

Vector smooth(const Matrix& xy, double k) {
  Vector v(xy.rows());
  for (Index i = 0; i < xy.rows(); ++i) v(i) = std::sin(k * std::numbers::pi * xy(i, 0));
  return v;
}

}  // namespace

TEST_CASE("nilpotent reduction") {
  const GradedSpace e = GradedSpace::euclidean(3, "E");
  const CompleteProblem p = reduction_complete(Matrix::Zero(3, 3), Matrix::Zero(3, 3), e, e);
  for (double t : {0.0, 0.5, 2.0}) {
    Matrix expect = Matrix::Identity(6, 6);
    expect.topRightCorner(3, 3) = t * Matrix::Identity(3, 3);
    CHECK(max_diff(expm(p.reduction, t), expect) <= 1e-14);
  }
  CHECK(p.a_norm == 0.0);
}

TEST_CASE("scalar characteristic roots") {
  const CompleteProblem p = scalar_problem(-1.0, -3.0);
  const CVector ev = eigenvalues(p.reduction);
  const double mp = (-3.0 + std::sqrt(5.0)) / 2, mm = (-3.0 - std::sqrt(5.0)) / 2;
  CHECK(ev(0).real() == doctest::Approx(mm).epsilon(1e-13));
  CHECK(ev(1).real() == doctest::Approx(mp).epsilon(1e-13));
  CHECK(ev(0).imag() == 0.0);
  CHECK(p.a_norm == doctest::Approx(1.0));
  // μ² − Cμ − A vanishes
  for (double mu : {mp, mm}) CHECK(std::abs(mu * mu + 3 * mu + 1) <= 1e-13);
}

TEST_CASE("scalar closed form") {
  const CompleteProblem p = scalar_problem(-1.0, -3.0);
  const double mp = (-3.0 + std::sqrt(5.0)) / 2, mm = (-3.0 - std::sqrt(5.0)) / 2;
  const DampedRun run = overdamped_simulate(p, Vector::Ones(1), Vector::Zero(1), 4.0, 40);
  for (std::size_t k = 0; k < run.traj.size(); ++k) {
    const double t = run.traj.t[k];
    const double u = (mp * std::exp(mm * t) - mm * std::exp(mp * t)) / (mp - mm);
    const double ud = mp * mm * (std::exp(mm * t) - std::exp(mp * t)) / (mp - mm);
    CHECK(run.traj.u[k](0) == doctest::Approx(u).epsilon(1e-12).scale(1.0));
    CHECK(run.traj.v[k](0) == doctest::Approx(ud).epsilon(1e-12).scale(1.0));
  }
  CHECK(run.residual <= 1e-6);
}

TEST_CASE("zero data") {
  const CompleteProblem p = compl_instance(1, 8);
  const DampedRun run = overdamped_simulate(p, Vector::Zero(8), Vector::Zero(8), 1.0, 5);
  for (double x : run.state_norms) CHECK(x == 0.0);
  CHECK(run.residual == 0.0);
}

TEST_CASE("compl instance is overdamped") {
  const CompleteProblem p = compl_instance(1, 16);
  CHECK(p.reduction.rows() == 32);
  CHECK(std::isfinite(p.a_norm));
  // ‖A u‖ = ‖(−C)^{1/2} u‖, so A is a contraction V → X
  CHECK(p.a_norm == doctest::Approx(1.0).epsilon(1e-8));
  const CVector ev = eigenvalues(p.reduction);
  for (Index k = 0; k < ev.size(); ++k) {
    CHECK(std::abs(ev(k).imag()) <= 1e-9 * std::abs(ev(k)));
    CHECK(ev(k).real() < 0.0);
  }
  CHECK(spectral_half_angle(ev) <= 1e-6);
  // mesh-stable: still a thin sector at n = 32 and in 2D
  CHECK(spectral_half_angle(eigenvalues(compl_instance(1, 32).reduction)) < std::numbers::pi / 2);
  CHECK(spectral_half_angle(eigenvalues(compl_instance(2, 5).reduction)) < std::numbers::pi / 2);
}

TEST_CASE("compl trajectories dissipate") {
  const CompleteProblem p = compl_instance(1, 16);
  const Matrix xs = interior_coordinates(Mesh::make(1, 16));
  const Vector f = smooth(xs, 1.0) + 0.3 * smooth(xs, 3.0);
  const Vector g = smooth(xs, 2.0);
  const DampedRun run = overdamped_simulate(p, f, g, 5.0, 50);
  for (double x : run.state_norms) {
    CHECK(std::isfinite(x));
    CHECK(x <= run.state_norms.front() * (1 + 1e-12));
  }
  CHECK(run.state_norms.back() < run.state_norms.front());
  CHECK(run.residual <= 1e-5);

  const std::vector<double> e = damped_energy(p, run.traj);
  for (std::size_t k = 1; k < e.size(); ++k) CHECK(e[k] <= e[k - 1] * (1 + 1e-6));
  CHECK(e.back() < e.front());
}

TEST_CASE("finite-difference residual is second order in the step") {
  const CompleteProblem p = scalar_problem(-1.0, -3.0);
  const double r1 = overdamped_simulate(p, Vector::Ones(1), Vector::Zero(1), 2.0, 4, 1e-2).residual;
  const double r2 = overdamped_simulate(p, Vector::Ones(1), Vector::Zero(1), 2.0, 4, 5e-3).residual;
  CHECK(std::log2(r1 / r2) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("reduction equals the damping semigroup plus a bounded perturbation") {
  // 𝒜 = 𝒜₀ + 𝒫 with 𝒜₀ = [[0, I], [0, C]], 𝒫 = [[0, 0], [A, 0]]:
  // e^{t𝒜} = e^{t𝒜₀} + ∫₀ᵗ e^{(t−s)𝒜₀} 𝒫 e^{s𝒜} ds
  const CompleteProblem p = compl_instance(1, 4);
  const Index n = 4;
  Matrix a0 = Matrix::Zero(2 * n, 2 * n);
  a0.topRightCorner(n, n).setIdentity();
  a0.bottomRightCorner(n, n) = p.c;
  Matrix pert = Matrix::Zero(2 * n, 2 * n);
  pert.bottomLeftCorner(n, n) = p.a;
  // e^{t𝒜₀} in closed form from the semigroup of C: [[I, C⁻¹(e^{tC} − I)], [0, e^{tC}]]
  auto semigroup0 = [&](double t) {
    const Matrix ec = testing::symmetric_function(p.c, [t](double l) { return std::exp(t * l); });
    Matrix m = Matrix::Identity(2 * n, 2 * n);
    m.topRightCorner(n, n) = testing::symmetric_function(p.c, [t](double l) { return std::expm1(t * l) / l; });
    m.bottomRightCorner(n, n) = ec;
    return m;
  };
  const double t = 0.05;
  const GaussRule r = gauss_legendre(20);
  const int panels = 40;
  Matrix integral = Matrix::Zero(2 * n, 2 * n);
  for (int k = 0; k < panels; ++k) {
    const double lo = t * k / panels, hi = t * (k + 1) / panels;
    for (std::size_t q = 0; q < r.nodes.size(); ++q) {
      const double s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * r.nodes[q];
      integral += 0.5 * (hi - lo) * r.weights[q] * semigroup0(t - s) * pert * expm(p.reduction, s);
    }
  }
  const Matrix full = expm(p.reduction, t);
  CHECK(max_diff(semigroup0(t), expm(a0, t)) <= 1e-8 * max_abs(expm(a0, t)));
  CHECK(max_diff(semigroup0(t) + integral, full) <= 1e-8 * max_abs(full));
}

TEST_CASE("scalar sector probe") {
  // M = [−1], ω = 0: |λ| / |λ + 1| ≤ 1 for Re λ ≥ 0
  std::vector<double> angles;
  for (int k = -8; k <= 8; ++k) angles.push_back(k * std::numbers::pi / 16);
  const SectorTable t = sector_probe(scalar(-1.0), 0.0, angles, default_sector_radii());
  for (const auto& s : t.rows) {
    const Complex lam = std::polar(s.r, s.theta);
    CHECK(s.value == doctest::Approx(std::abs(lam) / std::abs(lam + 1.0)).epsilon(1e-12));
    CHECK(s.value <= 1.0 + 1e-12);
  }
  CHECK(t.pass);
}

TEST_CASE("sector probe on the compl reduction") {
  const CompleteProblem p = compl_instance(1, 8);
  const SectorTable t = sector_probe(p.reduction, 0.0, default_sector_angles(), default_sector_radii(), p.phase());
  CHECK(t.pass);
  CHECK(t.max_value <= kSectorBound);
  CHECK(t.max_value >= 1.0);
}

TEST_CASE("skew generator fails the sector probe") {
  Matrix m(2, 2);
  m << 0, 1, -1, 0;
  const SectorTable t = sector_probe(m, 0.0, default_sector_angles(), default_sector_radii());
  CHECK_FALSE(t.pass);
  bool blew_up_near_axis = false;
  for (const auto& s : t.rows)
    if (!s.pass && std::abs(std::abs(s.theta) - std::numbers::pi / 2) < 0.2) blew_up_near_axis = true;
  CHECK(blew_up_near_axis);
  // a small positive shift still fails: the eigenvalue rays are sampled
  CHECK_FALSE(sector_probe(m, 0.1, default_sector_angles(), default_sector_radii()).pass);
  CHECK(spectral_half_angle(eigenvalues(m)) == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("sector probe arguments") {
  const Matrix m = scalar(-1.0);
  CHECK_THROWS_AS(sector_probe(m, 0.0, {std::numbers::pi}, {1.0}), DomainError);
  CHECK_THROWS_AS(sector_probe(m, 0.0, {0.0}, {-1.0}), DomainError);
  CHECK_THROWS_AS(sector_probe(m, 0.0, {0.0}, {1.0}, GradedSpace::euclidean(2, "E")), DimensionError);
  const auto th = default_sector_angles();
  CHECK(std::is_sorted(th.begin(), th.end()));
  CHECK(std::find(th.begin(), th.end(), 0.0) != th.end());
  CHECK(th.front() == doctest::Approx(-(std::numbers::pi - kSectorMargin)));
}

TEST_CASE("complete problem dimension checks") {
  const GradedSpace e2 = GradedSpace::euclidean(2, "E");
  CHECK_THROWS_AS(reduction_complete(Matrix::Zero(2, 2), Matrix::Zero(3, 3), e2, e2), DimensionError);
  CHECK_THROWS_AS(reduction_complete(Matrix::Zero(2, 3), Matrix::Zero(2, 2), e2, e2), DimensionError);
  const CompleteProblem p = scalar_problem(-1.0, -3.0);
  CHECK_THROWS_AS(overdamped_simulate(p, Vector::Zero(2), Vector::Zero(1), 1.0, 2), DimensionError);
  CHECK_THROWS_AS(overdamped_simulate(p, Vector::Zero(1), Vector::Zero(1), 0.0, 2), DomainError);
}
