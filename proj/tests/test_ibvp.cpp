#include "cofmat/error.hpp"
#include "cofmat/ibvp.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace cofmat;
using testing::max_abs;
using testing::max_diff;

namespace {

BoundaryTriple dirichlet_triple(Index n) {
  const Mesh m = Mesh::make(1, n);
  const Traces tr = traces(m);
  return make_triple(maximal_laplacian(m), tr.dirichlet.matrix, interior_restriction(m), interior_l2(m),
                     boundary_l2(m), extended_h1(m), boundary_l2(m));
}

Vector random_vector(Index n, std::mt19937_64& g) { return random_matrix(n, 1, g); }

double trajectory_gap(const Trajectory& a, const Trajectory& b) {
  double gap = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    gap = std::max(gap, max_diff(a.u[k], b.u[k]));
    gap = std::max(gap, max_diff(a.v[k], b.v[k]));
  }
  return gap;
}

}  // namespace

TEST_CASE("extended ordering and the zero-trace extension") {
  const BoundaryTriple t = dirichlet_triple(6);
  CHECK(t.interior() == 6);
  CHECK(t.boundary() == 2);
  CHECK(t.extended() == 8);
  CHECK(max_diff(t.r * t.e0, Matrix::Identity(6, 6)) <= 1e-14);
  CHECK(max_abs(t.l * t.e0) <= 1e-14);
  CHECK(max_abs(t.r * t.lift) <= 1e-14);
  CHECK(max_diff(t.l * t.lift, Matrix::Identity(2, 2)) <= 1e-14);
  // A0 with the Dirichlet trace is the Dirichlet Laplacian
  CHECK(max_diff(t.a0, laplacian(Mesh::make(1, 6), Bc::dirichlet).matrix) <= 1e-9);
}

TEST_CASE("Dirichlet map at λ = 0 is linear interpolation") {
  const Index n = 9;
  const BoundaryTriple t = dirichlet_triple(n);
  const Matrix d0 = dirichlet_op(t, 0.0);
  const Matrix xs = interior_coordinates(Mesh::make(1, n));
  for (Index i = 0; i < n; ++i) {
    const double x = xs(i, 0);
    CHECK(d0(i, 0) == doctest::Approx(1.0 - x).epsilon(1e-12));
    CHECK(d0(i, 1) == doctest::Approx(x).epsilon(1e-12));
  }
  CHECK(max_abs(d0 * Vector::Zero(2)) == 0.0);
  // columns solve (Amax − λ R) u = 0, L u = e_k
  const Matrix u = dirichlet_solution(t, 0.7);
  CHECK(max_abs((t.amax - 0.7 * t.r) * u) <= 1e-9);
  CHECK(max_diff(t.l * u, Matrix::Identity(2, 2)) <= 1e-12);
}

TEST_CASE("Neumann Dirichlet map converges to the cosh/sinh solution") {
  // u'' = u, −u'(0) = w0, u'(1) = w1
  const double w0 = 0.8, w1 = -0.3;
  const double b = -w0;
  const double a = (w1 - b * std::cosh(1.0)) / std::sinh(1.0);
  auto err = [&](Index n) {
    const Cenn2 c = cenn2_instance({1, n, -1.0, std::nullopt});
    const Matrix d = dirichlet_op(c.triple, 1.0);
    const Vector u = d * (Vector(2) << w0, w1).finished();
    const Matrix xs = interior_coordinates(c.mesh);
    double e = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double x = xs(i, 0);
      e = std::max(e, std::abs(u(i) - (a * std::cosh(x) + b * std::sinh(x))));
    }
    return e;
  };
  const double e32 = err(32), e64 = err(64), e128 = err(128);
  CHECK(e64 < 1e-3);
  CHECK(std::log2(e32 / e64) >= 1.9);
  CHECK(std::log2(e64 / e128) >= 1.9);
}

TEST_CASE("resolvent errors name the nearest eigenvalue") {
  const BoundaryTriple t = dirichlet_triple(5);
  const double ev = symmetric_eigenvalues(t.a0).maxCoeff();
  try {
    dirichlet_op(t, ev);
    FAIL("expected ResolventError");
  } catch (const ResolventError& e) {
    CHECK(e.nearest_real() == doctest::Approx(ev).epsilon(1e-10));
    CHECK(e.nearest_imag() == doctest::Approx(0.0));
  }
  CHECK_THROWS_AS(assemble_coupled(t, Matrix::Zero(2, 7), Matrix::Zero(2, 2), ev), ResolventError);
}

TEST_CASE("make_triple rejects bad boundary operators") {
  const Mesh m = Mesh::make(1, 4);
  Matrix l = traces(m).dirichlet.matrix;
  l.row(1) = l.row(0);
  CHECK_THROWS_AS(make_triple(maximal_laplacian(m), l, interior_restriction(m), interior_l2(m), boundary_l2(m),
                              extended_h1(m), boundary_l2(m)),
                  SpectralError);
  CHECK_THROWS_AS(make_triple(maximal_laplacian(m), Matrix::Zero(1, 6), interior_restriction(m), interior_l2(m),
                              boundary_l2(m), extended_h1(m), boundary_l2(m)),
                  DimensionError);
}

TEST_CASE("default shift") {
  const Cenn2 c = cenn2_instance({});
  const double lam = default_lambda(c.triple);
  CHECK(lam == doctest::Approx(0.5));
  const CVector ev = eigenvalues(c.triple.a0);
  for (Index k = 0; k < ev.size(); ++k) CHECK(std::abs(ev(k) - lam) >= 0.5 - 1e-9);
  CHECK(default_lambda(dirichlet_triple(6)) == 0.0);
}

TEST_CASE("B = B̃ = 0 at λ = 0") {
  const BoundaryTriple t = dirichlet_triple(6);
  const CoupledMatrix cm = assemble_coupled(t, Matrix::Zero(2, 8), Matrix::Zero(2, 2), 0.0);
  Matrix expect = Matrix::Zero(8, 8);
  expect.topLeftCorner(6, 6) = t.a0;
  CHECK(max_diff(cm.alam, expect) <= 1e-12);
  Matrix minv = Matrix::Identity(8, 8);
  minv.topRightCorner(6, 2) = cm.dlam;
  CHECK(max_diff(cm.atil, minv * expect * cm.mlam) <= 1e-9);
}

TEST_CASE("similarity and λ-independence") {
  auto g = testing::rng(21);
  for (Index n : {8, 16, 32}) {
    const Cenn2 c = cenn2_instance({1, n, -1.0, std::nullopt});
    const double lam = default_lambda(c.triple);
    const CoupledMatrix cm = assemble_coupled(c.triple, c.b, c.btil, lam);
    const double scale = max_abs(cm.alam);
    CHECK(similarity_residual(cm) <= 1e-10 * std::max(1.0, scale));
    const Matrix direct = coupled_direct(c.triple, c.b, c.btil);
    const CoupledMatrix other = assemble_coupled(c.triple, c.b, c.btil, lam + 3.7);
    CHECK(max_diff(cm.atil, other.atil) <= 1e-8 * std::max(1.0, max_abs(direct)));
    CHECK(max_diff(cm.atil, direct) <= 1e-8 * std::max(1.0, max_abs(direct)));

    // random admissible B and B̃
    const Matrix b = random_matrix(2, c.triple.extended(), g);
    const Matrix q = random_matrix(2, 2, g);
    const Matrix bt = -q * q.transpose();
    const CoupledMatrix r = assemble_coupled(c.triple, b, bt, lam);
    CHECK(similarity_residual(r) <= 1e-10 * std::max(1.0, max_abs(r.alam)));
    CHECK(max_diff(r.atil, coupled_direct(c.triple, b, bt)) <= 1e-8 * std::max(1.0, max_abs(r.atil)));
  }
}

TEST_CASE("propagators agree through the similarity") {
  const Cenn2 c = cenn2_instance({1, 8, -1.0, std::nullopt});
  const double lam = default_lambda(c.triple);
  const CoupledMatrix cm = assemble_coupled(c.triple, c.b, c.btil, lam);
  const Index k = cm.atil.rows();
  const Index ni = c.triple.interior();
  const Index nb = c.triple.boundary();
  // λ + 𝒜_λ = [[A0, −D_λ B̃], [0, B̃]] + bounded part
  Matrix principal = Matrix::Zero(k, k);
  principal.topLeftCorner(ni, ni) = c.triple.a0;
  principal.topRightCorner(ni, nb) = -cm.dlam * c.btil;
  principal.bottomRightCorner(nb, nb) = c.btil;
  const Matrix be0 = c.b * c.triple.e0;
  Matrix bounded(k, k);
  bounded << -cm.dlam * be0, -cm.dlam * (c.b * cm.ulam - lam * Matrix::Identity(nb, nb)), be0, c.b * cm.ulam;
  const Matrix gen = lam * Matrix::Identity(k, k) + cm.alam;
  CHECK(max_diff(gen, principal + bounded) <= 1e-9 * max_abs(gen));

  Matrix minv = Matrix::Identity(k, k);
  minv.topRightCorner(ni, nb) = cm.dlam;
  for (double t : {0.3, 1.0, 2.0}) {
    const CofSof via = cof_sof_eval(gen, t);
    const CofSof direct = cof_sof_eval(coupled_direct(c.triple, c.b, c.btil), t);
    CHECK(max_diff(minv * via.cos * cm.mlam, direct.cos) <= 1e-8);
    CHECK(max_diff(minv * via.sin * cm.mlam, direct.sin) <= 1e-8);
  }
}

TEST_CASE("dynamic boundary simulation") {
  auto g = testing::rng(31);
  SUBCASE("zero data") {
    const Cenn2 c = cenn2_instance({1, 8, -1.0, std::nullopt});
    const CoupledMatrix cm = assemble_coupled(c.triple, c.b, c.btil, default_lambda(c.triple));
    const DynamicBcRun run = simulate_dynamic_bc(c.triple, cm, Vector::Zero(8), Vector::Zero(8), Vector::Zero(2),
                                                 Vector::Zero(2), 1.0, 10);
    for (std::size_t k = 0; k < run.traj.size(); ++k) {
      CHECK(max_abs(run.traj.u[k]) == 0.0);
      CHECK(max_abs(run.traj.v[k]) == 0.0);
    }
    CHECK(run.coupling_ok);
  }
  SUBCASE("decoupled boundary") {
    const Matrix q = random_matrix(2, 2, g);
    const Matrix bt = -q * q.transpose() - 0.5 * Matrix::Identity(2, 2);
    const Cenn2 c = cenn2_instance({1, 12, 0.0, bt});
    const CoupledMatrix cm = assemble_coupled(c.triple, c.b, c.btil, default_lambda(c.triple));
    const Vector f = random_vector(12, g), gg = random_vector(12, g);
    const Vector h = random_vector(2, g), j = random_vector(2, g);
    const DynamicBcRun run = simulate_dynamic_bc(c.triple, cm, f, gg, h, j, 3.0, 30);
    for (std::size_t k = 0; k < run.traj.size(); ++k) {
      const double t = run.traj.t[k];
      const Vector w = testing::cos_oracle(bt, t) * h + testing::sin_oracle(bt, t) * j;
      CHECK(max_diff(run.traj.u[k].tail(2), w) <= 1e-9);
    }
  }
  SUBCASE("cenn2 matches the reduction exponential") {
    for (Index n : {8, 16}) {
      const Cenn2 c = cenn2_instance({1, n, -1.0, std::nullopt});
      const CoupledMatrix cm = assemble_coupled(c.triple, c.b, c.btil, default_lambda(c.triple));
      const Matrix xs = interior_coordinates(c.mesh);
      Vector f(n), gg = Vector::Zero(n);
      for (Index i = 0; i < n; ++i) f(i) = std::cos(M_PI * xs(i, 0));
      const Vector h = (Vector(2) << 1.0, -1.0).finished();
      const Vector j = Vector::Zero(2);
      const DynamicBcRun run = simulate_dynamic_bc(c.triple, cm, f, gg, h, j, 5.0, 100);
      CHECK(run.coupling_ok);
      CHECK(run.max_coupling <= 1e-8);
      const Trajectory oracle =
          simulate_reduction_oracle(coupled_direct(c.triple, c.b, c.btil), f, gg, h, j, 5.0, 100);
      CHECK(trajectory_gap(run.traj, oracle) <= 1e-7);
    }
  }
  SUBCASE("2D variant") {
    const Cenn2 c = cenn2_instance({2, 5, -1.0, std::nullopt});
    CHECK(c.triple.boundary() == 20);
    const CoupledMatrix cm = assemble_coupled(c.triple, c.b, c.btil, default_lambda(c.triple));
    CHECK(similarity_residual(cm) <= 1e-10 * max_abs(cm.alam));
    const Vector f = random_vector(25, g), gg = random_vector(25, g);
    const Vector h = random_vector(20, g), j = random_vector(20, g);
    const DynamicBcRun run = simulate_dynamic_bc(c.triple, cm, f, gg, h, j, 1.0, 10);
    CHECK(run.coupling_ok);
    const Trajectory oracle = simulate_reduction_oracle(coupled_direct(c.triple, c.b, c.btil), f, gg, h, j, 1.0, 10);
    CHECK(trajectory_gap(run.traj, oracle) <= 1e-7);
  }
  SUBCASE("argument errors") {
    const Cenn2 c = cenn2_instance({1, 6, -1.0, std::nullopt});
    const CoupledMatrix cm = assemble_coupled(c.triple, c.b, c.btil, 0.5);
    CHECK_THROWS_AS(simulate_dynamic_bc(c.triple, cm, Vector::Zero(5), Vector::Zero(6), Vector::Zero(2),
                                        Vector::Zero(2), 1.0, 4),
                    DimensionError);
    CHECK_THROWS_AS(simulate_dynamic_bc(c.triple, cm, Vector::Zero(6), Vector::Zero(6), Vector::Zero(2),
                                        Vector::Zero(2), -1.0, 4),
                    DomainError);
  }
}

TEST_CASE("cenn2 parameter validation") {
  Matrix pos = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(cenn2_instance({1, 8, -1.0, pos}), SpectralError);
  Matrix asym(2, 2);
  asym << -1, 0.5, 0, -1;
  CHECK_THROWS_AS(cenn2_instance({1, 8, -1.0, asym}), SpectralError);
  CHECK_THROWS_AS(cenn2_instance({1, 8, -1.0, Matrix::Zero(3, 3)}), DimensionError);
  CHECK_THROWS_AS(cenn2_instance({3, 8, -1.0, std::nullopt}), DomainError);
}

TEST_CASE("boundary operator norms stay bounded under refinement") {
  std::vector<double> y_to_dx;
  for (Index n : {8, 16, 32, 64}) {
    const Cenn2 c = cenn2_instance({1, n, -1.0, std::nullopt});
    const BoundaryNorms bn = boundary_operator_norms(c.triple, c.b);
    y_to_dx.push_back(bn.y_to_dx);
    CHECK(std::isfinite(bn.da0_to_dy));
  }
  const auto [lo, hi] = std::minmax_element(y_to_dx.begin(), y_to_dx.end());
  CHECK(*hi / *lo <= 1.5);
}
