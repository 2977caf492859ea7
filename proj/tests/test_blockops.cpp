#include "cofmat/blockops.hpp"
#include "cofmat/diagnostics.hpp"
#include "cofmat/error.hpp"
#include "cofmat/io.hpp"
#include "cofmat/quadrature.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace cofmat;
using testing::max_abs;
using testing::max_diff;

namespace {

Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

struct Triple {
  Matrix a, h, d;
};

Triple random_triple(unsigned seed, Index na, Index nd) {
  auto g = testing::rng(seed);
  return {random_symmetric_negative_definite(na, g, 0.5, 8.0), random_matrix(na, nd, g),
          random_symmetric_negative_definite(nd, g, 0.5, 8.0)};
}

Matrix assembled(const Triple& t) {
  const Index na = t.a.rows(), nd = t.d.rows();
  Matrix m = Matrix::Zero(na + nd, na + nd);
  m.topLeftCorner(na, na) = t.a;
  m.topRightCorner(na, nd) = t.h;
  m.bottomRightCorner(nd, nd) = t.d;
  return m;
}

Matrix reduction(const Matrix& m) {
  const Index n = m.rows();
  Matrix r = Matrix::Zero(2 * n, 2 * n);
  r.topRightCorner(n, n).setIdentity();
  r.bottomLeftCorner(n, n) = m;
  return r;
}

}  // namespace

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (int n : {1, 2, 5, 8, 12}) {
    const GaussRule r = gauss_legendre(n);
    REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
    for (int p = 0; p < 2 * n; ++p) {
      double s = 0;
      for (int k = 0; k < n; ++k) s += r.weights[k] * std::pow(r.nodes[k], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), DomainError);
}

TEST_CASE("panel count") {
  const QuadratureSpec q;
  CHECK(panel_count(0.2, q) == 4);
  CHECK(panel_count(1.0, q) == 10);
  CHECK(panel_count(1.05, q) == 11);
  CHECK(panel_count(0.0, q) == 0);
}

TEST_CASE("zero coupling gives zero convolutions") {
  const Triple t = random_triple(1, 3, 2);
  const Convolutions c = convolutions(t.a, Matrix::Zero(3, 2), t.d, 1.3);
  CHECK(max_abs(c.cs) == 0.0);
  CHECK(max_abs(c.ss) == 0.0);
  CHECK(max_abs(c.sc) == 0.0);
  CHECK(max_abs(c.cc) == 0.0);
  const CofSof p = triangular_propagator(t.a, Matrix::Zero(3, 2), t.d, 1.3);
  CHECK(max_abs(p.cos.topRightCorner(3, 2)) == 0.0);
}

TEST_CASE("scalar resonance closed form") {
  // A = D = −ω², H = h: ∫ cos(ω(t−s)) h sin(ωs)/ω ds = h t sin(ωt) / (2ω)
  for (double w : {0.5, 1.0, 3.0}) {
    for (double t : {0.1, 1.0, 2.7, 7.5}) {
      const double h = 1.7;
      const Matrix cs = convolution_block(scalar(-w * w), scalar(h), scalar(-w * w), t);
      CHECK(cs(0, 0) == doctest::Approx(h * t * std::sin(w * t) / (2 * w)).epsilon(1e-11));
    }
  }
  CHECK_THROWS_AS(convolution_block(scalar(-1), scalar(1), scalar(-1), -0.5), DomainError);
}

TEST_CASE("triangular propagator matches the assembled cosine family") {
  for (unsigned seed : {3u, 4u, 5u}) {
    const Triple tr = random_triple(seed, 4, 3);
    const Matrix m = assembled(tr);
    for (double t : {0.0, 0.3, 1.0, 2.5, -1.4}) {
      const CofSof p = triangular_propagator(tr.a, tr.h, tr.d, t);
      const CofSof o = cof_sof_eval(m, t);
      CHECK(max_diff(p.cos, o.cos) <= 1e-8);
      CHECK(max_diff(p.sin, o.sin) <= 1e-8);
      // diagonal blocks are the factor families
      CHECK(max_diff(p.cos.topLeftCorner(4, 4), cof_eval(tr.a, t)) <= 1e-12);
      CHECK(max_diff(p.sin.bottomRightCorner(3, 3), sof_eval(tr.d, t)) <= 1e-12);
      CHECK(max_abs(p.cos.bottomLeftCorner(3, 4)) == 0.0);
    }
  }
}

TEST_CASE("quadrature converges under panel halving") {
  const Triple tr = random_triple(6, 3, 3);
  QuadratureSpec q;
  q.estimate_error = true;
  const Convolutions c = convolutions(tr.a, tr.h, tr.d, 3.0, q);
  CHECK(c.error_estimate <= 1e-10);
  // Richardson: a coarse rule is still close
  QuadratureSpec coarse;
  coarse.nodes_per_panel = 4;
  coarse.max_panel_width = 0.5;
  const Convolutions cc = convolutions(tr.a, tr.h, tr.d, 3.0, coarse);
  CHECK(max_diff(cc.cs, c.cs) <= 1e-5);
}

TEST_CASE("integration by parts link between blocks") {
  // d/dt ss = cs and d/dt sc = cc
  const Triple tr = random_triple(7, 3, 2);
  const double t = 1.8;
  const GaussRule r = gauss_legendre(10);
  const int panels = 18;
  Matrix integral = Matrix::Zero(3, 2);
  Matrix integral_cc = Matrix::Zero(3, 2);
  for (int p = 0; p < panels; ++p) {
    const double a = t * p / panels, b = t * (p + 1) / panels;
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
      const double s = 0.5 * (a + b) + 0.5 * (b - a) * r.nodes[k];
      const Convolutions c = convolutions(tr.a, tr.h, tr.d, s);
      integral += 0.5 * (b - a) * r.weights[k] * c.cs;
      integral_cc += 0.5 * (b - a) * r.weights[k] * c.cc;
    }
  }
  const Convolutions at = convolutions(tr.a, tr.h, tr.d, t);
  CHECK(max_diff(integral, at.ss) <= 1e-7);
  CHECK(max_diff(integral_cc, at.sc) <= 1e-7);
}

TEST_CASE("reduction in phase-space order") {
  const Triple tr = random_triple(8, 3, 2);
  const Matrix m = assembled(tr);
  const Matrix r = reduction(m);
  const Matrix u = permutation_U(3, 2, 3, 2);
  // orthogonal 0/1 matrix
  CHECK(max_diff(u * u.transpose(), Matrix::Identity(10, 10)) == 0.0);
  CHECK(((u.array() == 0.0) || (u.array() == 1.0)).all());

  // conjugation is block triangular [[𝐀, 𝐇], [0, 𝐃]] exactly
  const Matrix conj = u * r * u.transpose();
  Matrix hand = Matrix::Zero(10, 10);
  hand.block(0, 3, 3, 3).setIdentity();
  hand.block(3, 0, 3, 3) = tr.a;
  hand.block(3, 6, 3, 2) = tr.h;
  hand.block(6, 8, 2, 2).setIdentity();
  hand.block(8, 6, 2, 2) = tr.d;
  CHECK(max_diff(conj, hand) == 0.0);
  CHECK(max_abs(conj.bottomLeftCorner(4, 6)) == 0.0);

  for (double t : {0.0, 0.4, 1.7}) {
    const Matrix e = reduction_4x4(tr.a, tr.h, tr.d, t);
    CHECK(max_diff(e, expm(r, t)) <= 1e-8);
    CHECK(max_diff(e, u.transpose() * expm(conj, t) * u) <= 1e-8);
  }
  CHECK_THROWS_AS(reduction_4x4(tr.a, tr.h, tr.d, -1.0), DomainError);
}

TEST_CASE("permutation for scalar blocks") {
  const Matrix u = permutation_U(1, 1, 1, 1);
  Matrix expect = Matrix::Zero(4, 4);
  expect(0, 0) = expect(1, 2) = expect(2, 1) = expect(3, 3) = 1.0;
  CHECK(max_diff(u, expect) == 0.0);
  CHECK(max_diff(u * u.transpose(), Matrix::Identity(4, 4)) == 0.0);
}

TEST_CASE("uncoupled assembly is block diagonal with a product phase space") {
  const Mesh m = Mesh::make(1, 5);
  const DiscreteOperator lap = laplacian(m, Bc::dirichlet);
  const SquareRoot root = sqrt_neg_half(lap.matrix, lap.domain);
  const Factor f{"a", lap.matrix, root.kisynski, lap.domain};
  const Factor g{"b", 2.0 * lap.matrix, root.kisynski, lap.domain};
  const BlockSystem sys = assemble_full(f, g, Matrix::Zero(5, 5), Matrix::Zero(5, 5));
  CHECK(max_diff(sys.assembled, block_diagonal(lap.matrix, 2.0 * lap.matrix)) == 0.0);
  CHECK(max_diff(sys.phase.kisynski.weight(), block_diagonal(root.kisynski.weight(), root.kisynski.weight())) ==
        0.0);
  CHECK(max_diff(sys.phase.base.weight(), block_diagonal(lap.domain.weight(), lap.domain.weight())) == 0.0);
  for (const auto& [name, v] : sys.certificates) CHECK(v == 0.0);
  CHECK(sys.certificates.size() == 4);
  CHECK(sys.offset(1) == 5);
  CHECK(max_abs(sys.block(0, 1)) == 0.0);
}

TEST_CASE("CS2 conserves energy") {
  const BlockSystem sys = cs2_assemble(16, 1.0);
  CHECK(is_symmetric(sys.assembled));
  const Index n = sys.size();
  CHECK(n == 32);
  CHECK(symmetric_eigenvalues(sys.assembled).maxCoeff() < 0.0);

  // energy in the Kisyński norm of the coupled operator; equivalent to the product norm
  const SquareRoot root = sqrt_neg_half(sys.assembled, sys.phase.base);
  const double upper = op_norm(Matrix::Identity(n, n), sys.phase.kisynski, root.kisynski);
  const double lower = op_norm(Matrix::Identity(n, n), root.kisynski, sys.phase.kisynski);
  CHECK(std::isfinite(upper));
  CHECK(std::isfinite(lower));

  auto g = testing::rng(11);
  const Vector f0 = random_matrix(n, 1, g);
  const Vector g0 = random_matrix(n, 1, g);
  const CofPair pair(sys.assembled);
  Trajectory traj;
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    const CofSof cs = pair.at(t);
    traj.t.push_back(t);
    traj.u.push_back(cs.cos * f0 + cs.sin * g0);
    traj.v.push_back(sys.assembled * cs.sin * f0 + cs.cos * g0);
  }
  const std::vector<double> e = energy_trace(traj, root.kisynski, sys.phase.base);
  double drift = 0.0;
  for (double x : e) drift = std::max(drift, std::abs(x - e.front()) / e.front());
  CHECK(drift <= 1e-6);
  // the product-norm energy stays within the equivalence constants
  const std::vector<double> ep = energy_trace(traj, sys.phase.kisynski, sys.phase.base);
  const double k2 = std::max(upper, lower) * std::max(upper, lower);
  for (double x : ep) {
    CHECK(x <= k2 * e.front() * (1 + 1e-9));
    CHECK(x >= e.front() / k2 * (1 - 1e-9));
  }
}

TEST_CASE("strom assembly") {
  SUBCASE("zero couplings") {
    StromParams p;
    p.p1 = p.p2 = p.p3 = p.p4 = 0.0;
    const BlockSystem sys = strom_assemble(p);
    CHECK(sys.names == std::vector<std::string>{"velocity", "pressure", "density"});
    const Matrix a1 = sys.block(0, 0);
    CHECK(is_symmetric(a1));
    CHECK(symmetric_eigenvalues(a1).maxCoeff() <= 1e-9);
    CHECK(max_abs(sys.block(0, 1)) == 0.0);
    CHECK(max_abs(sys.block(2, 2)) == 0.0);
  }
  SUBCASE("μ2 = 0 reduces A1 to a vector Laplacian") {
    StromParams p;
    p.mu2 = 0.0;
    p.mu1 = 1.5;
    const BlockSystem sys = strom_assemble(p);
    CHECK(max_diff(sys.block(0, 0), 1.5 * vector_laplacian(Mesh::make(2, p.n)).matrix) <= 1e-12);
  }
  SUBCASE("couplings and certificates") {
    const StromParams p;
    const BlockSystem sys = strom_assemble(p);
    const Mesh mesh = Mesh::make(2, p.n);
    const GradDiv gd = grad_div(mesh);
    const GradDiv full = grad_div_full(mesh);
    CHECK(max_diff(sys.block(0, 1), gd.grad.matrix) == 0.0);
    CHECK(max_diff(sys.block(0, 2), full.grad.matrix) == 0.0);
    CHECK(max_diff(sys.block(2, 0), full.div.matrix) == 0.0);
    CHECK(sys.dims[2] == mesh.full_count());
    CHECK(max_abs(sys.block(1, 2)) == 0.0);
    CHECK(sys.certificates.size() == 8);
    CHECK(sys.certificates.count("step1:H:W->X") == 1);
    CHECK(sys.certificates.count("step2:K:V->Y") == 1);
    for (const auto& [name, v] : sys.certificates) {
      INFO(name);
      CHECK(std::isfinite(v));
      CHECK(v >= 0.0);
    }
  }
  SUBCASE("Robin pressure lives on full nodes") {
    StromParams p;
    p.bc2 = Bc::robin;
    const BlockSystem sys = strom_assemble(p);
    CHECK(sys.dims[1] == Mesh::make(2, p.n).full_count());
    CHECK(sys.dims[2] == sys.dims[1]);
  }
  SUBCASE("invalid parameters") {
    StromParams p;
    p.mu1 = p.mu2 = 0.0;
    CHECK_THROWS_AS(strom_assemble(p), DomainError);
    p = StromParams{};
    p.mu3 = 0.0;
    CHECK_THROWS_AS(strom_assemble(p), DomainError);
    p = StromParams{};
    p.n = 3;
    CHECK_THROWS_AS(strom_assemble(p), DomainError);
    p = StromParams{};
    p.bc2 = Bc::neumann;
    CHECK_THROWS_AS(strom_assemble(p), DomainError);
  }
}

TEST_CASE("bounded first factor uses its base space") {
  // A = [2] bounded, D the Dirichlet Laplacian: phase space (X × W) × (X × Y)
  const Mesh m = Mesh::make(1, 6);
  const DiscreteOperator d = laplacian(m, Bc::dirichlet);
  const SquareRoot rd = sqrt_neg_half(d.matrix, d.domain);
  const GradedSpace x = GradedSpace::euclidean(1, "X");
  const Factor fa{"a", scalar(2.0), x, x};
  const Factor fd{"d", d.matrix, rd.kisynski, d.domain};
  const Matrix h = Matrix::Constant(1, 6, m.h);
  const BlockSystem sys = assemble_full(fa, fd, h, Matrix::Zero(6, 1));
  CHECK(max_diff(sys.phase.kisynski.weight(), block_diagonal(x.weight(), rd.kisynski.weight())) == 0.0);
  CHECK(std::isfinite(sys.certificates.at("H:W->X")));
  // propagator still matches the triangular formula
  const CofSof p = triangular_propagator(scalar(2.0), h, d.matrix, 0.8);
  CHECK(max_diff(p.cos, cof_eval(sys.assembled, 0.8)) <= 1e-8);
}

TEST_CASE("propagator is independent of factor weights") {
  const Triple tr = random_triple(12, 3, 3);
  const GradedSpace e = GradedSpace::euclidean(3, "E");
  const GradedSpace s = GradedSpace::scaled_identity(3, 25.0, "S");
  const BlockSystem a = assemble_full({"a", tr.a, e, e}, {"d", tr.d, e, e}, tr.h, Matrix::Zero(3, 3));
  const BlockSystem b = assemble_full({"a", tr.a, e, s}, {"d", tr.d, e, s}, tr.h, Matrix::Zero(3, 3));
  CHECK(max_diff(a.assembled, b.assembled) == 0.0);
  CHECK(max_diff(cof_eval(a.assembled, 1.1), cof_eval(b.assembled, 1.1)) == 0.0);
  CHECK(a.certificates.at("H:W->X") != doctest::Approx(b.certificates.at("H:W->X")));
}

TEST_CASE("assembly argument errors") {
  const GradedSpace e2 = GradedSpace::euclidean(2, "E");
  const GradedSpace e3 = GradedSpace::euclidean(3, "E");
  const Factor f{"a", -Matrix::Identity(2, 2), e2, e2};
  const Factor g{"b", -Matrix::Identity(3, 3), e3, e3};
  CHECK_THROWS_AS(assemble_full(f, g, Matrix::Zero(3, 2), Matrix::Zero(3, 2)), DimensionError);
  CHECK_THROWS_AS(assemble_system({f, g}, {{{0, 0}, Matrix::Zero(2, 2)}}), DimensionError);
  CHECK_THROWS_AS(assemble_system({}, {}), DimensionError);
  const Factor bad{"c", -Matrix::Identity(2, 2), e3, e2};
  CHECK_THROWS_AS(assemble_system({bad}, {}), DimensionError);
}

TEST_CASE("MatrixMarket round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "cofmat_mm_test";
  fs::remove_all(dir);
  const BlockSystem sys = cs2_assemble(5, 0.25);
  const auto paths = io::save_block_system(dir, "cs2", sys);
  CHECK(paths.back().filename() == "cs2.json");
  CHECK(paths.size() == sys.blocks.size() + 1);
  const io::LoadedSystem back = io::load_block_system(paths.back());
  CHECK(back.names == sys.names);
  CHECK(back.dims == sys.dims);
  CHECK(max_diff(back.assembled, sys.assembled) == 0.0);

  // coordinate symmetric input
  io::write_file_atomic(dir / "sym.mtx",
                        "%%MatrixMarket matrix coordinate real symmetric\n% note\n3 3 3\n1 1 2\n2 1 -1\n3 3 4\n");
  const Matrix s = io::read_matrix_market(dir / "sym.mtx");
  CHECK(s(0, 1) == -1.0);
  CHECK(s(1, 0) == -1.0);
  CHECK(s(2, 2) == 4.0);
  io::write_file_atomic(dir / "bad.mtx", "%%MatrixMarket matrix array complex general\n1 1\n1\n");
  CHECK_THROWS_AS(io::read_matrix_market(dir / "bad.mtx"), DomainError);
  io::write_file_atomic(dir / "short.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n2\n");
  CHECK_THROWS_AS(io::read_matrix_market(dir / "short.mtx"), DomainError);

  CHECK(io::format_double(0.1) == "0.10000000000000001");
  CHECK(io::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(io::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove_all(dir);
}
