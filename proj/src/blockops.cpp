#include "cofmat/blockops.hpp"

#include "cofmat/error.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <limits>
#include <string>

namespace cofmat {

namespace {

void check_triangular(const Matrix& a, const Matrix& h, const Matrix& d, std::string_view what) {
  require_square(a, std::string(what) + ": A");
  require_square(d, std::string(what) + ": D");
  if (h.rows() != a.rows() || h.cols() != d.rows()) {
    throw DimensionError(std::string(what) + ": H must be " + std::to_string(a.rows()) + "x" +
                         std::to_string(d.rows()));
  }
}

}  // namespace

Matrix convolution_block(const Matrix& a, const Matrix& h, const Matrix& d, double t,
                         const QuadratureSpec& q) {
  return convolutions(a, h, d, t, q).cs;
}

CofSof triangular_propagator(const Matrix& a, const Matrix& h, const Matrix& d, double t,
                             const QuadratureSpec& q) {
  check_triangular(a, h, d, "triangular_propagator");
  const double tau = std::abs(t);
  const Index n = a.rows();
  const Index m = d.rows();
  const CofSof fa = cof_sof_eval(a, tau);
  const CofSof fd = cof_sof_eval(d, tau);
  const Convolutions conv = convolutions(a, h, d, tau, q);

  CofSof out{Matrix::Zero(n + m, n + m), Matrix::Zero(n + m, n + m)};
  out.cos.topLeftCorner(n, n) = fa.cos;
  out.cos.topRightCorner(n, m) = conv.cs;
  out.cos.bottomRightCorner(m, m) = fd.cos;
  out.sin.topLeftCorner(n, n) = fa.sin;
  out.sin.topRightCorner(n, m) = conv.ss;
  out.sin.bottomRightCorner(m, m) = fd.sin;
  if (t < 0.0) out.sin = -out.sin;
  return out;
}

Matrix reduction_4x4(const Matrix& a, const Matrix& h, const Matrix& d, double t,
                     const QuadratureSpec& q) {
  check_triangular(a, h, d, "reduction_4x4");
  if (!std::isfinite(t) || t < 0.0) throw DomainError("reduction_4x4: time must be nonnegative");
  const Index n = a.rows();
  const Index m = d.rows();
  const CofSof fa = cof_sof_eval(a, t);
  const CofSof fd = cof_sof_eval(d, t);
  const Convolutions conv = convolutions(a, h, d, t, q);

  // offsets of V, W, X, Y
  const Index ov = 0;
  const Index ow = n;
  const Index ox = n + m;
  const Index oy = 2 * n + m;
  Matrix e = Matrix::Zero(2 * (n + m), 2 * (n + m));
  e.block(ov, ov, n, n) = fa.cos;
  e.block(ov, ow, n, m) = conv.sc;
  e.block(ov, ox, n, n) = fa.sin;
  e.block(ov, oy, n, m) = conv.ss;

  e.block(ow, ow, m, m) = fd.cos;
  e.block(ow, oy, m, m) = fd.sin;

  e.block(ox, ov, n, n) = a * fa.sin;
  e.block(ox, ow, n, m) = conv.cc;
  e.block(ox, ox, n, n) = fa.cos;
  e.block(ox, oy, n, m) = conv.cs;

  e.block(oy, ow, m, m) = d * fd.sin;
  e.block(oy, oy, m, m) = fd.cos;
  return e;
}

Matrix permutation_U(Index nv, Index nw, Index nx, Index ny) {
  if (nv < 1 || nw < 1 || nx < 1 || ny < 1) {
    throw DimensionError("permutation_U: all block sizes must be >= 1");
  }
  const Index total = nv + nw + nx + ny;
  Matrix u = Matrix::Zero(total, total);
  const Index src[4] = {0, nv, nv + nw, nv + nw + nx};  // V, W, X, Y in source order
  const Index len[4] = {nv, nw, nx, ny};
  const int order[4] = {0, 2, 1, 3};                     // target order V, X, W, Y
  Index row = 0;
  for (int k : order) {
    for (Index i = 0; i < len[k]; ++i) u(row + i, src[k] + i) = 1.0;
    row += len[k];
  }
  return u;
}

Index BlockSystem::offset(int k) const {
  Index off = 0;
  for (int i = 0; i < k; ++i) off += dims[static_cast<std::size_t>(i)];
  return off;
}

Matrix BlockSystem::block(int r, int c) const {
  const auto it = blocks.find({r, c});
  if (it != blocks.end()) return it->second;
  return Matrix::Zero(dims[static_cast<std::size_t>(r)], dims[static_cast<std::size_t>(c)]);
}

namespace {

double certificate(const Matrix& op, const GradedSpace& from, const GradedSpace& to) {
  try {
    return op_norm(op, from, to);
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

double graph_certificate(const Matrix& op, const Matrix& gen, const GradedSpace& base,
                         const GradedSpace& to) {
  // σ_max(T L⁻ᵀ) with T = G_to^{1/2} op and L Lᵀ the graph weight
  try {
    const Eigen::SparseMatrix<double> sparse = gen.sparseView();
    const Matrix gb = base.weight();
    Matrix g = gb + sparse.transpose() * (gb * sparse);
    g = 0.5 * (g + g.transpose()).eval();
    const Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
    const Matrix t = to.apply_sqrt_left(op);
    return spectral_norm(Matrix(llt.matrixL().solve(t.transpose())));
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

BlockSystem assemble_system(const std::vector<Factor>& factors,
                            const std::map<std::pair<int, int>, Matrix>& couplings) {
  if (factors.empty()) throw DimensionError("assemble_system: no factors");
  BlockSystem sys;
  for (const auto& f : factors) {
    require_square(f.op, "assemble_system: " + f.name);
    if (f.v.dim() != f.op.rows() || f.x.dim() != f.op.rows()) {
      throw DimensionError("assemble_system: spaces of factor '" + f.name +
                           "' do not match its size");
    }
    sys.names.push_back(f.name);
    sys.dims.push_back(f.op.rows());
  }
  const int count = static_cast<int>(factors.size());
  for (const auto& [key, m] : couplings) {
    const auto [r, c] = key;
    if (r < 0 || c < 0 || r >= count || c >= count || r == c) {
      throw DimensionError("assemble_system: coupling (" + std::to_string(r) + ", " +
                           std::to_string(c) + ") is not an off-diagonal block");
    }
    if (m.rows() != sys.dims[static_cast<std::size_t>(r)] ||
        m.cols() != sys.dims[static_cast<std::size_t>(c)]) {
      throw DimensionError("assemble_system: coupling (" + std::to_string(r) + ", " +
                           std::to_string(c) + ") has the wrong shape");
    }
  }
  for (int k = 0; k < count; ++k) sys.blocks[{k, k}] = factors[static_cast<std::size_t>(k)].op;
  for (const auto& [key, m] : couplings) sys.blocks[key] = m;

  Matrix op = factors[0].op;
  GradedSpace v = factors[0].v;
  GradedSpace x = factors[0].x;
  for (int k = 1; k < count; ++k) {
    const Factor& f = factors[static_cast<std::size_t>(k)];
    const Index prev = op.rows();
    const Index dk = f.op.rows();
    Matrix h = Matrix::Zero(prev, dk);
    Matrix kk = Matrix::Zero(dk, prev);
    Index off = 0;
    for (int r = 0; r < k; ++r) {
      const Index dr = sys.dims[static_cast<std::size_t>(r)];
      if (auto it = couplings.find({r, k}); it != couplings.end()) h.middleRows(off, dr) = it->second;
      if (auto it = couplings.find({k, r}); it != couplings.end()) kk.middleCols(off, dr) = it->second;
      off += dr;
    }
    const std::string prefix = count == 2 ? "" : "step" + std::to_string(k) + ":";
    sys.certificates[prefix + "H:[D(D)]->V"] = graph_certificate(h, f.op, f.x, v);
    sys.certificates[prefix + "H:W->X"] = certificate(h, f.v, x);
    sys.certificates[prefix + "K:[D(A)]->W"] = graph_certificate(kk, op, x, f.v);
    sys.certificates[prefix + "K:V->Y"] = certificate(kk, v, f.x);

    Matrix next(prev + dk, prev + dk);
    next << op, h, kk, f.op;
    op = std::move(next);
    v = product(v, f.v, v.label() + "x" + f.v.label());
    x = product(x, f.x, x.label() + "x" + f.x.label());
  }
  sys.assembled = std::move(op);
  sys.phase = PhaseSpace{v, x};
  return sys;
}

BlockSystem assemble_full(const Factor& first, const Factor& second, const Matrix& h,
                          const Matrix& k) {
  return assemble_system({first, second}, {{{0, 1}, h}, {{1, 0}, k}});
}

BlockSystem strom_assemble(const StromParams& p) {
  if (p.n < 4) throw DomainError("strom_assemble: need n >= 4");
  if (!(p.mu1 >= 0.0) || !(p.mu2 >= 0.0) || (p.mu1 == 0.0 && p.mu2 == 0.0)) {
    throw DomainError("strom_assemble: μ1, μ2 must be nonnegative and not both zero");
  }
  if (!(p.mu3 > 0.0)) throw DomainError("strom_assemble: μ3 must be positive");
  if (p.bc2 != Bc::dirichlet && p.bc2 != Bc::robin) {
    throw DomainError("strom_assemble: bc2 must be dirichlet or robin");
  }
  for (double c : {p.mu1, p.mu2, p.mu3, p.p1, p.p2, p.p3, p.p4}) {
    if (!std::isfinite(c)) throw DomainError("strom_assemble: parameters must be finite");
  }
  const Mesh mesh = Mesh::make(2, p.n);
  const DiscreteOperator a1 = lame_operator(mesh, p.mu1, p.mu2);
  const bool dir = p.bc2 == Bc::dirichlet;
  const GradDiv gd = dir ? grad_div(mesh) : grad_div_full(mesh);
  const DiscreteOperator lap = laplacian(mesh, p.bc2);
  const Matrix a2 = p.mu3 * lap.matrix;
  const GradedSpace sl2 = dir ? interior_l2(mesh) : full_l2(mesh);
  const GradedSpace sh1 = dir ? interior_h1(mesh) : full_h1(mesh);
  // the density carries no boundary condition: full nodes, full H¹ weight
  const GradDiv gd3 = grad_div_full(mesh);
  const GradedSpace dh1 = full_h1(mesh);
  const Index nd = dh1.dim();

  std::vector<Factor> factors{
      Factor{"velocity", a1.matrix, face_h1(mesh), face_l2(mesh)},
      Factor{"pressure", a2, sh1, sl2},
      Factor{"density", Matrix::Zero(nd, nd), dh1, dh1},
  };
  std::map<std::pair<int, int>, Matrix> couplings{
      {{0, 1}, p.p1 * gd.grad.matrix},
      {{0, 2}, p.p2 * gd3.grad.matrix},
      {{1, 0}, p.p3 * gd.div.matrix},
      {{2, 0}, p.p4 * gd3.div.matrix},
  };
  return assemble_system(factors, couplings);
}

BlockSystem cs2_assemble(Index n, double eps) {
  const Mesh mesh = Mesh::make(1, n);
  const DiscreteOperator lap = laplacian(mesh, Bc::dirichlet);
  const SquareRoot root = sqrt_neg_half(lap.matrix, lap.domain);
  const Factor f{"u", lap.matrix, root.kisynski, lap.domain};
  Factor g = f;
  g.name = "v";
  const Matrix c = eps * Matrix::Identity(n, n);
  return assemble_full(f, g, c, c);
}

}  // namespace cofmat
