#include "cofmat/ibvp.hpp"

#include "cofmat/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cofmat {

namespace {

constexpr double kMaxResolventCondition = 1e10;

Matrix stacked(const Matrix& top, const Matrix& bottom) {
  Matrix m(top.rows() + bottom.rows(), top.cols());
  m << top, bottom;
  return m;
}

}  // namespace

BoundaryTriple make_triple(Matrix amax, Matrix l, Matrix r, GradedSpace x, GradedSpace dx,
                           GradedSpace y, GradedSpace dy) {
  const Index ni = amax.rows();
  const Index ne = amax.cols();
  const Index nb = l.rows();
  if (l.cols() != ne || r.cols() != ne || r.rows() != ni || ni + nb != ne) {
    throw DimensionError("make_triple: need Amax, R of size p x N and L of size (N-p) x N");
  }
  if (x.dim() != ni || dx.dim() != nb || y.dim() != ne || dy.dim() != nb) {
    throw DimensionError("make_triple: space dimensions do not match the operators");
  }
  Eigen::FullPivLU<Matrix> lu_l(l);
  if (lu_l.rank() != nb) throw SpectralError("make_triple: L is not surjective");
  Eigen::FullPivLU<Matrix> lu(stacked(r, l));
  if (!lu.isInvertible()) throw SpectralError("make_triple: [R; L] is singular");

  BoundaryTriple t;
  const Matrix inv = lu.inverse();
  t.e0 = inv.leftCols(ni);
  t.lift = inv.rightCols(nb);
  t.a0 = amax * t.e0;
  const Matrix xw = x.weight();
  Matrix g = r.transpose() * xw * r + amax.transpose() * xw * amax +
             l.transpose() * dx.weight() * l;
  t.graph = GradedSpace(0.5 * (g + g.transpose()), "graph");
  t.amax = std::move(amax);
  t.l = std::move(l);
  t.r = std::move(r);
  t.x = std::move(x);
  t.dx = std::move(dx);
  t.y = std::move(y);
  t.dy = std::move(dy);
  return t;
}

void require_resolvent(const BoundaryTriple& triple, double lambda) {
  const Index ni = triple.interior();
  const Matrix shifted = triple.a0 - lambda * Matrix::Identity(ni, ni);
  const double cond = condition_number(shifted);
  if (std::isfinite(cond) && cond <= kMaxResolventCondition) return;
  const CVector ev = eigenvalues(triple.a0);
  Complex nearest = ev(0);
  for (Index k = 1; k < ev.size(); ++k)
    if (std::abs(ev(k) - lambda) < std::abs(nearest - lambda)) nearest = ev(k);
  throw ResolventError("λ = " + std::to_string(lambda) +
                           " is in (or too close to) the spectrum of A0; nearest eigenvalue " +
                           std::to_string(nearest.real()) + (nearest.imag() < 0 ? " - " : " + ") +
                           std::to_string(std::abs(nearest.imag())) + "i",
                       nearest.real(), nearest.imag());
}

Matrix dirichlet_solution(const BoundaryTriple& triple, double lambda) {
  require_resolvent(triple, lambda);
  const Index ni = triple.interior();
  const Index nb = triple.boundary();
  const Matrix lhs = stacked(triple.amax - lambda * triple.r, triple.l);
  Matrix rhs = Matrix::Zero(ni + nb, nb);
  rhs.bottomRows(nb).setIdentity();
  return lhs.fullPivLu().solve(rhs);
}

Matrix dirichlet_op(const BoundaryTriple& triple, double lambda) {
  return triple.r * dirichlet_solution(triple, lambda);
}

double default_lambda(const BoundaryTriple& triple) {
  constexpr double gap = 0.5;
  const CVector ev = eigenvalues(triple.a0);
  std::vector<double> candidates{0.0};
  for (Index k = 0; k < ev.size(); ++k) {
    const double im2 = ev(k).imag() * ev(k).imag();
    if (im2 > gap * gap) continue;
    const double half = std::sqrt(gap * gap - im2);
    for (double c : {ev(k).real() - half, ev(k).real() + half})
      if (c >= 0.0) candidates.push_back(c);
  }
  std::sort(candidates.begin(), candidates.end());
  for (double c : candidates) {
    double dist = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < ev.size(); ++k) dist = std::min(dist, std::abs(ev(k) - c));
    if (dist >= gap * (1.0 - 1e-9)) return c;
  }
  throw SpectralError("default_lambda: no admissible shift found");
}

CoupledMatrix assemble_coupled(const BoundaryTriple& triple, const Matrix& b, const Matrix& btil,
                               double lambda) {
  const Index ni = triple.interior();
  const Index nb = triple.boundary();
  if (b.rows() != nb || b.cols() != triple.extended()) {
    throw DimensionError("assemble_coupled: B must map extended nodes to the boundary");
  }
  if (btil.rows() != nb || btil.cols() != nb) {
    throw DimensionError("assemble_coupled: B̃ must be square on the boundary space");
  }
  CoupledMatrix cm;
  cm.b = b;
  cm.btil = btil;
  cm.lambda = lambda;
  cm.ulam = dirichlet_solution(triple, lambda);
  cm.dlam = triple.r * cm.ulam;

  const Matrix ib = Matrix::Identity(nb, nb);
  const Matrix ii = Matrix::Identity(ni, ni);
  const Matrix be0 = b * triple.e0;
  const Matrix corner = btil + b * cm.ulam - lambda * ib;
  cm.alam.resize(ni + nb, ni + nb);
  cm.alam << triple.a0 - cm.dlam * be0 - lambda * ii, -cm.dlam * corner, be0, corner;

  cm.mlam = Matrix::Identity(ni + nb, ni + nb);
  cm.mlam.topRightCorner(ni, nb) = -cm.dlam;
  Matrix minv = Matrix::Identity(ni + nb, ni + nb);
  minv.topRightCorner(ni, nb) = cm.dlam;
  cm.atil = lambda * Matrix::Identity(ni + nb, ni + nb) + minv * cm.alam * cm.mlam;
  cm.space = product(triple.x, triple.dx, "XxdX");
  return cm;
}

Matrix coupled_direct(const BoundaryTriple& triple, const Matrix& b, const Matrix& btil) {
  const Index ni = triple.interior();
  const Index nb = triple.boundary();
  if (b.rows() != nb || b.cols() != triple.extended() || btil.rows() != nb ||
      btil.cols() != nb) {
    throw DimensionError("coupled_direct: B or B̃ has the wrong shape");
  }
  Matrix m(ni + nb, ni + nb);
  m << triple.amax * triple.e0, triple.amax * triple.lift, b * triple.e0,
      b * triple.lift + btil;
  return m;
}

double similarity_residual(const CoupledMatrix& cm) {
  const Index k = cm.atil.rows();
  const Matrix lhs = cm.mlam * (cm.atil - cm.lambda * Matrix::Identity(k, k));
  return (lhs - cm.alam * cm.mlam).cwiseAbs().maxCoeff();
}

namespace {

Vector join(const Vector& a, const Vector& b) {
  Vector v(a.size() + b.size());
  v << a, b;
  return v;
}

std::vector<double> sample_times(double t_end, int samples) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("simulate: T must be positive");
  if (samples < 1) throw DomainError("simulate: need at least one sample");
  std::vector<double> ts;
  for (int k = 0; k <= samples; ++k) ts.push_back(t_end * k / samples);
  return ts;
}

void check_initial(Index ni, Index nb, const Vector& f, const Vector& g, const Vector& h,
                   const Vector& j) {
  if (f.size() != ni || g.size() != ni || h.size() != nb || j.size() != nb) {
    throw DimensionError("simulate: initial data must match X (" + std::to_string(ni) +
                         ") and the boundary space (" + std::to_string(nb) + ")");
  }
}

}  // namespace

DynamicBcRun simulate_dynamic_bc(const BoundaryTriple& triple, const CoupledMatrix& cm,
                                 const Vector& f, const Vector& g, const Vector& h,
                                 const Vector& j, double t_end, int samples, double tol) {
  const Index ni = triple.interior();
  const Index nb = triple.boundary();
  check_initial(ni, nb, f, g, h, j);
  const Index k = ni + nb;
  const Matrix gen = cm.lambda * Matrix::Identity(k, k) + cm.alam;
  Matrix minv = Matrix::Identity(k, k);
  minv.topRightCorner(ni, nb) = cm.dlam;
  const Vector pf = cm.mlam * join(f, h);
  const Vector pg = cm.mlam * join(g, j);

  DynamicBcRun run;
  for (double t : sample_times(t_end, samples)) {
    const CofSof cs = cof_sof_eval(gen, t);
    const Vector diag_state = cs.cos * pf + cs.sin * pg;
    const Vector diag_vel = gen * (cs.sin * pf) + cs.cos * pg;
    const Vector state = minv * diag_state;
    const Vector vel = minv * diag_vel;

    const Vector w = state.tail(nb);
    const Vector grid = triple.e0 * diag_state.head(ni) + cm.ulam * w;
    const double scale =
        std::sqrt(cm.space.norm_squared(state) + cm.space.norm_squared(vel));
    const double resid = triple.dx.norm(triple.l * grid - w);
    const double rel = scale > 0.0 ? resid / scale : resid;
    run.traj.t.push_back(t);
    run.traj.u.push_back(state);
    run.traj.v.push_back(vel);
    run.coupling.push_back(rel);
    run.max_coupling = std::max(run.max_coupling, rel);
  }
  run.coupling_ok = run.max_coupling <= tol;
  return run;
}

Trajectory simulate_reduction_oracle(const Matrix& atil, const Vector& f, const Vector& g,
                                     const Vector& h, const Vector& j, double t_end,
                                     int samples) {
  require_square(atil, "simulate_reduction_oracle");
  const Index k = atil.rows();
  const Index nb = h.size();
  check_initial(k - nb, nb, f, g, h, j);
  const Matrix red = reduction_matrix(atil);
  const Vector z0 = join(join(f, h), join(g, j));
  Trajectory traj;
  for (double t : sample_times(t_end, samples)) {
    const Vector z = expm(red, t) * z0;
    traj.t.push_back(t);
    traj.u.push_back(z.head(k));
    traj.v.push_back(z.tail(k));
  }
  return traj;
}

Cenn2 cenn2_instance(const Cenn2Params& p) {
  const Mesh mesh = Mesh::make(p.dim, p.n);
  const Traces tr = traces(mesh);
  BoundaryTriple triple =
      make_triple(maximal_laplacian(mesh), tr.neumann.matrix, interior_restriction(mesh),
                  interior_l2(mesh), boundary_l2(mesh), extended_h1(mesh),
                  p.dim == 1 ? boundary_l2(mesh)
                             : GradedSpace(mesh.h * (Matrix::Identity(mesh.boundary_count(),
                                                                      mesh.boundary_count()) -
                                                     boundary_loop_laplacian(mesh)),
                                           "H1bdry"));
  const Index nb = mesh.boundary_count();
  Matrix btil;
  if (p.btil) {
    btil = *p.btil;
    if (btil.rows() != nb || btil.cols() != nb) {
      throw DimensionError("cenn2: B̃ must be " + std::to_string(nb) + "x" + std::to_string(nb));
    }
    if (!is_symmetric(btil)) throw SpectralError("cenn2: B̃ must be symmetric");
    if (symmetric_eigenvalues(btil).maxCoeff() > 1e-12 * std::max(1.0, btil.cwiseAbs().maxCoeff())) {
      throw SpectralError("cenn2: B̃ must be negative semidefinite");
    }
  } else {
    btil = p.dim == 1 ? Matrix::Zero(nb, nb) : boundary_loop_laplacian(mesh);
  }
  if (!std::isfinite(p.beta)) throw DomainError("cenn2: β must be finite");
  Matrix b = p.beta * tr.dirichlet.matrix;
  return Cenn2{mesh, std::move(triple), std::move(b), std::move(btil)};
}

BoundaryNorms boundary_operator_norms(const BoundaryTriple& triple, const Matrix& b) {
  BoundaryNorms out;
  out.y_to_dx = op_norm(b, triple.y, triple.dx);
  out.da0_to_dy = op_norm(b * triple.e0, graph_space(triple.a0, triple.x, triple.x), triple.dy);
  return out;
}

}  // namespace cofmat
