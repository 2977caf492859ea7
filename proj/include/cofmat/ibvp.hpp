#pragma once

// Second-order problems with dynamic boundary conditions
//
//   ü = A u,   L u = w,   ẅ = B u + B̃ w
//
// realized on extended grids. A state of the coupled problem is (x, w) with x
// the interior values; the full grid function is E₀x + U w where
// [E₀ U] = [R; L]⁻¹ and R restricts to interior nodes.

#include "cofmat/diagnostics.hpp"
#include "cofmat/discrete.hpp"
#include "cofmat/funcalc.hpp"
#include "cofmat/graded_space.hpp"

#include <optional>

namespace cofmat {

struct BoundaryTriple {
  Matrix amax;  ///< interior rows × extended nodes
  Matrix l;     ///< boundary operator, boundary × extended nodes
  Matrix r;     ///< restriction to interior nodes
  Matrix e0;    ///< zero-trace extension, extended × interior
  Matrix lift;  ///< U with R U = 0 and L U = I
  Matrix a0;    ///< amax · e0, the part of A in ker L
  GradedSpace x;      ///< interior L²
  GradedSpace dx;     ///< boundary L²
  GradedSpace y;      ///< H¹ on extended nodes
  GradedSpace dy;     ///< boundary H¹ (equals dx on a 0-dimensional boundary)
  GradedSpace graph;  ///< [D(A)_L] on extended nodes

  Index interior() const { return amax.rows(); }
  Index boundary() const { return l.rows(); }
  Index extended() const { return amax.cols(); }
};

/// Validates shapes, surjectivity of L and invertibility of [R; L], then
/// derives e0, lift, a0 and the graph-norm space.
BoundaryTriple make_triple(Matrix amax, Matrix l, Matrix r, GradedSpace x, GradedSpace dx,
                           GradedSpace y, GradedSpace dy);

/// Resolvent-set check for A0 − λ: throws ResolventError naming the nearest
/// eigenvalue when the condition number exceeds 1e10.
void require_resolvent(const BoundaryTriple& triple, double lambda);

/// Extended-grid Dirichlet solution operator: (Amax − λR) U_λ = 0, L U_λ = I.
Matrix dirichlet_solution(const BoundaryTriple& triple, double lambda);

/// D_λ = R U_λ, the interior values of the Dirichlet solution.
Matrix dirichlet_op(const BoundaryTriple& triple, double lambda);

/// Smallest nonnegative real at distance ≥ 0.5 from spec(A0).
double default_lambda(const BoundaryTriple& triple);

struct CoupledMatrix {
  Matrix atil;    ///< λ + M_λ⁻¹ 𝒜_λ M_λ on X × ∂X
  Matrix b;       ///< boundary feedback on extended nodes
  Matrix btil;    ///< boundary operator B̃
  double lambda = 0.0;
  Matrix mlam;    ///< [[I, −D_λ], [0, I]]
  Matrix alam;    ///< 𝒜_λ on the diagonal domain
  Matrix dlam;    ///< D_λ
  Matrix ulam;    ///< U_λ on extended nodes
  GradedSpace space;  ///< X × ∂X
};

CoupledMatrix assemble_coupled(const BoundaryTriple& triple, const Matrix& b, const Matrix& btil,
                               double lambda);

/// The coupled-domain matrix from its definition, without similarity:
/// [[Amax E₀, Amax U], [B E₀, B U + B̃]].
Matrix coupled_direct(const BoundaryTriple& triple, const Matrix& b, const Matrix& btil);

/// ‖M_λ(𝒜̃ − λ) − 𝒜_λ M_λ‖ (max entry).
double similarity_residual(const CoupledMatrix& cm);

struct DynamicBcRun {
  Trajectory traj;              ///< state (x, w) and velocity (ẋ, ẇ)
  std::vector<double> coupling; ///< ‖L ũ(t) − w(t)‖ / ‖state(t)‖ per sample
  double max_coupling = 0.0;
  bool coupling_ok = true;
};

/// Propagates 𝔲(t) = C(t,𝒜̃)𝔣 + S(t,𝒜̃)𝔤 through the similarity: families of
/// λ + 𝒜_λ on the diagonal domain mapped back by M_λ⁻¹. The grid function is
/// rebuilt as E₀v + U_λw from the diagonal-domain state (v, w).
DynamicBcRun simulate_dynamic_bc(const BoundaryTriple& triple, const CoupledMatrix& cm,
                                 const Vector& f, const Vector& g, const Vector& h,
                                 const Vector& j, double t_end, int samples,
                                 double tol = 1e-8);

/// The same trajectory from exp(t [[0, I], [𝒜̃_direct, 0]]).
Trajectory simulate_reduction_oracle(const Matrix& atil, const Vector& f, const Vector& g,
                                     const Vector& h, const Vector& j, double t_end, int samples);

struct Cenn2Params {
  int dim = 1;
  Index n = 16;
  double beta = -1.0;
  std::optional<Matrix> btil;  ///< default: 0 in 1D, boundary loop Laplacian in 2D
};

struct Cenn2 {
  Mesh mesh;
  BoundaryTriple triple;
  Matrix b;
  Matrix btil;
};

/// Wave equation with Neumann trace coupled to a dynamic boundary, B = β · trace.
Cenn2 cenn2_instance(const Cenn2Params& p);

struct BoundaryNorms {
  double y_to_dx = 0.0;      ///< B from H¹ to ∂X
  double da0_to_dy = 0.0;    ///< B E₀ from [D(A0)] to ∂Y
};

BoundaryNorms boundary_operator_norms(const BoundaryTriple& triple, const Matrix& b);

}  // namespace cofmat
