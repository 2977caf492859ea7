#pragma once

// Finite-difference model operators on the unit interval and unit square.
//
// Node layouts:
//   interior  n^d nodes, x-index major (node (i, j) at i*n + j)
//   full      (n+2)^d nodes including the boundary, same ordering
//   extended  interior nodes first, then the boundary nodes; in 2D the four
//             corners are left out and the boundary is walked counterclockwise
//             starting at (1, 0)
//   faces     staggered velocity unknowns: x-faces ((n+1) x n) then y-faces
//             (n x (n+1)); in 1D the n+1 cell midpoints

#include "cofmat/graded_space.hpp"
#include "cofmat/linalg.hpp"

#include <string_view>

namespace cofmat {

struct Mesh {
  int dim = 1;
  Index n = 2;  ///< interior points per axis
  double h = 1.0 / 3.0;

  /// Throws DomainError unless dim ∈ {1, 2} and n ≥ 2.
  static Mesh make(int dim, Index n);

  Index interior_count() const;
  Index full_count() const;
  Index boundary_count() const;  ///< 2 in 1D, 4n in 2D
  Index extended_count() const { return interior_count() + boundary_count(); }
  Index face_count() const;
  /// h^d, the cell volume used by the discrete L² pairing.
  double cell() const;
};

enum class Bc { dirichlet, neumann, robin, hinged, none };

std::string_view to_string(Bc bc);
Bc parse_bc(std::string_view s);

struct DiscreteOperator {
  Matrix matrix;
  GradedSpace domain;
  GradedSpace codomain;
  Bc bc = Bc::none;
};

/// Discrete L² on interior nodes, h^d I.
GradedSpace interior_l2(const Mesh& mesh);
/// Discrete L² on full nodes with trapezoid weights.
GradedSpace full_l2(const Mesh& mesh);
/// Discrete L² on faces, h^d I.
GradedSpace face_l2(const Mesh& mesh);
/// Boundary L², h^{d-1} I on the boundary nodes of the extended layout.
GradedSpace boundary_l2(const Mesh& mesh);
/// Discrete H¹ on interior nodes: h^d (I − Δ_D).
GradedSpace interior_h1(const Mesh& mesh);
/// Discrete H¹ on full nodes: trapezoid mass plus nearest-neighbour stiffness.
GradedSpace full_h1(const Mesh& mesh);
/// Discrete H¹ on extended nodes: the full-node weight with corners dropped.
GradedSpace extended_h1(const Mesh& mesh);
/// Discrete H¹ on faces: h^d (I − Δ_vec).
GradedSpace face_h1(const Mesh& mesh);

/// 3-point / 5-point Laplacian scaled by 1/h². Dirichlet acts on interior
/// nodes; Neumann and Robin act on full nodes using ghost reflection and are
/// self-adjoint in full_l2. Robin reads ∂u/∂ν + αu = 0.
DiscreteOperator laplacian(const Mesh& mesh, Bc bc, double robin_alpha = 1.0);

struct GradDiv {
  DiscreteOperator grad;  ///< interior scalars → faces, forward differences
  DiscreteOperator div;   ///< faces → interior scalars, −gradᵀ
};

GradDiv grad_div(const Mesh& mesh);

/// Gradient from full scalar nodes to faces and its full_l2 adjoint divergence.
GradDiv grad_div_full(const Mesh& mesh);

/// Componentwise Dirichlet Laplacian on faces.
DiscreteOperator vector_laplacian(const Mesh& mesh);

/// μ1 Δ_vec + μ2 grad div on faces (2D only).
DiscreteOperator lame_operator(const Mesh& mesh, double mu1, double mu2);

/// −(Dirichlet Laplacian)².
DiscreteOperator bilaplacian_hinged(const Mesh& mesh);

struct Traces {
  DiscreteOperator dirichlet;  ///< boundary values
  DiscreteOperator neumann;    ///< second-order one-sided outward normal derivative
};

Traces traces(const Mesh& mesh);

/// Laplacian stencil on interior rows acting on extended nodes.
Matrix maximal_laplacian(const Mesh& mesh);
/// [I 0]: extended nodes → interior nodes.
Matrix interior_restriction(const Mesh& mesh);
/// Periodic second difference along the 2D boundary loop (spacing h).
Matrix boundary_loop_laplacian(const Mesh& mesh);

/// Coordinates of interior nodes (row k: node k), full nodes and extended nodes.
Matrix interior_coordinates(const Mesh& mesh);
Matrix full_coordinates(const Mesh& mesh);
Matrix extended_coordinates(const Mesh& mesh);

}  // namespace cofmat
