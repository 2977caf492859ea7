#pragma once

#include "cofmat/discrete.hpp"
#include "cofmat/funcalc.hpp"
#include "cofmat/graded_space.hpp"
#include "cofmat/quadrature.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cofmat {

/// ∫₀ᵗ C(t−s,A) H S(s,D) ds. Throws DomainError for t < 0.
Matrix convolution_block(const Matrix& a, const Matrix& h, const Matrix& d, double t,
                         const QuadratureSpec& q = {});

/// C(t,𝒜) and S(t,𝒜) for 𝒜 = [[A, H], [0, D]] assembled from the diagonal
/// families and the convolution blocks. Valid for any real t.
CofSof triangular_propagator(const Matrix& a, const Matrix& h, const Matrix& d, double t,
                             const QuadratureSpec& q = {});

/// The semigroup generated by the reduction of 𝒜 = [[A, H], [0, D]] written in
/// the phase-space order (V, W, X, Y), block by block. Requires t ≥ 0.
Matrix reduction_4x4(const Matrix& a, const Matrix& h, const Matrix& d, double t,
                     const QuadratureSpec& q = {});

/// 0/1 matrix taking (V, W, X, Y)-ordered vectors to (V, X, W, Y) order.
Matrix permutation_U(Index nv, Index nw, Index nx, Index ny);

struct PhaseSpace {
  GradedSpace kisynski;  ///< V × W
  GradedSpace base;      ///< X × Y
};

struct Factor {
  std::string name;
  Matrix op;     ///< diagonal entry
  GradedSpace v;  ///< Kisyński space
  GradedSpace x;  ///< base space
};

struct BlockSystem {
  std::vector<std::string> names;
  std::vector<Index> dims;
  std::map<std::pair<int, int>, Matrix> blocks;  ///< nonzero blocks only
  Matrix assembled;
  PhaseSpace phase;
  /// Boundedness certificates by name; NaN when a norm could not be formed.
  std::map<std::string, double> certificates;

  Index size() const { return assembled.rows(); }
  Index offset(int k) const;
  /// Block (r, c), zero if absent.
  Matrix block(int r, int c) const;
};

/// 𝒜 = [[A, H], [K, D]] on (X × Y) with certificates
///   "H:[D(D)]->V", "H:W->X", "K:[D(A)]->W", "K:V->Y".
BlockSystem assemble_full(const Factor& first, const Factor& second, const Matrix& h,
                          const Matrix& k);

/// n × n system from diagonal factors and off-diagonal couplings keyed (row, col),
/// assembled by recursive 2 × 2 blocking in declaration order.
BlockSystem assemble_system(const std::vector<Factor>& factors,
                            const std::map<std::pair<int, int>, Matrix>& couplings);

struct StromParams {
  Index n = 8;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double mu3 = 2.0;
  double p1 = 1.0;
  double p2 = 1.0;
  double p3 = 1.0;
  double p4 = 1.0;
  Bc bc2 = Bc::dirichlet;
};

/// Three-field system [[A₁, p1 grad, p2 grad], [p3 div, A₂, 0], [p4 div, 0, 0]]
/// on a staggered 2D grid, A₁ the Lamé operator and A₂ = μ3 Δ.
BlockSystem strom_assemble(const StromParams& p);

/// CS₂: two copies of the 1D Dirichlet Laplacian coupled by ε I in both
/// off-diagonal blocks.
BlockSystem cs2_assemble(Index n, double eps);

}  // namespace cofmat
