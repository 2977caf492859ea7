#pragma once

#include "cofmat/diagnostics.hpp"
#include "cofmat/graded_space.hpp"
#include "cofmat/linalg.hpp"

#include <optional>
#include <vector>

namespace cofmat {

/// ü = A u + C u̇ with its reduction matrix [[0, I], [A, C]].
struct CompleteProblem {
  Matrix a;
  Matrix c;
  GradedSpace v;
  GradedSpace x;
  Matrix reduction;
  double a_norm = 0.0;  ///< op_norm(A, V → X)

  GradedSpace phase() const { return product(v, x, "VxX"); }
};

CompleteProblem reduction_complete(const Matrix& a, const Matrix& c, const GradedSpace& v,
                                   const GradedSpace& x);

/// A = Dirichlet Laplacian, C = −A² on a 1D or 2D mesh; V is the Kisyński
/// space of C over the discrete L².
CompleteProblem compl_instance(int dim, Index n);

struct DampedRun {
  Trajectory traj;
  std::vector<double> state_norms;  ///< ‖(u, u̇)‖ in V × X
  double residual = 0.0;            ///< max relative residual of ü = Au + Cu̇ by central differences
};

/// (u, u̇)(t) = exp(t 𝒜)(f, g) at samples+1 equally spaced times; the
/// residual uses a central difference of u̇ with step `fd_step` at t > 0.
DampedRun overdamped_simulate(const CompleteProblem& p, const Vector& f, const Vector& g,
                              double t_end, int samples, double fd_step = 1e-4);

/// ½(‖(−A)^{1/2} u‖²_X + ‖u̇‖²_X) per sample. A must be symmetric negative definite.
std::vector<double> damped_energy(const CompleteProblem& p, const Trajectory& traj);

struct SectorSample {
  double theta = 0.0;
  double r = 0.0;
  double value = 0.0;  ///< ‖(λ − M)⁻¹‖ |λ − ω|; +∞ on a hit
  bool hit = false;
  bool in_sector = false;
  bool pass = false;
};

struct SectorTable {
  std::vector<SectorSample> rows;
  double max_value = 0.0;  ///< over in-sector rows
  bool pass = false;
};

inline constexpr double kSectorBound = 1e3;
inline constexpr double kSectorMargin = 0.1;

/// Default probe angles: a uniform grid on |θ| ≤ π − 0.1 with ±π/2 and 0.
std::vector<double> default_sector_angles();
/// Default radii: logarithmic from 1e-3 to 1e6, including 1.
std::vector<double> default_sector_radii();

/// Samples λ = ω + r e^{iθ} on angles × radii, plus the rays and radii that
/// pass through every eigenvalue of M inside the sector. Norms are taken in
/// `space` when given, Euclidean otherwise.
SectorTable sector_probe(const Matrix& m, double omega, const std::vector<double>& angles,
                         const std::vector<double>& radii,
                         const std::optional<GradedSpace>& space = std::nullopt);

/// max over eigenvalues of the angle between λ and the negative real axis;
/// π for eigenvalues on the closed right half-line.
double spectral_half_angle(const CVector& eigs);

}  // namespace cofmat
