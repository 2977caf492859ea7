#pragma once

#include "cofmat/funcalc.hpp"
#include "cofmat/graded_space.hpp"
#include "cofmat/linalg.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cofmat {

/// Sampled (u, u̇) along a second-order trajectory.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vector> u;
  std::vector<Vector> v;

  std::size_t size() const { return t.size(); }
};

/// Enclosing parabola Re λ ≤ ω − c (Im λ)².
///
/// For a purely real spectrum ω is the spectral abscissa and c is +∞ (any
/// curvature encloses). Otherwise the vertex is placed `vertex_gap` to the
/// right of the abscissa and c is the largest curvature that still encloses
/// every eigenvalue, min (ω − Re λ)/(Im λ)² over the non-real ones.
struct ParabolaFit {
  double omega = 0.0;
  double c = 0.0;
  double margin = 0.0;  ///< max over λ of Re λ − ω + c (Im λ)²
  bool real_spectrum = false;
  bool pass = false;
  std::vector<Complex> eigenvalues;
};

inline constexpr double kParabolaGap = 1.0;

ParabolaFit parabola_fit(const std::vector<Complex>& eigs, double vertex_gap = kParabolaGap);
ParabolaFit parabola_fit(const CVector& eigs, double vertex_gap = kParabolaGap);

/// E(t) = ½(‖u̇‖²_X + ‖u‖²_V) per sample.
std::vector<double> energy_trace(const Trajectory& traj, const GradedSpace& v,
                                 const GradedSpace& x);

struct MeshOperator {
  Matrix op;
  GradedSpace from;
  GradedSpace to;
};

struct RefinementTable {
  std::vector<Index> meshes;
  std::vector<double> h;
  std::vector<double> norms;
  double ratio = 1.0;  ///< max/min norm
  bool uniform = true;
  double rate = 0.0;   ///< least-squares p in norm ~ h^p
  /// "uniform" when max/min ≤ kUniformRatio and p > kGrowthRate.
  std::string verdict() const { return uniform ? "uniform" : "growing"; }
};

inline constexpr double kUniformRatio = 10.0;
/// Fitted exponents p ≤ this in norm ~ h^p also count as growth.
inline constexpr double kGrowthRate = -0.5;

/// op_norm per mesh; h = 1/(n+1).
RefinementTable refinement_probe(const std::function<MeshOperator(Index)>& builder,
                                 const std::vector<Index>& meshes);

/// max over the grid of ‖C(t+s) + C(t−s) − 2C(t)C(s)‖ (max entry).
double functional_equation_residual(const Matrix& a, const std::vector<double>& ts,
                                    const std::vector<double>& ss,
                                    CofMethod method = CofMethod::series);

struct CompactnessProfile {
  std::vector<double> singular_values;  ///< descending
  double decay = 1.0;                   ///< σ_min / σ_max
  bool decaying = false;                ///< decay ≤ 0.1
  double slope = 0.0;                   ///< least-squares p in σ_k ~ k^p
};

/// Singular values of (λ − M)⁻¹. Throws ResolventError if λ − M is singular.
CompactnessProfile compactness_proxy(const Matrix& m, double lambda);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cofmat
