#pragma once

#include "cofmat/funcalc.hpp"
#include "cofmat/linalg.hpp"

#include <vector>

namespace cofmat {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss–Legendre rule on [-1, 1].
GaussRule gauss_legendre(int n);

struct QuadratureSpec {
  int nodes_per_panel = 8;
  double max_panel_width = 0.1;
  bool estimate_error = false;  ///< repeat with halved panels and report the difference
};

/// Panel count for [0, t]: width at most min(max_panel_width, t/4).
int panel_count(double t, const QuadratureSpec& q);

/// The four convolutions ∫₀ᵗ F(t−s, A) H G(s, D) ds with F, G ∈ {C, S}.
struct Convolutions {
  Matrix cs;  // ∫ C(t−s,A) H S(s,D) ds
  Matrix ss;  // ∫ S(t−s,A) H S(s,D) ds
  Matrix sc;  // ∫ S(t−s,A) H C(s,D) ds
  Matrix cc;  // ∫ C(t−s,A) H C(s,D) ds
  double error_estimate = 0.0;  // max-entry change under panel halving, 0 if not requested
};

Convolutions convolutions(const Matrix& a, const Matrix& h, const Matrix& d, double t,
                          const QuadratureSpec& q = {}, CofMethod method = CofMethod::series);

}  // namespace cofmat
