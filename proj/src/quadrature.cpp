#include "cofmat/quadrature.hpp"

#include "cofmat/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace cofmat {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  if (n == 1) return {x, 1.0};
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

GaussRule gauss_legendre(int n) {
  if (n < 1 || n > 200) throw DomainError("gauss_legendre: need 1 <= n <= 200");
  GaussRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -x;
    rule.nodes[hi] = x;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

int panel_count(double t, const QuadratureSpec& q) {
  if (!(q.max_panel_width > 0.0)) throw DomainError("quadrature: panel width must be positive");
  if (t <= 0.0) return 0;
  const double width = std::min(q.max_panel_width, t / 4.0);
  return std::max(4, static_cast<int>(std::ceil(t / width - 1e-12)));
}

namespace {

Convolutions integrate(const Matrix& a, const Matrix& h, const Matrix& d, double t, int panels,
                       const GaussRule& rule, CofMethod method) {
  Convolutions out{Matrix::Zero(h.rows(), h.cols()), Matrix::Zero(h.rows(), h.cols()),
                   Matrix::Zero(h.rows(), h.cols()), Matrix::Zero(h.rows(), h.cols()), 0.0};
  if (panels == 0) return out;
  const double width = t / panels;
  for (int p = 0; p < panels; ++p) {
    const double left = p * width;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double s = left + 0.5 * width * (rule.nodes[k] + 1.0);
      const double w = 0.5 * width * rule.weights[k];
      const CofSof fa = cof_sof_eval(a, t - s, method);
      const CofSof fd = cof_sof_eval(d, s, method);
      const Matrix ch = fa.cos * h;
      const Matrix sh = fa.sin * h;
      out.cs.noalias() += w * (ch * fd.sin);
      out.cc.noalias() += w * (ch * fd.cos);
      out.ss.noalias() += w * (sh * fd.sin);
      out.sc.noalias() += w * (sh * fd.cos);
    }
  }
  return out;
}

}  // namespace

Convolutions convolutions(const Matrix& a, const Matrix& h, const Matrix& d, double t,
                          const QuadratureSpec& q, CofMethod method) {
  require_square(a, "convolution: A");
  require_square(d, "convolution: D");
  if (h.rows() != a.rows() || h.cols() != d.rows()) {
    throw DimensionError("convolution: H must be " + std::to_string(a.rows()) + "x" +
                         std::to_string(d.rows()) + ", got " + std::to_string(h.rows()) + "x" +
                         std::to_string(h.cols()));
  }
  if (!std::isfinite(t) || t < 0.0) {
    throw DomainError("convolution: time must be finite and nonnegative (reduce by parity first)");
  }
  const GaussRule rule = gauss_legendre(q.nodes_per_panel);
  const int panels = panel_count(t, q);
  if (!q.estimate_error) return integrate(a, h, d, t, panels, rule, method);

  const Convolutions coarse = integrate(a, h, d, t, panels, rule, method);
  Convolutions fine = integrate(a, h, d, t, 2 * panels, rule, method);
  fine.error_estimate = std::max({(fine.cs - coarse.cs).cwiseAbs().maxCoeff(),
                                  (fine.ss - coarse.ss).cwiseAbs().maxCoeff(),
                                  (fine.sc - coarse.sc).cwiseAbs().maxCoeff(),
                                  (fine.cc - coarse.cc).cwiseAbs().maxCoeff()});
  return fine;
}

}  // namespace cofmat
