#pragma once

#include "cofmat/linalg.hpp"

#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace cofmat {

/// Finite-dimensional Hilbert space ℝⁿ with norm ‖x‖² = xᵀGx for a symmetric
/// positive definite weight G.
///
/// The weight is kept block-diagonal: product spaces concatenate the blocks of
/// their factors, so square roots are only ever formed per factor. Construction
/// checks symmetry and positive definiteness; each non-diagonal block is
/// eigendecomposed once, on first use, and copies share that data. All
/// members are safe to call concurrently.
class GradedSpace {
 public:
  /// Weight condition numbers above this are rejected.
  static constexpr double kMaxCondition = 1e12;

  /// Empty (zero-dimensional) space.
  GradedSpace();
  GradedSpace(const Matrix& weight, std::string label);

  static GradedSpace euclidean(Index dim, std::string label = "euclid");
  static GradedSpace scaled_identity(Index dim, double scale, std::string label);
  static GradedSpace diagonal(const Vector& weights, std::string label);

  Index dim() const { return dim_; }
  const std::string& label() const { return label_; }

  /// Assembled weight matrix.
  Matrix weight() const;
  /// Number of diagonal blocks (factors).
  std::size_t block_count() const { return blocks_.size(); }

  double inner(const Vector& x, const Vector& y) const;
  double norm(const Vector& x) const;
  double norm_squared(const Vector& x) const;

  /// G^{1/2} M and M G^{-1/2}, applied blockwise.
  Matrix apply_sqrt_left(const Matrix& m) const;
  Matrix apply_inv_sqrt_right(const Matrix& m) const;

  /// Lᵀ M and M L⁻ᵀ for the Cholesky factor G = L Lᵀ, applied blockwise.
  /// Cheaper than the symmetric root and enough for norms.
  Matrix apply_factor_left(const Matrix& m) const;
  Matrix apply_inv_factor_right(const Matrix& m) const;

  Matrix sqrt_weight() const;
  Matrix inv_sqrt_weight() const;

  double condition() const;

  /// Product space X × Y with block-diagonal weight, factor order preserved.
  friend GradedSpace product(const GradedSpace& a, const GradedSpace& b, std::string label);

 private:
  struct Block {
    Matrix weight;
    std::string label;
    bool diagonal = false;
    Matrix chol;           // lower Cholesky factor, empty when `diagonal`
    mutable std::once_flag once;
    mutable Vector evals;  // ascending; the diagonal itself when `diagonal`
    mutable Matrix evecs;  // empty when `diagonal`

    const Block& ready() const;
  };
  using Blocks = std::vector<std::shared_ptr<const Block>>;

  static std::shared_ptr<const Block> validate(const Matrix& w, const std::string& label);

  Index dim_ = 0;
  std::string label_;
  Blocks blocks_;
};

GradedSpace product(const GradedSpace& a, const GradedSpace& b, std::string label = "");

/// Graph-norm space of `op`: weight G_dom + opᵀ G_cod op.
GradedSpace graph_space(const Matrix& op, const GradedSpace& domain, const GradedSpace& codomain,
                        std::string label = "graph");

}  // namespace cofmat
