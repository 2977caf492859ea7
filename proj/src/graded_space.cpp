#include "cofmat/graded_space.hpp"

#include "cofmat/error.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace cofmat {

namespace {

void check_spectrum(const Vector& evals, const std::string& label) {
  const double lo = evals.minCoeff();
  const double hi = evals.maxCoeff();
  if (!(lo > 0.0)) {
    throw SpectralError("GradedSpace(" + label + "): weight is not positive definite (min eig " +
                        std::to_string(lo) + ")");
  }
  if (hi / lo > GradedSpace::kMaxCondition) {
    throw SpectralError("GradedSpace(" + label + "): weight condition " + std::to_string(hi / lo) +
                        " exceeds cap");
  }
}

}  // namespace

std::shared_ptr<const GradedSpace::Block> GradedSpace::validate(const Matrix& w, const std::string& label) {
  require_square(w, "GradedSpace(" + label + ")");
  require_finite(w, "GradedSpace(" + label + ")");
  if (!is_symmetric(w)) {
    throw SpectralError("GradedSpace(" + label + "): weight is not symmetric");
  }
  auto b = std::make_shared<Block>();
  b->weight = 0.5 * (w + w.transpose());
  b->label = label;
  b->diagonal = is_diagonal(b->weight);
  if (b->diagonal) {
    b->evals = b->weight.diagonal();
    check_spectrum(b->evals, label);
    std::call_once(b->once, [] {});
  } else {
    const Eigen::LLT<Matrix> llt(b->weight);
    if (llt.info() != Eigen::Success) {
      throw SpectralError("GradedSpace(" + label + "): weight is not positive definite");
    }
    b->chol = llt.matrixL();
  }
  return b;
}

const GradedSpace::Block& GradedSpace::Block::ready() const {
  std::call_once(once, [this] {
    SymmetricEigen es = symmetric_eigen(weight);
    check_spectrum(es.values, label);
    evals = std::move(es.values);
    evecs = std::move(es.vectors);
  });
  return *this;
}

GradedSpace::GradedSpace() = default;

GradedSpace::GradedSpace(const Matrix& weight, std::string label)
    : dim_(weight.rows()), label_(std::move(label)), blocks_{validate(weight, label_)} {}

GradedSpace GradedSpace::euclidean(Index dim, std::string label) {
  return scaled_identity(dim, 1.0, std::move(label));
}

GradedSpace GradedSpace::scaled_identity(Index dim, double scale, std::string label) {
  if (dim < 1) throw DimensionError("GradedSpace: dimension must be >= 1");
  return GradedSpace(Matrix(Vector::Constant(dim, scale).asDiagonal()), std::move(label));
}

GradedSpace GradedSpace::diagonal(const Vector& weights, std::string label) {
  return GradedSpace(Matrix(weights.asDiagonal()), std::move(label));
}

Matrix GradedSpace::weight() const {
  Matrix g = Matrix::Zero(dim_, dim_);
  Index off = 0;
  for (const auto& p : blocks_) {
    const Block& b = *p;
    g.block(off, off, b.weight.rows(), b.weight.cols()) = b.weight;
    off += b.weight.rows();
  }
  return g;
}

double GradedSpace::inner(const Vector& x, const Vector& y) const {
  if (x.size() != dim_ || y.size() != dim_) {
    throw DimensionError("GradedSpace(" + label_ + ")::inner: vector size mismatch");
  }
  double s = 0.0;
  Index off = 0;
  for (const auto& p : blocks_) {
    const Block& b = *p;
    const Index k = b.weight.rows();
    if (b.diagonal) {
      s += (x.segment(off, k).array() * b.evals.array() * y.segment(off, k).array()).sum();
    } else {
      s += x.segment(off, k).dot(b.weight * y.segment(off, k));
    }
    off += k;
  }
  return s;
}

double GradedSpace::norm_squared(const Vector& x) const { return inner(x, x); }

double GradedSpace::norm(const Vector& x) const { return std::sqrt(std::max(0.0, inner(x, x))); }

Matrix GradedSpace::apply_sqrt_left(const Matrix& m) const {
  if (m.rows() != dim_) {
    throw DimensionError("GradedSpace(" + label_ + "): row count does not match dimension");
  }
  Matrix out(m.rows(), m.cols());
  Index off = 0;
  for (const auto& p : blocks_) {
    const Block& b = p->ready();
    const Index k = b.weight.rows();
    const auto rows = m.middleRows(off, k);
    if (b.diagonal) {
      out.middleRows(off, k) = b.evals.cwiseSqrt().asDiagonal() * rows;
    } else {
      out.middleRows(off, k) =
          b.evecs * (b.evals.cwiseSqrt().asDiagonal() * (b.evecs.transpose() * rows));
    }
    off += k;
  }
  return out;
}

Matrix GradedSpace::apply_inv_sqrt_right(const Matrix& m) const {
  if (m.cols() != dim_) {
    throw DimensionError("GradedSpace(" + label_ + "): column count does not match dimension");
  }
  Matrix out(m.rows(), m.cols());
  Index off = 0;
  for (const auto& p : blocks_) {
    const Block& b = p->ready();
    const Index k = b.weight.rows();
    const auto cols = m.middleCols(off, k);
    const Vector inv_sqrt = b.evals.cwiseSqrt().cwiseInverse();
    if (b.diagonal) {
      out.middleCols(off, k) = cols * inv_sqrt.asDiagonal();
    } else {
      out.middleCols(off, k) = ((cols * b.evecs) * inv_sqrt.asDiagonal()) * b.evecs.transpose();
    }
    off += k;
  }
  return out;
}

Matrix GradedSpace::apply_factor_left(const Matrix& m) const {
  if (m.rows() != dim_) {
    throw DimensionError("GradedSpace(" + label_ + "): row count does not match dimension");
  }
  Matrix out(m.rows(), m.cols());
  Index off = 0;
  for (const auto& p : blocks_) {
    const Block& b = *p;
    const Index k = b.weight.rows();
    if (b.diagonal) {
      out.middleRows(off, k) = b.evals.cwiseSqrt().asDiagonal() * m.middleRows(off, k);
    } else {
      out.middleRows(off, k) = b.chol.triangularView<Eigen::Lower>().transpose() * m.middleRows(off, k);
    }
    off += k;
  }
  return out;
}

Matrix GradedSpace::apply_inv_factor_right(const Matrix& m) const {
  if (m.cols() != dim_) {
    throw DimensionError("GradedSpace(" + label_ + "): column count does not match dimension");
  }
  Matrix out(m.rows(), m.cols());
  Index off = 0;
  for (const auto& p : blocks_) {
    const Block& b = *p;
    const Index k = b.weight.rows();
    if (b.diagonal) {
      out.middleCols(off, k) = m.middleCols(off, k) * b.evals.cwiseSqrt().cwiseInverse().asDiagonal();
    } else {
      out.middleCols(off, k) =
          b.chol.triangularView<Eigen::Lower>().solve(m.middleCols(off, k).transpose()).transpose();
    }
    off += k;
  }
  return out;
}

Matrix GradedSpace::sqrt_weight() const { return apply_sqrt_left(Matrix::Identity(dim_, dim_)); }

Matrix GradedSpace::inv_sqrt_weight() const {
  return apply_inv_sqrt_right(Matrix::Identity(dim_, dim_));
}

double GradedSpace::condition() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& p : blocks_) {
    const Block& b = p->ready();
    lo = std::min(lo, b.evals.minCoeff());
    hi = std::max(hi, b.evals.maxCoeff());
  }
  return hi / lo;
}

GradedSpace product(const GradedSpace& a, const GradedSpace& b, std::string label) {
  GradedSpace out;
  out.dim_ = a.dim_ + b.dim_;
  out.label_ = label.empty() ? a.label_ + "x" + b.label_ : std::move(label);
  out.blocks_ = a.blocks_;
  out.blocks_.insert(out.blocks_.end(), b.blocks_.begin(), b.blocks_.end());
  return out;
}

GradedSpace graph_space(const Matrix& op, const GradedSpace& domain, const GradedSpace& codomain,
                        std::string label) {
  if (op.cols() != domain.dim() || op.rows() != codomain.dim()) {
    throw DimensionError("graph_space: operator shape does not match spaces");
  }
  const Matrix g = domain.weight() + op.transpose() * codomain.weight() * op;
  return GradedSpace(g, std::move(label));
}

}  // namespace cofmat
