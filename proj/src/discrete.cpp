#include "cofmat/discrete.hpp"

#include "cofmat/error.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace cofmat {

Mesh Mesh::make(int dim, Index n) {
  if (dim != 1 && dim != 2) throw DomainError("Mesh: dimension must be 1 or 2");
  if (n < 2) throw DomainError("Mesh: need at least 2 interior points per axis");
  return Mesh{dim, n, 1.0 / static_cast<double>(n + 1)};
}

Index Mesh::interior_count() const { return dim == 1 ? n : n * n; }
Index Mesh::full_count() const { return dim == 1 ? n + 2 : (n + 2) * (n + 2); }
Index Mesh::boundary_count() const { return dim == 1 ? 2 : 4 * n; }
Index Mesh::face_count() const { return dim == 1 ? n + 1 : 2 * n * (n + 1); }
double Mesh::cell() const { return dim == 1 ? h : h * h; }

std::string_view to_string(Bc bc) {
  switch (bc) {
    case Bc::dirichlet: return "dirichlet";
    case Bc::neumann: return "neumann";
    case Bc::robin: return "robin";
    case Bc::hinged: return "hinged";
    case Bc::none: return "none";
  }
  return "?";
}

Bc parse_bc(std::string_view s) {
  if (s == "dirichlet") return Bc::dirichlet;
  if (s == "neumann") return Bc::neumann;
  if (s == "robin") return Bc::robin;
  if (s == "hinged") return Bc::hinged;
  if (s == "none") return Bc::none;
  throw DomainError("unknown boundary condition '" + std::string(s) + "'");
}

namespace {

Matrix eye(Index k) { return Matrix::Identity(k, k); }

// tridiag(1, -2, 1) / h², Dirichlet ends
Matrix dirichlet_1d(Index m, double h) {
  Matrix t = Matrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    t(i, i) = -2.0;
    if (i > 0) t(i, i - 1) = 1.0;
    if (i + 1 < m) t(i, i + 1) = 1.0;
  }
  return t / (h * h);
}

// unknowns half a cell away from both ends: ghost value −u gives diagonal −3
Matrix cell_centered_1d(Index m, double h) {
  Matrix t = dirichlet_1d(m, h);
  t(0, 0) = -3.0 / (h * h);
  t(m - 1, m - 1) = -3.0 / (h * h);
  return t;
}

// full nodes with ghost reflection; alpha = 0 is Neumann
Matrix reflected_1d(Index n, double h, double alpha) {
  const Index m = n + 2;
  Matrix t = dirichlet_1d(m, h);
  t(0, 1) = 2.0 / (h * h);
  t(m - 1, m - 2) = 2.0 / (h * h);
  t(0, 0) = (-2.0 - 2.0 * h * alpha) / (h * h);
  t(m - 1, m - 1) = (-2.0 - 2.0 * h * alpha) / (h * h);
  return t;
}

Vector trapezoid_1d(Index n, double h) {
  Vector w = Vector::Constant(n + 2, h);
  w(0) = 0.5 * h;
  w(n + 1) = 0.5 * h;
  return w;
}

Vector full_weights(const Mesh& mesh) {
  const Vector w1 = trapezoid_1d(mesh.n, mesh.h);
  if (mesh.dim == 1) return w1;
  const Index m = mesh.n + 2;
  Vector w(m * m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) w(i * m + j) = w1(i) * w1(j);
  return w;
}

Matrix tensor_sum(const Matrix& a, Index k) {
  // a ⊗ I + I ⊗ a
  return kron(a, eye(k)) + kron(eye(k), a);
}

Matrix dirichlet_matrix(const Mesh& mesh) {
  const Matrix d1 = dirichlet_1d(mesh.n, mesh.h);
  return mesh.dim == 1 ? d1 : tensor_sum(d1, mesh.n);
}

Matrix reflected_matrix(const Mesh& mesh, double alpha) {
  const Matrix r1 = reflected_1d(mesh.n, mesh.h, alpha);
  return mesh.dim == 1 ? r1 : tensor_sum(r1, mesh.n + 2);
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix gradient_matrix(const Mesh& mesh) {
  const Index n = mesh.n;
  const double ih = 1.0 / mesh.h;
  if (mesh.dim == 1) {
    Matrix g = Matrix::Zero(n + 1, n);
    for (Index k = 0; k <= n; ++k) {
      if (k < n) g(k, k) += ih;
      if (k > 0) g(k, k - 1) -= ih;
    }
    return g;
  }
  const Index nxf = (n + 1) * n;
  Matrix g = Matrix::Zero(mesh.face_count(), n * n);
  for (Index i = 0; i <= n; ++i)
    for (Index j = 0; j < n; ++j) {
      const Index r = i * n + j;
      if (i < n) g(r, i * n + j) += ih;
      if (i > 0) g(r, (i - 1) * n + j) -= ih;
    }
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= n; ++j) {
      const Index r = nxf + i * (n + 1) + j;
      if (j < n) g(r, i * n + j) += ih;
      if (j > 0) g(r, i * n + j - 1) -= ih;
    }
  return g;
}

Matrix full_gradient_matrix(const Mesh& mesh) {
  const Index n = mesh.n;
  const Index m = n + 2;
  const double ih = 1.0 / mesh.h;
  if (mesh.dim == 1) {
    Matrix g = Matrix::Zero(n + 1, m);
    for (Index k = 0; k <= n; ++k) {
      g(k, k + 1) += ih;
      g(k, k) -= ih;
    }
    return g;
  }
  const Index nxf = (n + 1) * n;
  Matrix g = Matrix::Zero(mesh.face_count(), m * m);
  for (Index i = 0; i <= n; ++i)
    for (Index j = 0; j < n; ++j) {
      const Index r = i * n + j;
      g(r, (i + 1) * m + (j + 1)) += ih;
      g(r, i * m + (j + 1)) -= ih;
    }
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j <= n; ++j) {
      const Index r = nxf + i * (n + 1) + j;
      g(r, (i + 1) * m + (j + 1)) += ih;
      g(r, (i + 1) * m + j) -= ih;
    }
  return g;
}

Matrix vector_laplacian_matrix(const Mesh& mesh) {
  const Index n = mesh.n;
  if (mesh.dim == 1) return cell_centered_1d(n + 1, mesh.h);
  const Matrix cc = cell_centered_1d(n + 1, mesh.h);
  const Matrix dd = dirichlet_1d(n, mesh.h);
  const Matrix lx = kron(cc, eye(n)) + kron(eye(n + 1), dd);
  const Matrix ly = kron(dd, eye(n + 1)) + kron(eye(n), cc);
  return block_diagonal(lx, ly);
}

// extended index → full index
std::vector<Index> extended_to_full(const Mesh& mesh) {
  const Index n = mesh.n;
  std::vector<Index> map;
  map.reserve(static_cast<std::size_t>(mesh.extended_count()));
  if (mesh.dim == 1) {
    for (Index k = 1; k <= n; ++k) map.push_back(k);
    map.push_back(0);
    map.push_back(n + 1);
    return map;
  }
  const Index m = n + 2;
  for (Index i = 1; i <= n; ++i)
    for (Index j = 1; j <= n; ++j) map.push_back(i * m + j);
  for (Index i = 1; i <= n; ++i) map.push_back(i * m + 0);            // bottom
  for (Index j = 1; j <= n; ++j) map.push_back((n + 1) * m + j);      // right
  for (Index i = n; i >= 1; --i) map.push_back(i * m + (n + 1));      // top
  for (Index j = n; j >= 1; --j) map.push_back(0 * m + j);            // left
  return map;
}

std::vector<Index> full_to_extended(const Mesh& mesh) {
  std::vector<Index> inv(static_cast<std::size_t>(mesh.full_count()), -1);
  const auto map = extended_to_full(mesh);
  for (std::size_t k = 0; k < map.size(); ++k) inv[static_cast<std::size_t>(map[k])] = static_cast<Index>(k);
  return inv;
}

}  // namespace

GradedSpace interior_l2(const Mesh& mesh) {
  return GradedSpace::scaled_identity(mesh.interior_count(), mesh.cell(), "L2");
}

GradedSpace full_l2(const Mesh& mesh) { return GradedSpace::diagonal(full_weights(mesh), "L2full"); }

GradedSpace face_l2(const Mesh& mesh) {
  return GradedSpace::scaled_identity(mesh.face_count(), mesh.cell(), "L2face");
}

GradedSpace boundary_l2(const Mesh& mesh) {
  const double w = mesh.dim == 1 ? 1.0 : mesh.h;
  return GradedSpace::scaled_identity(mesh.boundary_count(), w, "L2bdry");
}

GradedSpace interior_h1(const Mesh& mesh) {
  const Index k = mesh.interior_count();
  return GradedSpace(symmetrized(mesh.cell() * (eye(k) - dirichlet_matrix(mesh))), "H1");
}

namespace {

Matrix full_h1_weight(const Mesh& mesh) {
  const Vector w = full_weights(mesh);
  const Matrix stiff = -(w.asDiagonal() * reflected_matrix(mesh, 0.0));
  return symmetrized(Matrix(w.asDiagonal()) + stiff);
}

}  // namespace

GradedSpace full_h1(const Mesh& mesh) { return GradedSpace(full_h1_weight(mesh), "H1full"); }

GradedSpace extended_h1(const Mesh& mesh) {
  const Matrix g = full_h1_weight(mesh);
  const auto map = extended_to_full(mesh);
  const auto k = static_cast<Index>(map.size());
  Matrix out(k, k);
  for (Index a = 0; a < k; ++a)
    for (Index b = 0; b < k; ++b)
      out(a, b) = g(map[static_cast<std::size_t>(a)], map[static_cast<std::size_t>(b)]);
  return GradedSpace(out, "H1ext");
}

GradedSpace face_h1(const Mesh& mesh) {
  const Index k = mesh.face_count();
  return GradedSpace(symmetrized(mesh.cell() * (eye(k) - vector_laplacian_matrix(mesh))), "H1face");
}

DiscreteOperator laplacian(const Mesh& mesh, Bc bc, double robin_alpha) {
  switch (bc) {
    case Bc::dirichlet: {
      return {dirichlet_matrix(mesh), interior_l2(mesh), interior_l2(mesh), bc};
    }
    case Bc::neumann: {
      return {reflected_matrix(mesh, 0.0), full_l2(mesh), full_l2(mesh), bc};
    }
    case Bc::robin: {
      if (!std::isfinite(robin_alpha) || robin_alpha < 0.0) {
        throw DomainError("laplacian: Robin coefficient must be finite and nonnegative");
      }
      return {reflected_matrix(mesh, robin_alpha), full_l2(mesh), full_l2(mesh), bc};
    }
    default:
      throw DomainError("laplacian: unsupported boundary condition '" + std::string(to_string(bc)) +
                        "'");
  }
}

GradDiv grad_div(const Mesh& mesh) {
  const Matrix g = gradient_matrix(mesh);
  return {DiscreteOperator{g, interior_h1(mesh), face_l2(mesh), Bc::dirichlet},
          DiscreteOperator{-g.transpose(), face_h1(mesh), interior_l2(mesh), Bc::dirichlet}};
}

GradDiv grad_div_full(const Mesh& mesh) {
  const Matrix g = full_gradient_matrix(mesh);
  // adjoint with respect to the trapezoid and face weights
  const Vector w = full_weights(mesh);
  const Matrix div = -(w.cwiseInverse().asDiagonal() * g.transpose()) * mesh.cell();
  return {DiscreteOperator{g, full_h1(mesh), face_l2(mesh), Bc::none},
          DiscreteOperator{div, face_h1(mesh), full_l2(mesh), Bc::none}};
}

DiscreteOperator vector_laplacian(const Mesh& mesh) {
  return {vector_laplacian_matrix(mesh), face_l2(mesh), face_l2(mesh), Bc::dirichlet};
}

DiscreteOperator lame_operator(const Mesh& mesh, double mu1, double mu2) {
  if (mesh.dim != 2) throw DomainError("lame_operator: needs a 2D mesh");
  if (!(mu1 >= 0.0) || !(mu2 >= 0.0) || !std::isfinite(mu1) || !std::isfinite(mu2)) {
    throw DomainError("lame_operator: coefficients must be finite and nonnegative");
  }
  if (mu1 == 0.0 && mu2 == 0.0) throw DomainError("lame_operator: μ1 and μ2 are both zero");
  const Matrix g = gradient_matrix(mesh);
  Matrix a = mu1 * vector_laplacian_matrix(mesh) - mu2 * (g * g.transpose());
  return {symmetrized(a), face_l2(mesh), face_l2(mesh), Bc::dirichlet};
}

DiscreteOperator bilaplacian_hinged(const Mesh& mesh) {
  const Matrix d = dirichlet_matrix(mesh);
  return {symmetrized(-(d * d)), interior_l2(mesh), interior_l2(mesh), Bc::hinged};
}

Traces traces(const Mesh& mesh) {
  const Index n = mesh.n;
  const Index nb = mesh.boundary_count();
  const Index ne = mesh.extended_count();
  const Index ni = mesh.interior_count();
  const auto f2e = full_to_extended(mesh);
  auto ext = [&](Index full) { return f2e[static_cast<std::size_t>(full)]; };

  Matrix dir = Matrix::Zero(nb, ne);
  for (Index b = 0; b < nb; ++b) dir(b, ni + b) = 1.0;

  Matrix neu = Matrix::Zero(nb, ne);
  const double s = 1.0 / (2.0 * mesh.h);
  if (mesh.dim == 1) {
    const Index m = n + 2;
    const Index left[3] = {0, 1, 2};
    const Index right[3] = {m - 1, m - 2, m - 3};
    const double c[3] = {3.0 * s, -4.0 * s, 1.0 * s};
    for (int k = 0; k < 3; ++k) {
      neu(0, ext(left[k])) += c[k];
      neu(1, ext(right[k])) += c[k];
    }
  } else {
    const Index m = n + 2;
    const auto e2f = extended_to_full(mesh);
    for (Index b = 0; b < nb; ++b) {
      const Index full = e2f[static_cast<std::size_t>(ni + b)];
      const Index i = full / m;
      const Index j = full % m;
      // step pointing into the domain
      Index di = 0;
      Index dj = 0;
      if (j == 0) dj = 1;
      else if (i == n + 1) di = -1;
      else if (j == n + 1) dj = -1;
      else di = 1;
      neu(b, ext(i * m + j)) += 3.0 * s;
      neu(b, ext((i + di) * m + (j + dj))) += -4.0 * s;
      neu(b, ext((i + 2 * di) * m + (j + 2 * dj))) += 1.0 * s;
    }
  }
  return {DiscreteOperator{dir, extended_h1(mesh), boundary_l2(mesh), Bc::dirichlet},
          DiscreteOperator{neu, extended_h1(mesh), boundary_l2(mesh), Bc::neumann}};
}

Matrix maximal_laplacian(const Mesh& mesh) {
  const Index n = mesh.n;
  const Index ni = mesh.interior_count();
  const auto f2e = full_to_extended(mesh);
  auto ext = [&](Index full) { return f2e[static_cast<std::size_t>(full)]; };
  const double ih2 = 1.0 / (mesh.h * mesh.h);
  Matrix a = Matrix::Zero(ni, mesh.extended_count());
  if (mesh.dim == 1) {
    for (Index k = 1; k <= n; ++k) {
      a(k - 1, ext(k - 1)) += ih2;
      a(k - 1, ext(k)) -= 2.0 * ih2;
      a(k - 1, ext(k + 1)) += ih2;
    }
    return a;
  }
  const Index m = n + 2;
  for (Index i = 1; i <= n; ++i)
    for (Index j = 1; j <= n; ++j) {
      const Index r = (i - 1) * n + (j - 1);
      a(r, ext(i * m + j)) -= 4.0 * ih2;
      a(r, ext((i - 1) * m + j)) += ih2;
      a(r, ext((i + 1) * m + j)) += ih2;
      a(r, ext(i * m + j - 1)) += ih2;
      a(r, ext(i * m + j + 1)) += ih2;
    }
  return a;
}

Matrix interior_restriction(const Mesh& mesh) {
  const Index ni = mesh.interior_count();
  Matrix r = Matrix::Zero(ni, mesh.extended_count());
  r.leftCols(ni).setIdentity();
  return r;
}

Matrix boundary_loop_laplacian(const Mesh& mesh) {
  const Index nb = mesh.boundary_count();
  if (mesh.dim != 2) throw DomainError("boundary_loop_laplacian: needs a 2D mesh");
  Matrix t = Matrix::Zero(nb, nb);
  const double ih2 = 1.0 / (mesh.h * mesh.h);
  for (Index k = 0; k < nb; ++k) {
    t(k, k) = -2.0 * ih2;
    t(k, (k + 1) % nb) += ih2;
    t(k, (k + nb - 1) % nb) += ih2;
  }
  return t;
}

namespace {

Matrix coords_of(const Mesh& mesh, const std::vector<Index>& full_indices) {
  const Index m = mesh.n + 2;
  Matrix c(static_cast<Index>(full_indices.size()), mesh.dim);
  for (std::size_t k = 0; k < full_indices.size(); ++k) {
    const Index f = full_indices[k];
    const auto r = static_cast<Index>(k);
    if (mesh.dim == 1) {
      c(r, 0) = static_cast<double>(f) * mesh.h;
    } else {
      c(r, 0) = static_cast<double>(f / m) * mesh.h;
      c(r, 1) = static_cast<double>(f % m) * mesh.h;
    }
  }
  return c;
}

}  // namespace

Matrix interior_coordinates(const Mesh& mesh) {
  auto map = extended_to_full(mesh);
  map.resize(static_cast<std::size_t>(mesh.interior_count()));
  return coords_of(mesh, map);
}

Matrix full_coordinates(const Mesh& mesh) {
  std::vector<Index> all(static_cast<std::size_t>(mesh.full_count()));
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<Index>(k);
  return coords_of(mesh, all);
}

Matrix extended_coordinates(const Mesh& mesh) { return coords_of(mesh, extended_to_full(mesh)); }

}  // namespace cofmat
