#pragma once

// Structured P1 triangulation of a rectangle plus stiffness/mass assembly for
// per-element constant matrix coefficients. Boundary vertices are eliminated,
// so assembled matrices act on interior degrees of freedom only (unless
// Dofs::All is requested).

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pev/dense_sym.hpp"
#include "pev/error.hpp"

namespace pev {

using Vector = std::vector<double>;

/// One value per triangle, in triangle order.
template <class T>
using ElementField = std::vector<T>;

struct Mesh2D {
  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  int nx = 0, ny = 0;

  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<double> element_area;
  /// Gradients of the three P1 basis functions on each triangle.
  std::vector<std::array<Vec2, 3>> basis_grad;

  /// vertex -> interior dof, or -1 on the boundary.
  std::vector<int> dof_of_vertex;
  /// interior dof -> vertex
  std::vector<int> interior_vertices;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_elements() const { return triangles.size(); }
  std::size_t num_dofs() const { return interior_vertices.size(); }

  double domain_area() const { return (x_max - x_min) * (y_max - y_min); }

  Vec2 centroid(std::size_t e) const {
    const auto& t = triangles[e];
    return (1.0 / 3.0) * (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]);
  }

  bool on_boundary(int v) const { return dof_of_vertex[v] < 0; }

  /// Interior dof vector -> vertex vector with zero boundary values.
  Vector extend(std::span<const double> interior) const {
    if (interior.size() != num_dofs()) {
      throw Error(ErrorKind::FieldSizeMismatch, "interior vector length != dof count");
    }
    Vector full(num_vertices(), 0.0);
    for (std::size_t i = 0; i < interior.size(); ++i) full[interior_vertices[i]] = interior[i];
    return full;
  }

  /// Vertex vector -> interior dof vector.
  Vector restrict_to_interior(std::span<const double> full) const {
    if (full.size() != num_vertices()) {
      throw Error(ErrorKind::FieldSizeMismatch, "vertex vector length != vertex count");
    }
    Vector r(num_dofs());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = full[interior_vertices[i]];
    return r;
  }
};

template <class T>
void check_field_size(const Mesh2D& mesh, const ElementField<T>& f, const char* what) {
  if (f.size() != mesh.num_elements()) {
    throw Error(ErrorKind::FieldSizeMismatch,
                std::string(what) + ": field length " + std::to_string(f.size()) +
                    " != triangle count " + std::to_string(mesh.num_elements()));
  }
}

/// Uniform nx-by-ny grid of cells, each split along the lower-left to upper-right diagonal.
inline Mesh2D build_mesh(double x_min, double x_max, double y_min, double y_max, int nx, int ny) {
  if (nx < 2 || ny < 2) throw Error(ErrorKind::InvalidDimensions, "nx and ny must be >= 2");
  if (!(x_max > x_min) || !(y_max > y_min)) {
    throw Error(ErrorKind::InvalidDimensions, "rectangle corners must satisfy max > min");
  }

  Mesh2D m;
  m.x_min = x_min;
  m.x_max = x_max;
  m.y_min = y_min;
  m.y_max = y_max;
  m.nx = nx;
  m.ny = ny;

  const double hx = (x_max - x_min) / nx;
  const double hy = (y_max - y_min) / ny;
  const auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };

  m.vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  m.dof_of_vertex.assign(static_cast<std::size_t>(nx + 1) * (ny + 1), -1);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      // Endpoints are set exactly so boundary coordinates carry no round-off.
      const double x = (i == nx) ? x_max : x_min + i * hx;
      const double y = (j == ny) ? y_max : y_min + j * hy;
      m.vertices.push_back({x, y});
      if (i > 0 && i < nx && j > 0 && j < ny) {
        m.dof_of_vertex[vid(i, j)] = static_cast<int>(m.interior_vertices.size());
        m.interior_vertices.push_back(vid(i, j));
      }
    }
  }

  m.triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      m.triangles.push_back({v00, v10, v11});
      m.triangles.push_back({v00, v11, v01});
    }
  }

  m.element_area.reserve(m.triangles.size());
  m.basis_grad.reserve(m.triangles.size());
  for (const auto& t : m.triangles) {
    const Vec2 p0 = m.vertices[t[0]], p1 = m.vertices[t[1]], p2 = m.vertices[t[2]];
    const double two_area = (p1.x1 - p0.x1) * (p2.x2 - p0.x2) - (p2.x1 - p0.x1) * (p1.x2 - p0.x2);
    m.element_area.push_back(0.5 * two_area);
    m.basis_grad.push_back({Vec2{(p1.x2 - p2.x2) / two_area, (p2.x1 - p1.x1) / two_area},
                            Vec2{(p2.x2 - p0.x2) / two_area, (p0.x1 - p2.x1) / two_area},
                            Vec2{(p0.x2 - p1.x2) / two_area, (p1.x1 - p0.x1) / two_area}});
  }
  return m;
}

/// Symmetric sparse matrix in compressed-row form with both triangles stored.
struct SparseSym {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  double at(std::size_t i, std::size_t j) const {
    const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
    const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
    const auto it = std::lower_bound(first, last, static_cast<int>(j));
    return (it != last && *it == static_cast<int>(j)) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
  }

  Vector diagonal() const {
    Vector d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
    return d;
  }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[static_cast<std::size_t>(col[k])];
      y[i] = s;
    }
  }

  Vector operator*(std::span<const double> x) const {
    Vector y(n);
    multiply(x, y);
    return y;
  }

  /// x^T A y
  double bilinear(std::span<const double> x, std::span<const double> y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = 0.0;
      for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) r += val[k] * y[static_cast<std::size_t>(col[k])];
      s += x[i] * r;
    }
    return s;
  }

  /// y = a*A + b*B; both must share the sparsity pattern.
  static SparseSym combine(double a, const SparseSym& A, double b, const SparseSym& B) {
    if (A.n != B.n || A.col != B.col) {
      throw Error(ErrorKind::FieldSizeMismatch, "sparsity patterns differ");
    }
    SparseSym C = A;
    for (std::size_t k = 0; k < C.val.size(); ++k) C.val[k] = a * A.val[k] + b * B.val[k];
    return C;
  }
};

enum class Dofs { Interior, All };

namespace detail {

inline int map_dof(const Mesh2D& m, int v, Dofs dofs) {
  return dofs == Dofs::All ? v : m.dof_of_vertex[v];
}

/// Zero-valued matrix with the P1 vertex-adjacency pattern.
inline SparseSym p1_pattern(const Mesh2D& m, Dofs dofs) {
  const std::size_t n = dofs == Dofs::All ? m.num_vertices() : m.num_dofs();
  std::vector<std::vector<int>> adj(n);
  for (const auto& t : m.triangles) {
    for (int a = 0; a < 3; ++a) {
      const int ra = map_dof(m, t[a], dofs);
      if (ra < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int cb = map_dof(m, t[b], dofs);
        if (cb >= 0) adj[ra].push_back(cb);
      }
    }
  }
  SparseSym s;
  s.n = n;
  s.row_ptr.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = adj[i];
    r.push_back(static_cast<int>(i));
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    s.row_ptr[i + 1] = s.row_ptr[i] + r.size();
    s.col.insert(s.col.end(), r.begin(), r.end());
  }
  s.val.assign(s.col.size(), 0.0);
  return s;
}

inline std::size_t slot(const SparseSym& s, int row, int column) {
  const auto first = s.col.begin() + static_cast<std::ptrdiff_t>(s.row_ptr[static_cast<std::size_t>(row)]);
  const auto last = s.col.begin() + static_cast<std::ptrdiff_t>(s.row_ptr[static_cast<std::size_t>(row) + 1]);
  return static_cast<std::size_t>(std::lower_bound(first, last, column) - s.col.begin());
}

/// Element loop in ascending order; `local(e, a, b)` returns the (a,b) entry of element e.
template <class Local>
SparseSym assemble(const Mesh2D& m, Dofs dofs, Local&& local) {
  SparseSym s = p1_pattern(m, dofs);
  for (std::size_t e = 0; e < m.num_elements(); ++e) {
    const auto& t = m.triangles[e];
    for (int a = 0; a < 3; ++a) {
      const int ra = map_dof(m, t[a], dofs);
      if (ra < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int cb = map_dof(m, t[b], dofs);
        if (cb < 0) continue;
        s.val[slot(s, ra, cb)] += local(e, a, b);
      }
    }
  }
  return s;
}

}  // namespace detail

/// Discrete form sum_e area_e <a_e grad u, grad v> on P1 hat functions.
inline SparseSym assemble_stiffness(const Mesh2D& mesh, const ElementField<SymMat2>& a,
                                    Dofs dofs = Dofs::Interior) {
  check_field_size(mesh, a, "assemble_stiffness");
  return detail::assemble(mesh, dofs, [&](std::size_t e, int i, int j) {
    const auto& g = mesh.basis_grad[e];
    return mesh.element_area[e] * quad(a[e], g[i], g[j]);
  });
}

/// Consistent P1 mass matrix.
inline SparseSym assemble_mass(const Mesh2D& mesh, Dofs dofs = Dofs::Interior) {
  return detail::assemble(mesh, dofs, [&](std::size_t e, int i, int j) {
    return mesh.element_area[e] * (i == j ? 2.0 : 1.0) / 12.0;
  });
}

/// Constant gradient of the P1 interpolant on each element; `y` is indexed by vertex.
inline ElementField<Vec2> element_gradients(const Mesh2D& mesh, std::span<const double> y) {
  if (y.size() != mesh.num_vertices()) {
    throw Error(ErrorKind::FieldSizeMismatch, "element_gradients expects a vertex-indexed vector");
  }
  ElementField<Vec2> g(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.triangles[e];
    const auto& bg = mesh.basis_grad[e];
    g[e] = y[t[0]] * bg[0] + y[t[1]] * bg[1] + y[t[2]] * bg[2];
  }
  return g;
}

/// sum_e area_e <a_e grad v, grad v> evaluated element by element (vertex-indexed v).
inline double energy(const Mesh2D& mesh, const ElementField<SymMat2>& a, std::span<const double> v) {
  check_field_size(mesh, a, "energy");
  const auto g = element_gradients(mesh, v);
  double s = 0.0;
  for (std::size_t e = 0; e < g.size(); ++e) s += mesh.element_area[e] * quad(a[e], g[e]);
  return s;
}

template <class T>
ElementField<T> constant_field(const Mesh2D& mesh, const T& value) {
  return ElementField<T>(mesh.num_elements(), value);
}

}  // namespace pev
