#pragma once

// CSV import/export for meshes and fields. Numbers are written with %.17g so
// files round-trip exactly and are byte-identical across identical runs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pev/controls.hpp"
#include "pev/error.hpp"
#include "pev/mesh_fem.hpp"
#include "pev/parabolic.hpp"

namespace pev::csv {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + p.string() + " for writing");
  return f;
}

inline std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& p,
                                                       const std::vector<std::string>& header) {
  std::ifstream f(p);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + p.string());
  std::string line;
  if (!std::getline(f, line)) throw Error(ErrorKind::Io, p.string() + ": empty file");
  std::string expect;
  for (std::size_t i = 0; i < header.size(); ++i) expect += (i ? "," : "") + header[i];
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expect) throw Error(ErrorKind::Io, p.string() + ": header must be '" + expect + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (cells.size() != header.size()) throw Error(ErrorKind::Io, p.string() + ": wrong column count");
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline double to_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorKind::Io, "not a number: '" + s + "'");
  }
  if (pos != s.size()) throw Error(ErrorKind::Io, "not a number: '" + s + "'");
  return v;
}

/// Rows must be listed as ids 0..n-1 in order.
inline void check_ids(const std::vector<std::vector<std::string>>& rows, std::size_t n, const std::string& what) {
  if (rows.size() != n) {
    throw Error(ErrorKind::FieldSizeMismatch, what + ": " + std::to_string(rows.size()) + " rows, expected " +
                                                  std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i][0] != std::to_string(i)) throw Error(ErrorKind::Io, what + ": ids must be 0..n-1 in order");
  }
}

}  // namespace detail

inline void write_vertices(const std::filesystem::path& p, const Mesh2D& m) {
  auto f = detail::open_out(p);
  f << "id,x,y\n";
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    f << i << ',' << num(m.vertices[i].x1) << ',' << num(m.vertices[i].x2) << '\n';
  }
}

inline void write_elements(const std::filesystem::path& p, const Mesh2D& m) {
  auto f = detail::open_out(p);
  f << "id,v0,v1,v2\n";
  for (std::size_t i = 0; i < m.num_elements(); ++i) {
    const auto& t = m.triangles[i];
    f << i << ',' << t[0] << ',' << t[1] << ',' << t[2] << '\n';
  }
}

/// Vertex-indexed values.
inline void write_nodal_field(const std::filesystem::path& p, std::span<const double> v) {
  auto f = detail::open_out(p);
  f << "vertex_id,value\n";
  for (std::size_t i = 0; i < v.size(); ++i) f << i << ',' << num(v[i]) << '\n';
}

inline void write_element_field(const std::filesystem::path& p, const ElementField<SymMat2>& a) {
  auto f = detail::open_out(p);
  f << "element_id,a11,a12,a22\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    f << i << ',' << num(a[i].a11) << ',' << num(a[i].a12) << ',' << num(a[i].a22) << '\n';
  }
}

/// Scalar element field under a named column (sigma, h, region, ...).
inline void write_element_field(const std::filesystem::path& p, const ElementField<double>& v,
                                const std::string& column = "sigma") {
  auto f = detail::open_out(p);
  f << "element_id," << column << '\n';
  for (std::size_t i = 0; i < v.size(); ++i) f << i << ',' << num(v[i]) << '\n';
}

inline void write_element_labels(const std::filesystem::path& p, const std::vector<std::string>& labels,
                                 const std::string& column) {
  auto f = detail::open_out(p);
  f << "element_id," << column << '\n';
  for (std::size_t i = 0; i < labels.size(); ++i) f << i << ',' << labels[i] << '\n';
}

inline DensityField read_density(const std::filesystem::path& p, const Mesh2D& m) {
  const auto rows = detail::read_rows(p, {"element_id", "sigma"});
  detail::check_ids(rows, m.num_elements(), p.string());
  DensityField s{ElementField<double>(rows.size())};
  for (std::size_t i = 0; i < rows.size(); ++i) s[i] = detail::to_double(rows[i][1]);
  return s;
}

inline ElementField<SymMat2> read_matrix_field(const std::filesystem::path& p, const Mesh2D& m) {
  const auto rows = detail::read_rows(p, {"element_id", "a11", "a12", "a22"});
  detail::check_ids(rows, m.num_elements(), p.string());
  ElementField<SymMat2> a(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a[i] = {detail::to_double(rows[i][1]), detail::to_double(rows[i][2]), detail::to_double(rows[i][3])};
  }
  return a;
}

inline Vector read_nodal_field(const std::filesystem::path& p, const Mesh2D& m) {
  const auto rows = detail::read_rows(p, {"vertex_id", "value"});
  detail::check_ids(rows, m.num_vertices(), p.string());
  Vector v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) v[i] = detail::to_double(rows[i][1]);
  return v;
}

/// t, ||y(t)||_M, exp(-lambda_ref t) ||y0||_M
inline void write_decay_trace(const std::filesystem::path& p, const DecayTrace& tr) {
  auto f = detail::open_out(p);
  f << "t,norm,exp_reference\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    f << num(tr.times[i]) << ',' << num(tr.norms[i]) << ','
      << num(std::exp(-tr.lambda_ref * tr.times[i]) * tr.norms.front()) << '\n';
  }
}

}  // namespace pev::csv
