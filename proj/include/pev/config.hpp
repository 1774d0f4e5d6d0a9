#pragma once

// JSON run configuration: parsing with unknown-key rejection, validation of
// the control bounds, and a normalized echo that parses back to the same run.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "pev/controls.hpp"
#include "pev/dense_sym.hpp"
#include "pev/error.hpp"
#include "pev/sparse_eigen.hpp"

namespace pev::config {

using json = nlohmann::json;

struct MeshConfig {
  double x_min = -1.0, x_max = 1.0, y_min = -1.0, y_max = 1.0;
  int nx = 32, ny = 32;
};

struct BoundsConfig {
  double mu0 = 0.5, mu1 = 1.5;
  double alpha = 0.0, beta = 1.0;
  SymMat2 A0 = SymMat2::diag(0.5, 1.5);
  SymMat2 A1 = SymMat2::identity();
};

struct EigConfig {
  /// Exactly one coefficient source: constant sigma, a sigma CSV, or an a-field CSV.
  double sigma = 0.0;
  std::string sigma_csv;
  std::string a_field_csv;
  bool second = true;
};

struct MaximizeConfig {
  /// Constant initial density; negative selects (alpha + beta) / 2.
  double sigma0 = -1.0;
  std::string sigma0_csv;
  double step0 = 0.0;
  int max_iter = 5000;
  double tol = 1e-8;
  int stall_steps = 3;
  int max_backtrack = 30;
  double classify_tol = 1e-3;
  int vi_samples = 20;
};

struct MinimizeConfig {
  double tol = 1e-10;
  int max_outer = 200;
  double lambda_tol = 1e-12;
  double residual_tol = 1e-9;
  double cg_tol = 1e-11;
  int eig_max_iter = 4000;
  double verify_tol = 1e-6;
  int laminate_samples = 20;
  double classify_tol = 1e-3;
};

struct LaminateConfig {
  double theta = 0.5;
  Vec2 e{1.0, 0.0};
  std::optional<SymMat2> H;
  std::vector<double> eps;
};

struct ClassifyConfig {
  int grid = 21;
  double radius = 1.0;
};

struct DecayConfig {
  double dt = 1e-3;
  /// Negative selects 1 / lambda1.
  double t_end = -1.0;
  /// "eigenfunction" or "random".
  std::string initial = "eigenfunction";
  double cg_tol = 1e-13;
};

struct VerifyConfig {
  std::string input;
  double tol = 1e-6;
};

struct RunConfig {
  MeshConfig mesh;
  BoundsConfig bounds;
  EigenOptions solver;
  std::uint64_t seed = 1;
  EigConfig eig;
  MaximizeConfig maximize;
  MinimizeConfig minimize;
  LaminateConfig laminate;
  ClassifyConfig classify;
  DecayConfig decay;
  VerifyConfig verify;
  /// Output directory; overridden by --out and never echoed, so runs into different directories compare equal.
  std::string output = "out";
  /// Blocks present in the source file (bounds are optional for `verify`).
  bool has_bounds = false;

  ControlBounds control_bounds() const {
    return ControlBounds(bounds.mu0, bounds.mu1, bounds.alpha, bounds.beta, bounds.A0, bounds.A1);
  }
};

namespace detail {

/// Reads keys from one JSON object and rejects anything it did not consume.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorKind::Validation, where() + " must be a JSON object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  template <class T>
  void opt(const std::string& k, T& out) {
    if (!j_.contains(k)) return;
    used_.insert(k);
    try {
      out = j_.at(k).get<T>();
    } catch (const json::exception&) {
      throw Error(ErrorKind::Validation, key(k) + " has the wrong type");
    }
  }

  void opt_mat(const std::string& k, SymMat2& out) {
    if (!j_.contains(k)) return;
    used_.insert(k);
    out = mat(j_.at(k), key(k));
  }

  void opt_vec(const std::string& k, Vec2& out) {
    if (!j_.contains(k)) return;
    used_.insert(k);
    const json& v = j_.at(k);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw Error(ErrorKind::Validation, key(k) + " must be [x1, x2]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }

  template <class T>
  void req(const std::string& k, T& out) {
    if (!j_.contains(k)) throw Error(ErrorKind::Validation, "missing required key " + key(k));
    opt(k, out);
  }

  void req_mat(const std::string& k, SymMat2& out) {
    if (!j_.contains(k)) throw Error(ErrorKind::Validation, "missing required key " + key(k));
    opt_mat(k, out);
  }

  std::optional<Reader> sub(const std::string& k) {
    if (!j_.contains(k)) return std::nullopt;
    used_.insert(k);
    return Reader(j_.at(k), key(k));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw Error(ErrorKind::Validation, "unknown key " + key(it.key()));
    }
  }

  static SymMat2 mat(const json& v, const std::string& name) {
    if (!v.is_array() || v.size() != 3) throw Error(ErrorKind::Validation, name + " must be [a11, a12, a22]");
    for (const auto& x : v) {
      if (!x.is_number()) throw Error(ErrorKind::Validation, name + " entries must be numbers");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }
  std::string key(const std::string& k) const { return "'" + (path_.empty() ? k : path_ + "." + k) + "'"; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline json mat_json(const SymMat2& a) { return json::array({a.a11, a.a12, a.a22}); }

inline void positive(double v, const char* name) {
  if (!(v > 0.0)) throw Error(ErrorKind::Validation, std::string(name) + " must be positive");
}

inline void positive(int v, const char* name) {
  if (v <= 0) throw Error(ErrorKind::Validation, std::string(name) + " must be positive");
}

}  // namespace detail

inline RunConfig parse(const json& j) {
  RunConfig c;
  detail::Reader root(j, "");
  if (auto r = root.sub("mesh")) {
    r->opt("x_min", c.mesh.x_min);
    r->opt("x_max", c.mesh.x_max);
    r->opt("y_min", c.mesh.y_min);
    r->opt("y_max", c.mesh.y_max);
    r->opt("nx", c.mesh.nx);
    r->opt("ny", c.mesh.ny);
    r->finish();
  }
  if (auto r = root.sub("bounds")) {
    c.has_bounds = true;
    r->req("mu0", c.bounds.mu0);
    r->req("mu1", c.bounds.mu1);
    r->opt("alpha", c.bounds.alpha);
    r->opt("beta", c.bounds.beta);
    r->req_mat("A0", c.bounds.A0);
    r->req_mat("A1", c.bounds.A1);
    r->finish();
  }
  if (auto r = root.sub("solver")) {
    r->opt("lambda_tol", c.solver.lambda_tol);
    r->opt("residual_tol", c.solver.residual_tol);
    r->opt("cg_tol", c.solver.cg_tol);
    r->opt("max_iter", c.solver.max_iter);
    r->finish();
  }
  root.opt("seed", c.seed);
  root.opt("output", c.output);
  if (auto r = root.sub("eig")) {
    r->opt("sigma", c.eig.sigma);
    r->opt("sigma_csv", c.eig.sigma_csv);
    r->opt("a_field_csv", c.eig.a_field_csv);
    r->opt("second", c.eig.second);
    r->finish();
  }
  if (auto r = root.sub("maximize")) {
    auto& m = c.maximize;
    r->opt("sigma0", m.sigma0);
    r->opt("sigma0_csv", m.sigma0_csv);
    r->opt("step0", m.step0);
    r->opt("max_iter", m.max_iter);
    r->opt("tol", m.tol);
    r->opt("stall_steps", m.stall_steps);
    r->opt("max_backtrack", m.max_backtrack);
    r->opt("classify_tol", m.classify_tol);
    r->opt("vi_samples", m.vi_samples);
    r->finish();
  }
  if (auto r = root.sub("minimize")) {
    auto& m = c.minimize;
    r->opt("tol", m.tol);
    r->opt("max_outer", m.max_outer);
    r->opt("lambda_tol", m.lambda_tol);
    r->opt("residual_tol", m.residual_tol);
    r->opt("cg_tol", m.cg_tol);
    r->opt("eig_max_iter", m.eig_max_iter);
    r->opt("verify_tol", m.verify_tol);
    r->opt("laminate_samples", m.laminate_samples);
    r->opt("classify_tol", m.classify_tol);
    r->finish();
  }
  if (auto r = root.sub("laminate")) {
    auto& l = c.laminate;
    r->opt("theta", l.theta);
    r->opt_vec("e", l.e);
    if (r->has("H")) {
      SymMat2 h;
      r->opt_mat("H", h);
      l.H = h;
    }
    r->opt("eps", l.eps);
    r->finish();
  }
  if (auto r = root.sub("classify")) {
    r->opt("grid", c.classify.grid);
    r->opt("radius", c.classify.radius);
    r->finish();
  }
  if (auto r = root.sub("decay")) {
    r->opt("dt", c.decay.dt);
    r->opt("t_end", c.decay.t_end);
    r->opt("initial", c.decay.initial);
    r->opt("cg_tol", c.decay.cg_tol);
    r->finish();
  }
  if (auto r = root.sub("verify")) {
    r->opt("input", c.verify.input);
    r->opt("tol", c.verify.tol);
    r->finish();
  }
  root.finish();
  return c;
}

/// Checks that do not depend on the command; bounds are validated through ControlBounds.
inline void validate(const RunConfig& c, bool bounds_required = true) {
  using detail::positive;
  if (bounds_required && !c.has_bounds) throw Error(ErrorKind::Validation, "missing required block 'bounds'");
  if (c.has_bounds) (void)c.control_bounds();
  if (c.mesh.nx < 2 || c.mesh.ny < 2) throw Error(ErrorKind::Validation, "mesh.nx and mesh.ny must be >= 2");
  if (!(c.mesh.x_max > c.mesh.x_min) || !(c.mesh.y_max > c.mesh.y_min)) {
    throw Error(ErrorKind::Validation, "mesh corners require x_max > x_min and y_max > y_min");
  }
  positive(c.solver.lambda_tol, "solver.lambda_tol");
  positive(c.solver.residual_tol, "solver.residual_tol");
  positive(c.solver.cg_tol, "solver.cg_tol");
  positive(c.solver.max_iter, "solver.max_iter");
  if (!c.eig.sigma_csv.empty() && !c.eig.a_field_csv.empty()) {
    throw Error(ErrorKind::Validation, "eig: give at most one of sigma_csv and a_field_csv");
  }
  if (!(c.eig.sigma >= 0.0 && c.eig.sigma <= 1.0)) throw Error(ErrorKind::Validation, "eig.sigma must lie in [0,1]");
  positive(c.maximize.max_iter, "maximize.max_iter");
  positive(c.maximize.tol, "maximize.tol");
  positive(c.maximize.stall_steps, "maximize.stall_steps");
  if (c.maximize.max_backtrack < 0) throw Error(ErrorKind::Validation, "maximize.max_backtrack must be >= 0");
  if (c.maximize.sigma0 > 1.0) throw Error(ErrorKind::Validation, "maximize.sigma0 must lie in [0,1]");
  if (c.maximize.vi_samples < 0) throw Error(ErrorKind::Validation, "maximize.vi_samples must be >= 0");
  positive(c.minimize.tol, "minimize.tol");
  positive(c.minimize.max_outer, "minimize.max_outer");
  positive(c.minimize.verify_tol, "minimize.verify_tol");
  if (c.minimize.laminate_samples < 0) throw Error(ErrorKind::Validation, "minimize.laminate_samples must be >= 0");
  if (!(c.laminate.theta >= 0.0 && c.laminate.theta <= 1.0)) {
    throw Error(ErrorKind::Validation, "laminate.theta must lie in [0,1]");
  }
  if (!(std::abs(norm(c.laminate.e) - 1.0) <= 1e-12)) throw Error(ErrorKind::Validation, "laminate.e must be a unit vector");
  for (double e : c.laminate.eps) positive(e, "laminate.eps entries");
  if (c.classify.grid < 2) throw Error(ErrorKind::Validation, "classify.grid must be >= 2");
  positive(c.classify.radius, "classify.radius");
  positive(c.decay.dt, "decay.dt");
  if (c.decay.initial != "eigenfunction" && c.decay.initial != "random") {
    throw Error(ErrorKind::Validation, "decay.initial must be 'eigenfunction' or 'random'");
  }
  positive(c.decay.cg_tol, "decay.cg_tol");
  positive(c.verify.tol, "verify.tol");
}

inline RunConfig load(const std::filesystem::path& p) {
  std::ifstream f(p);
  if (!f) throw Error(ErrorKind::Validation, "cannot open config " + p.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Validation, "config is not valid JSON: " + std::string(e.what()));
  }
  return parse(j);
}

/// Normalized echo with every default filled in; parse(echo(c)) reproduces c.
inline json echo(const RunConfig& c) {
  using detail::mat_json;
  json j;
  j["mesh"] = {{"x_min", c.mesh.x_min}, {"x_max", c.mesh.x_max}, {"y_min", c.mesh.y_min},
               {"y_max", c.mesh.y_max}, {"nx", c.mesh.nx},       {"ny", c.mesh.ny}};
  if (c.has_bounds) {
    j["bounds"] = {{"mu0", c.bounds.mu0},     {"mu1", c.bounds.mu1},          {"alpha", c.bounds.alpha},
                   {"beta", c.bounds.beta},   {"A0", mat_json(c.bounds.A0)}, {"A1", mat_json(c.bounds.A1)}};
  }
  j["solver"] = {{"lambda_tol", c.solver.lambda_tol},
                 {"residual_tol", c.solver.residual_tol},
                 {"cg_tol", c.solver.cg_tol},
                 {"max_iter", c.solver.max_iter}};
  j["seed"] = c.seed;
  j["eig"] = {{"sigma", c.eig.sigma},
              {"sigma_csv", c.eig.sigma_csv},
              {"a_field_csv", c.eig.a_field_csv},
              {"second", c.eig.second}};
  const auto& mx = c.maximize;
  j["maximize"] = {{"sigma0", mx.sigma0},         {"sigma0_csv", mx.sigma0_csv},     {"step0", mx.step0},
                   {"max_iter", mx.max_iter},     {"tol", mx.tol},                   {"stall_steps", mx.stall_steps},
                   {"max_backtrack", mx.max_backtrack}, {"classify_tol", mx.classify_tol}, {"vi_samples", mx.vi_samples}};
  const auto& mn = c.minimize;
  j["minimize"] = {{"tol", mn.tol},
                   {"max_outer", mn.max_outer},
                   {"lambda_tol", mn.lambda_tol},
                   {"residual_tol", mn.residual_tol},
                   {"cg_tol", mn.cg_tol},
                   {"eig_max_iter", mn.eig_max_iter},
                   {"verify_tol", mn.verify_tol},
                   {"laminate_samples", mn.laminate_samples},
                   {"classify_tol", mn.classify_tol}};
  j["laminate"] = {{"theta", c.laminate.theta},
                   {"e", json::array({c.laminate.e.x1, c.laminate.e.x2})},
                   {"eps", c.laminate.eps}};
  if (c.laminate.H) j["laminate"]["H"] = mat_json(*c.laminate.H);
  j["classify"] = {{"grid", c.classify.grid}, {"radius", c.classify.radius}};
  j["decay"] = {{"dt", c.decay.dt}, {"t_end", c.decay.t_end}, {"initial", c.decay.initial}, {"cg_tol", c.decay.cg_tol}};
  j["verify"] = {{"input", c.verify.input}, {"tol", c.verify.tol}};
  return j;
}

}  // namespace pev::config
