#pragma once

// Command dispatch for the pev command-line tool. Each command reads a
// validated RunConfig, writes its CSV outputs and a <command>_report.json
// summary into the output directory, and returns a process exit code.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pev/config.hpp"
#include "pev/pev.hpp"

namespace pev::app {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitChecksFailed = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNoConvergence = 3;

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"eig", "maximize", "minimize", "laminate", "classify", "decay", "verify"};
  return c;
}

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::NoConvergence:
    case ErrorKind::NoProgress: return kExitNoConvergence;
    case ErrorKind::SingularMatrix:
    case ErrorKind::SingularQ:
    case ErrorKind::DegenerateDenominator: return kExitChecksFailed;
    default: return kExitValidation;
  }
}

/// JSON null for non-finite values (JSON has no NaN).
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json mat_json(const SymMat2& a) { return json::array({a.a11, a.a12, a.a22}); }

struct Context {
  config::RunConfig cfg;
  std::string command;
  fs::path out;
  /// Directory that relative CSV paths in the config are resolved against.
  fs::path base;

  fs::path input(const std::string& p) const {
    const fs::path q(p);
    return q.is_absolute() ? q : base / q;
  }

  Mesh2D mesh() const {
    const auto& m = cfg.mesh;
    return build_mesh(m.x_min, m.x_max, m.y_min, m.y_max, m.nx, m.ny);
  }

  json summary() const {
    json j;
    j["command"] = command;
    j["config"] = config::echo(cfg);
    j["seed"] = cfg.seed;
    j["version"] = kVersion;
    return j;
  }
};

inline void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + p.string() + " for writing");
  f << j.dump(2) << '\n';
}

inline void write_mesh(const Context& ctx, const Mesh2D& mesh) {
  csv::write_vertices(ctx.out / "vertices.csv", mesh);
  csv::write_elements(ctx.out / "elements.csv", mesh);
}

/// Coefficient field from the eig block: a-field CSV, sigma CSV, or constant sigma.
inline ElementField<SymMat2> load_coefficient(const Context& ctx, const Mesh2D& mesh, const ControlBounds& b) {
  const auto& e = ctx.cfg.eig;
  if (!e.a_field_csv.empty()) {
    auto a = csv::read_matrix_field(ctx.input(e.a_field_csv), mesh);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!in_bounds(a[i], b.mu0, b.mu1)) {
        throw Error(ErrorKind::Validation, "a-field element " + std::to_string(i) + " is not in M[mu0, mu1]");
      }
    }
    return a;
  }
  if (!e.sigma_csv.empty()) return coefficient_from_density(csv::read_density(ctx.input(e.sigma_csv), mesh), b);
  return coefficient_from_density(constant_density(mesh, e.sigma), b);
}

inline json pair_json(const EigenPair& p) {
  return {{"lambda", p.lambda},
          {"residual", p.residual},
          {"iterations", p.iterations},
          {"positivity_warning", p.positivity_warning}};
}

inline json kkt_json(const KktRecord& k) {
  return {{"intermediate_constant", k.intermediate_constant},
          {"cv_intermediate", finite_or_null(k.cv_intermediate)},
          {"ordering_violation", k.ordering_violation},
          {"relative_ordering_violation", k.relative_ordering_violation},
          {"g_range", k.g_range},
          {"volume", k.volume},
          {"volume_case", to_string(k.volume_case)},
          {"sign_residual", k.sign_residual},
          {"classify_tol", k.classify_tol},
          {"count_zero", k.count_zero},
          {"count_intermediate", k.count_intermediate},
          {"count_one", k.count_one},
          {"empty_intermediate", k.empty_intermediate}};
}

/// Feasible comparison densities: projections of uniform random fields.
inline std::vector<DensityField> random_feasible(const Mesh2D& mesh, const ControlBounds& b, int count,
                                                 std::uint64_t seed) {
  Uniform rng(seed);
  std::vector<DensityField> out;
  for (int i = 0; i < count; ++i) {
    ElementField<double> raw(mesh.num_elements());
    for (auto& v : raw) v = rng();
    out.push_back(project_density(mesh, raw, b));
  }
  return out;
}

inline int cmd_eig(const Context& ctx) {
  const ControlBounds b = ctx.cfg.control_bounds();
  const Mesh2D mesh = ctx.mesh();
  const auto a = load_coefficient(ctx, mesh, b);
  const SparseSym K = assemble_stiffness(mesh, a);
  const SparseSym M = assemble_mass(mesh);
  const EigenPair pair = principal_pair(K, M, ctx.cfg.solver);

  json j = ctx.summary();
  j["lambda"] = pair.lambda;
  j["eigenpair"] = pair_json(pair);
  j["mesh"] = {{"vertices", mesh.num_vertices()}, {"elements", mesh.num_elements()}, {"dofs", mesh.num_dofs()}};
  if (ctx.cfg.eig.second) {
    const SpectralReport s = second_eigenvalue(K, M, pair, ctx.cfg.solver);
    j["spectral"] = {{"lambda1", s.lambda1}, {"lambda2", s.lambda2}, {"gap", s.gap}, {"iterations", s.iterations}};
  }
  write_mesh(ctx, mesh);
  csv::write_nodal_field(ctx.out / "nodal_field.csv", mesh.extend(pair.y));
  csv::write_element_field(ctx.out / "element_field.csv", a);
  write_json(ctx.out / "eig_report.json", j);
  return kExitOk;
}

inline int cmd_maximize(const Context& ctx) {
  const ControlBounds b = ctx.cfg.control_bounds();
  const Mesh2D mesh = ctx.mesh();
  const auto& mc = ctx.cfg.maximize;

  DensityField sigma0 = !mc.sigma0_csv.empty()
                            ? csv::read_density(ctx.input(mc.sigma0_csv), mesh)
                            : constant_density(mesh, mc.sigma0 >= 0.0 ? mc.sigma0 : 0.5 * (b.alpha + b.beta));
  if (!is_feasible(mesh, sigma0, b)) throw Error(ErrorKind::Validation, "maximize: initial density is not in Sigma[alpha, beta]");

  AscentOptions opt;
  opt.step0 = mc.step0;
  opt.max_iter = mc.max_iter;
  opt.tol = mc.tol;
  opt.stall_steps = mc.stall_steps;
  opt.max_backtrack = mc.max_backtrack;
  opt.classify_tol = mc.classify_tol;
  opt.eig = ctx.cfg.solver;
  const OptimReport rep = ascend(b, mesh, sigma0, opt);

  const auto g = density_gradient(mesh, b, rep.pair);
  const auto others = random_feasible(mesh, b, mc.vi_samples, ctx.cfg.seed);
  const double vi = others.empty() ? 0.0 : variational_residual(mesh, g, rep.sigma_final, others);
  const double omega = mesh.domain_area();

  json j = ctx.summary();
  j["lambda"] = rep.pair.lambda;
  j["lambda_initial"] = rep.lambda_history.front();
  j["histories"] = {{"lambda", rep.lambda_history}};
  j["kkt"] = kkt_json(rep.kkt);
  j["volume_fraction"] = rep.kkt.volume / omega;
  j["variational_residual"] = vi;
  j["variational_residual_relative"] = vi / rep.pair.lambda;
  j["vi_samples"] = mc.vi_samples;
  j["iterations"] = rep.iterations;
  j["step0"] = rep.step0;
  j["converged"] = rep.converged;
  j["eigenpair"] = pair_json(rep.pair);

  write_mesh(ctx, mesh);
  csv::write_element_field(ctx.out / "sigma.csv", rep.sigma_final.sigma, "sigma");
  csv::write_element_field(ctx.out / "element_field.csv", coefficient_from_density(rep.sigma_final, b));
  csv::write_nodal_field(ctx.out / "nodal_field.csv", mesh.extend(rep.pair.y));
  write_json(ctx.out / "maximize_report.json", j);
  return rep.converged ? kExitOk : kExitNoConvergence;
}

inline json region_counts_json(const std::array<std::size_t, 5>& c) {
  json j;
  for (int r = 0; r < 5; ++r) j[to_string(static_cast<Region>(r))] = c[static_cast<std::size_t>(r)];
  return j;
}

inline json violations_json(const PointwiseViolations& v) {
  return {{"in_A0", v.in_A0},
          {"in_A1", v.in_A1},
          {"equality_on_laminates", v.equality_on_laminates},
          {"against_laminates", v.against_laminates},
          {"laminate_samples", v.laminate_samples},
          {"max", std::max({v.in_A0, v.in_A1, v.equality_on_laminates, v.against_laminates})}};
}

inline json bangbang_json(const BangBangReport& bb) {
  return {{"psi_median", finite_or_null(bb.psi_median)},
          {"psi", bb.psi},
          {"interior_volume", bb.interior_volume},
          {"multiplier_mu0", bb.multiplier_mu0},
          {"multiplier_psi", bb.multiplier_psi},
          {"mu0_zero_candidate", bb.mu0_zero_candidate},
          {"structure_violation", bb.structure_violation},
          {"max_relative_h_fractional", bb.max_relative_h_fractional},
          {"fractional_count", bb.fractional_count}};
}

inline void write_min_fields(const Context& ctx, const Mesh2D& mesh, const MinReport& rep, const BangBangReport& bb) {
  std::vector<std::string> labels(rep.regions.size());
  for (std::size_t e = 0; e < labels.size(); ++e) labels[e] = to_string(rep.regions[e]);
  write_mesh(ctx, mesh);
  csv::write_nodal_field(ctx.out / "nodal_field.csv", mesh.extend(rep.y));
  csv::write_element_field(ctx.out / "element_field.csv", rep.a_field);
  csv::write_element_labels(ctx.out / "regions.csv", labels, "region");
  csv::write_element_field(ctx.out / "h_field.csv", bb.h, "h");
  csv::write_element_field(ctx.out / "sigma_proxy.csv", bb.sigma, "sigma");
}

inline int cmd_minimize(const Context& ctx) {
  const ControlBounds b = ctx.cfg.control_bounds();
  const NormalForm nf = normal_form_of(b);
  const Mesh2D mesh = ctx.mesh();
  const auto& mc = ctx.cfg.minimize;

  MinOptions opt;
  opt.tol = mc.tol;
  opt.max_outer = mc.max_outer;
  opt.eig = {mc.lambda_tol, mc.residual_tol, mc.cg_tol, mc.eig_max_iter};
  MinReport rep = solve_relaxed_min(b, mesh, opt);

  const auto viol = verify_pointwise_conditions(rep, mesh, nf, mc.verify_tol,
                                                static_cast<std::size_t>(mc.laminate_samples), ctx.cfg.seed);
  const auto bb = h_field_and_bangbang(rep, mesh, nf, std::nullopt, mc.verify_tol, mc.classify_tol);
  rep.pointwise_violation_fraction = std::max({viol.in_A0, viol.in_A1, viol.equality_on_laminates, viol.against_laminates});
  rep.h_field = bb.h;

  json j = ctx.summary();
  j["lambda"] = rep.lambda;
  j["converged"] = rep.converged;
  j["outer_iterations"] = rep.outer_iterations;
  j["state_residual"] = rep.state_residual;
  j["histories"] = {{"fixed_point", rep.fixed_point_history},
                    {"functional", rep.functional_history},
                    {"descent_failures", rep.descent_failures}};
  j["region_counts"] = region_counts_json(rep.region_counts);
  j["violations"] = violations_json(viol);
  j["pointwise_violation_fraction"] = rep.pointwise_violation_fraction;
  j["bangbang"] = bangbang_json(bb);
  j["normal_form"] = {{"s", nf.s()}, {"r_lo", nf.r_lo()}, {"r_hi", nf.r_hi()}};

  write_min_fields(ctx, mesh, rep, bb);
  write_json(ctx.out / "minimize_report.json", j);
  return rep.converged ? kExitOk : kExitNoConvergence;
}

inline int cmd_laminate(const Context& ctx) {
  const ControlBounds b = ctx.cfg.control_bounds();
  const auto& lc = ctx.cfg.laminate;
  const SymMat2& A = b.A0;
  const SymMat2& B = b.A1;
  const LaminateParams lp{lc.theta, lc.e};
  const SymMat2 L = laminate(A, B, lp);
  const GammaParams gp{lc.theta, lc.H ? *lc.H : gamma_h_for_direction(B, lc.e)};
  const SymMat2 G = gamma_param(A, B, gp);
  const auto mL = bounds_check(A, B, lc.theta, L);
  const auto mG = bounds_check(A, B, lc.theta, G);

  json j = ctx.summary();
  j["laminate"] = {{"value", mat_json(L)},
                   {"eigenvalues", {eig2(L).first, eig2(L).second}},
                   {"in_bounds", in_bounds(L, b.mu0, b.mu1)},
                   {"harmonic_margin", mL.harmonic},
                   {"arithmetic_margin", mL.arithmetic}};
  j["gamma_param"] = {{"H", mat_json(gp.H)},
                      {"value", mat_json(G)},
                      {"in_bounds", in_bounds(G, b.mu0, b.mu1)},
                      {"harmonic_margin", mG.harmonic},
                      {"arithmetic_margin", mG.arithmetic},
                      {"inner_det", gamma_inner_det(A, B, gp)},
                      {"det_lower_bound", gamma_det_lower_bound(lc.theta, b.mu0, b.mu1)},
                      {"distance_to_laminate", frob(G - L)}};

  if (!lc.eps.empty()) {
    const Mesh2D mesh = ctx.mesh();
    const SparseSym M = assemble_mass(mesh);
    const double h = std::max((ctx.cfg.mesh.x_max - ctx.cfg.mesh.x_min) / ctx.cfg.mesh.nx,
                              (ctx.cfg.mesh.y_max - ctx.cfg.mesh.y_min) / ctx.cfg.mesh.ny);
    const double lam_ref = principal_pair(assemble_stiffness(mesh, constant_field(mesh, L)), M, ctx.cfg.solver).lambda;
    json study = json::array();
    ElementField<SymMat2> last;
    for (double eps : lc.eps) {
      last = build_layered_field(mesh, A, B, lp, eps);
      const double lam = principal_pair(assemble_stiffness(mesh, last), M, ctx.cfg.solver).lambda;
      study.push_back({{"eps", eps},
                       {"eps_over_h", eps / h},
                       {"lambda", lam},
                       {"relative_error", std::abs(lam - lam_ref) / lam_ref}});
    }
    j["lambda"] = lam_ref;
    j["h_limit"] = {{"lambda_laminate", lam_ref}, {"layers", study}};
    write_mesh(ctx, mesh);
    csv::write_element_field(ctx.out / "element_field.csv", last);
  }
  write_json(ctx.out / "laminate_report.json", j);
  return kExitOk;
}

inline int cmd_classify(const Context& ctx) {
  const NormalForm nf = normal_form_of(ctx.cfg.control_bounds());
  const int n = ctx.cfg.classify.grid;
  const double r = ctx.cfg.classify.radius;

  std::ofstream f(ctx.out / "classify_grid.csv", std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write classify_grid.csv");
  f << "xi1,xi2,region,F1,F2,abar11,abar12,abar22,gamma\n";
  std::array<std::size_t, 5> counts{};
  for (int jy = 0; jy < n; ++jy) {
    for (int ix = 0; ix < n; ++ix) {
      const Vec2 xi{-r + 2.0 * r * ix / (n - 1), -r + 2.0 * r * jy / (n - 1)};
      const Region reg = classify(xi, nf);
      const Vec2 F = effective_F(xi, nf);
      const AbarResult ab = abar(xi, nf);
      ++counts[static_cast<std::size_t>(reg)];
      f << csv::num(xi.x1) << ',' << csv::num(xi.x2) << ',' << to_string(reg) << ',' << csv::num(F.x1) << ','
        << csv::num(F.x2) << ',' << csv::num(ab.A.a11) << ',' << csv::num(ab.A.a12) << ',' << csv::num(ab.A.a22)
        << ',' << (ab.lam ? csv::num(ab.lam->gamma) : std::string()) << '\n';
    }
  }

  const Vec2 one{1.0, 1.0};
  const AbarResult ab = abar(one, nf);
  const Vec2 F = effective_F(one, nf);
  json j = ctx.summary();
  j["normal_form"] = {{"s", nf.s()}, {"r_lo", nf.r_lo()}, {"r_hi", nf.r_hi()}};
  j["region_counts"] = region_counts_json(counts);
  j["sample_xi_1_1"] = {{"region", to_string(classify(one, nf))},
                        {"F", {F.x1, F.x2}},
                        {"abar", mat_json(ab.A)},
                        {"gamma", ab.lam ? json(ab.lam->gamma) : json(nullptr)}};
  write_json(ctx.out / "classify_report.json", j);
  return kExitOk;
}

inline int cmd_decay(const Context& ctx) {
  const ControlBounds b = ctx.cfg.control_bounds();
  const Mesh2D mesh = ctx.mesh();
  const auto& dc = ctx.cfg.decay;
  const SparseSym K = assemble_stiffness(mesh, load_coefficient(ctx, mesh, b));
  const SparseSym M = assemble_mass(mesh);
  const EigenPair pair = principal_pair(K, M, ctx.cfg.solver);

  Vector y0 = pair.y;
  if (dc.initial == "random") {
    Uniform rng(ctx.cfg.seed);
    for (auto& v : y0) v = rng(-1.0, 1.0);
  }
  const double t_end = dc.t_end >= 0.0 ? dc.t_end : 1.0 / pair.lambda;
  const DecayTrace tr = simulate_decay(K, M, y0, dc.dt, t_end, pair.lambda, dc.cg_tol);

  double max_dev = 0.0, max_excess = -std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double ref = std::exp(-pair.lambda * tr.times[i]) * tr.norms.front();
    max_dev = std::max(max_dev, std::abs(tr.norms[i] / ref - 1.0));
    max_excess = std::max(max_excess, tr.norms[i] / ref - 1.0);
    if (i > 0 && tr.norms[i] > tr.norms[i - 1]) monotone = false;
  }

  json j = ctx.summary();
  j["lambda"] = pair.lambda;
  j["decay"] = {{"t_end", t_end},
                {"steps", tr.times.size() - 1},
                {"initial", dc.initial},
                {"max_relative_deviation_from_exp", max_dev},
                {"max_bound_excess", max_excess},
                {"norms_non_increasing", monotone},
                {"final_norm", tr.norms.back()}};
  if (tr.times.size() >= 8) j["decay"]["tail_rate"] = -tail_decay_rate(tr);
  csv::write_decay_trace(ctx.out / "decay_trace.csv", tr);
  write_json(ctx.out / "decay_report.json", j);
  return kExitOk;
}

struct Check {
  std::string name;
  double value;
  double limit;
  bool pass;
};

inline json checks_json(const std::vector<Check>& cs) {
  json a = json::array();
  for (const auto& c : cs) a.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"pass", c.pass}});
  return a;
}

inline json read_json(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw Error(ErrorKind::Io, "cannot open " + p.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Validation, p.string() + " is not valid JSON");
  }
}

/// Context rebuilt from a saved report's config echo.
inline Context replay_context(const json& report, const fs::path& dir) {
  Context c;
  c.cfg = config::parse(report.at("config"));
  config::validate(c.cfg);
  c.base = dir;
  return c;
}

inline std::vector<Check> verify_maximize(const fs::path& dir, double tol) {
  const json rep = read_json(dir / "maximize_report.json");
  const Context c = replay_context(rep, dir);
  const ControlBounds b = c.cfg.control_bounds();
  const Mesh2D mesh = c.mesh();
  const DensityField sigma = csv::read_density(dir / "sigma.csv", mesh);
  const EigenPair pair = principal_pair(assemble_stiffness(mesh, coefficient_from_density(sigma, b)),
                                        assemble_mass(mesh), c.cfg.solver);
  const auto g = density_gradient(mesh, b, pair);
  const auto others = random_feasible(mesh, b, c.cfg.maximize.vi_samples, c.cfg.seed);
  const double vi = others.empty() ? 0.0 : variational_residual(mesh, g, sigma, others);
  const double omega = mesh.domain_area();
  const double vol = volume(mesh, sigma);
  const double lam_saved = rep.at("lambda").get<double>();

  std::vector<Check> out;
  const double dl = std::abs(pair.lambda - lam_saved) / lam_saved;
  out.push_back({"maximize.lambda_reproduced", dl, 1e-8, dl <= 1e-8});
  out.push_back({"maximize.feasible", is_feasible(mesh, sigma, b) ? 0.0 : 1.0, 0.0, is_feasible(mesh, sigma, b)});
  const double vexcess = std::max(b.alpha * omega - vol, vol - b.beta * omega) / omega;
  out.push_back({"maximize.volume_window", vexcess, 1e-12, vexcess <= 1e-12});
  out.push_back({"maximize.variational_inequality", vi / pair.lambda, tol, vi <= tol * pair.lambda});
  const auto& hist = rep.at("histories").at("lambda");
  double worst = 0.0;
  for (std::size_t i = 1; i < hist.size(); ++i) worst = std::max(worst, hist[i - 1].get<double>() - hist[i].get<double>());
  out.push_back({"maximize.history_non_decreasing", worst, 0.0, worst <= 0.0});
  return out;
}

inline std::vector<Check> verify_minimize(const fs::path& dir, double tol) {
  const json rep = read_json(dir / "minimize_report.json");
  const Context c = replay_context(rep, dir);
  const NormalForm nf = normal_form_of(c.cfg.control_bounds());
  const Mesh2D mesh = c.mesh();

  MinReport r;
  r.lambda = rep.at("lambda").get<double>();
  r.a_field = csv::read_matrix_field(dir / "element_field.csv", mesh);
  r.y = mesh.restrict_to_interior(csv::read_nodal_field(dir / "nodal_field.csv", mesh));
  r.generating_gradient = element_gradients(mesh, mesh.extend(r.y));
  r.regions.resize(mesh.num_elements());
  for (std::size_t e = 0; e < r.regions.size(); ++e) r.regions[e] = classify(r.generating_gradient[e], nf);

  const auto& mc = c.cfg.minimize;
  const auto v = verify_pointwise_conditions(r, mesh, nf, mc.verify_tol, static_cast<std::size_t>(mc.laminate_samples),
                                             c.cfg.seed);
  const auto bb = h_field_and_bangbang(r, mesh, nf, std::nullopt, mc.verify_tol, mc.classify_tol);
  const double vmax = std::max({v.in_A0, v.in_A1, v.equality_on_laminates, v.against_laminates});

  double consistency = 0.0;
  for (std::size_t e = 0; e < r.a_field.size(); ++e) {
    consistency = std::max(consistency, frob(r.a_field[e] - abar(r.generating_gradient[e], nf).A));
  }

  std::vector<Check> out;
  out.push_back({"minimize.pointwise_violation_fraction", vmax, 0.01, vmax <= 0.01});
  out.push_back({"minimize.bangbang_structure_violation", bb.structure_violation, 0.01, bb.structure_violation <= 0.01});
  out.push_back({"minimize.a_field_matches_abar", consistency, tol, consistency <= tol});
  const auto& fh = rep.at("histories").at("functional");
  double worst = 0.0;
  for (std::size_t i = 1; i < fh.size(); ++i) worst = std::max(worst, fh[i].get<double>() - fh[i - 1].get<double>());
  out.push_back({"minimize.functional_non_increasing", worst / r.lambda, 1e-8, worst <= 1e-8 * r.lambda});
  return out;
}

inline int cmd_verify(const Context& ctx) {
  if (ctx.cfg.verify.input.empty()) throw Error(ErrorKind::Validation, "verify.input must name a run directory");
  const fs::path dir = ctx.input(ctx.cfg.verify.input);
  const bool has_max = fs::exists(dir / "maximize_report.json");
  const bool has_min = fs::exists(dir / "minimize_report.json");
  if (!has_max && !has_min) {
    throw Error(ErrorKind::Validation, "verify: no maximize_report.json or minimize_report.json in " + dir.string());
  }
  std::vector<Check> checks;
  if (has_max) {
    auto c = verify_maximize(dir, ctx.cfg.verify.tol);
    checks.insert(checks.end(), c.begin(), c.end());
  }
  if (has_min) {
    auto c = verify_minimize(dir, ctx.cfg.verify.tol);
    checks.insert(checks.end(), c.begin(), c.end());
  }
  bool all = true;
  for (const auto& c : checks) all = all && c.pass;

  json j = ctx.summary();
  j["checks"] = checks_json(checks);
  j["all_pass"] = all;
  write_json(ctx.out / "verify_report.json", j);
  return all ? kExitOk : kExitChecksFailed;
}

/// Runs one command. `out_override` replaces the config's output directory.
inline int run(const std::string& command, const fs::path& config_path, const std::optional<fs::path>& out_override,
               std::ostream& err = std::cerr) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    bool known = false;
    for (const auto& c : commands()) known = known || c == command;
    if (!known) throw Error(ErrorKind::Validation, "unknown command '" + command + "'");

    Context ctx;
    ctx.command = command;
    ctx.cfg = config::load(config_path);
    config::validate(ctx.cfg, command != "verify");
    ctx.base = config_path.has_parent_path() ? config_path.parent_path() : fs::path(".");
    ctx.out = out_override ? *out_override : fs::path(ctx.cfg.output);
    fs::create_directories(ctx.out);

    int code = kExitOk;
    if (command == "eig") code = cmd_eig(ctx);
    else if (command == "maximize") code = cmd_maximize(ctx);
    else if (command == "minimize") code = cmd_minimize(ctx);
    else if (command == "laminate") code = cmd_laminate(ctx);
    else if (command == "classify") code = cmd_classify(ctx);
    else if (command == "decay") code = cmd_decay(ctx);
    else code = cmd_verify(ctx);

    // wall_clock is the only field allowed to differ between identical runs.
    const fs::path report = ctx.out / (command + "_report.json");
    json j = read_json(report);
    j["wall_clock"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_json(report, j);
    if (code == kExitNoConvergence) err << "error: solver did not converge (outputs written for diagnosis)\n";
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace pev::app
