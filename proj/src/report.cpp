#include "hypersub/report.hpp"

#include "hypersub/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace hypersub {

using nlohmann::ordered_json;

std::string_view to_string(Command c) {
  switch (c) {
    case Command::VerifyIdentities: return "verify-identities";
    case Command::Converge: return "converge";
    case Command::Simulate: return "simulate";
    case Command::RadialCompare: return "radial-compare";
  }
  return "?";
}

Command parse_command(std::string_view name) {
  for (Command c : {Command::VerifyIdentities, Command::Converge, Command::Simulate, Command::RadialCompare})
    if (to_string(c) == name) return c;
  throw ArgumentError("unknown command '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

struct TolField {
  const char* key;
  double Tolerances::*member;
};

constexpr TolField kTolFields[] = {
    {"normalization", &Tolerances::normalization},
    {"reeb_omega", &Tolerances::reeb_omega},
    {"reeb_d_omega", &Tolerances::reeb_d_omega},
    {"normal", &Tolerances::normal},
    {"normal_order", &Tolerances::normal_order},
    {"volume", &Tolerances::volume},
    {"volume_exact", &Tolerances::volume_exact},
    {"divergence", &Tolerances::divergence},
    {"frame_divergence", &Tolerances::frame_divergence},
    {"structure", &Tolerances::structure},
    {"bracket", &Tolerances::bracket},
    {"kernel_angle", &Tolerances::kernel_angle},
    {"sublaplacian", &Tolerances::sublaplacian},
    {"convergence_order", &Tolerances::convergence_order},
    {"ks", &Tolerances::ks},
    {"hit_fraction", &Tolerances::hit_fraction},
    {"retraction", &Tolerances::retraction},
    {"moment_floor", &Tolerances::moment_floor},
    {"moment_sigmas", &Tolerances::moment_sigmas},
};

void reject_unknown(const ordered_json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ArgumentError(where + " must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ArgumentError("unknown key '" + key + "' in " + where);
}

void parse_simulation(const ordered_json& s, SimConfig& sim) {
  reject_unknown(s,
                 {"r0", "step", "horizon", "paths", "hit_threshold", "guard_radius", "snapshot_times",
                  "randomize_angles", "threads", "fd_step", "fd_richardson"},
                 "simulation");
  if (s.contains("r0")) sim.r0 = s["r0"].get<double>();
  if (s.contains("step")) sim.step = s["step"].get<double>();
  if (s.contains("horizon")) sim.horizon = s["horizon"].get<double>();
  if (s.contains("paths")) sim.paths = s["paths"].get<std::uint64_t>();
  if (s.contains("hit_threshold")) sim.hit_threshold = s["hit_threshold"].get<double>();
  if (s.contains("guard_radius")) sim.guard_radius = s["guard_radius"].get<double>();
  if (s.contains("snapshot_times")) sim.snapshot_times = s["snapshot_times"].get<std::vector<double>>();
  if (s.contains("randomize_angles")) sim.randomize_angles = s["randomize_angles"].get<bool>();
  if (s.contains("threads")) sim.threads = s["threads"].get<unsigned>();
  if (s.contains("fd_step")) sim.fd_step = s["fd_step"].get<double>();
  if (s.contains("fd_richardson")) sim.fd_richardson = s["fd_richardson"].get<bool>();
}

}  // namespace

void RunConfig::finalize() {
  if (n < 1 || n > 3) throw ArgumentError("n must be in 1..3");
  if (!(k > 0.0) || !std::isfinite(k)) throw ArgumentError("k must be positive");
  if (samples < 1 || grid_points < 1 || convergence_points < 1) throw ArgumentError("sample counts must be positive");
  if (!(normal_margin >= 0.2)) throw ArgumentError("normal_margin must be at least 0.2");
  if (histogram_bins < 1) throw ArgumentError("histogram_bins must be positive");
  if (eps.size() < 2 || normal_eps.size() < 2) throw ArgumentError("eps schedules need at least two entries");
  for (double e : eps)
    if (!(e > 0.0)) throw ArgumentError("eps values must be positive");
  for (double e : normal_eps)
    if (!(e > 0.0)) throw ArgumentError("eps values must be positive");
  for (const auto& f : kTolFields)
    if (!(tol.*f.member > 0.0)) throw ArgumentError(std::string("tolerance '") + f.key + "' must be positive");
  if (output_dir.empty()) throw ArgumentError("output directory must not be empty");
  sim.family = family;
  sim.n = n;
  sim.k = k;
  sim.seed = seed;
  sim.validate();
}

RunConfig parse_run_config(const ordered_json& doc) {
  RunConfig cfg;
  try {
    reject_unknown(doc,
                   {"command", "model", "seed", "output_dir", "samples", "grid_points", "convergence_points", "eps",
                    "normal_eps", "normal_margin", "histogram_bins", "tolerances", "simulation"},
                   "config");
    if (doc.contains("command")) cfg.command = parse_command(doc["command"].get<std::string>());
    if (doc.contains("model")) {
      const auto& m = doc["model"];
      reject_unknown(m, {"family", "n", "k"}, "model");
      if (m.contains("family")) cfg.family = parse_family(m["family"].get<std::string>());
      if (m.contains("n")) cfg.n = m["n"].get<int>();
      if (m.contains("k")) cfg.k = m["k"].get<double>();
    }
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
    if (doc.contains("samples")) cfg.samples = doc["samples"].get<int>();
    if (doc.contains("grid_points")) cfg.grid_points = doc["grid_points"].get<int>();
    if (doc.contains("convergence_points")) cfg.convergence_points = doc["convergence_points"].get<int>();
    if (doc.contains("eps")) cfg.eps = doc["eps"].get<std::vector<double>>();
    if (doc.contains("normal_eps")) cfg.normal_eps = doc["normal_eps"].get<std::vector<double>>();
    if (doc.contains("normal_margin")) cfg.normal_margin = doc["normal_margin"].get<double>();
    if (doc.contains("histogram_bins")) cfg.histogram_bins = doc["histogram_bins"].get<int>();
    if (doc.contains("tolerances")) {
      const auto& t = doc["tolerances"];
      std::set<std::string> keys;
      for (const auto& f : kTolFields) keys.insert(f.key);
      reject_unknown(t, keys, "tolerances");
      for (const auto& f : kTolFields)
        if (t.contains(f.key)) cfg.tol.*f.member = t[f.key].get<double>();
    }
    if (doc.contains("simulation")) parse_simulation(doc["simulation"], cfg.sim);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read config file '" + path + "'");
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

// Output directory and thread count are left out: neither may change results.
ordered_json to_json(const RunConfig& cfg) {
  ordered_json j;
  j["command"] = std::string(to_string(cfg.command));
  j["model"] = {{"family", std::string(to_string(cfg.family))}, {"n", cfg.n}, {"k", cfg.k}};
  j["seed"] = cfg.seed;
  switch (cfg.command) {
    case Command::VerifyIdentities:
      j["samples"] = cfg.samples;
      j["grid_points"] = cfg.grid_points;
      j["normal_eps"] = cfg.normal_eps;
      j["normal_margin"] = cfg.normal_margin;
      break;
    case Command::Converge:
      j["convergence_points"] = cfg.convergence_points;
      j["eps"] = cfg.eps;
      break;
    case Command::Simulate:
    case Command::RadialCompare: {
      const SimConfig& s = cfg.sim;
      j["simulation"] = {{"r0", s.r0},
                         {"step", s.step},
                         {"horizon", s.horizon},
                         {"paths", s.paths},
                         {"hit_threshold", s.hit_threshold},
                         {"guard_radius", s.guard_radius},
                         {"snapshot_times", s.snapshots()},
                         {"randomize_angles", s.randomize_angles},
                         {"fd_step", s.fd_step},
                         {"fd_richardson", s.fd_richardson}};
      if (cfg.command == Command::RadialCompare) j["histogram_bins"] = cfg.histogram_bins;
      break;
    }
  }
  ordered_json t;
  for (const auto& f : kTolFields) t[f.key] = cfg.tol.*f.member;
  j["tolerances"] = t;
  return j;
}

// ---------------------------------------------------------------------------
// Reports

const CheckRecord& SuiteReport::check(std::string name, std::string anchor, double measured, double threshold,
                                      Relation relation) {
  bool pass = false;
  switch (relation) {
    case Relation::AtMost: pass = measured <= threshold; break;
    case Relation::AtLeast: pass = measured >= threshold; break;
    case Relation::Below: pass = measured < threshold; break;
  }
  records.push_back({std::move(name), std::move(anchor), measured, threshold, relation, pass});
  if (!pass) overall_pass = false;
  return records.back();
}

const CheckRecord* SuiteReport::find(std::string_view name) const {
  for (const auto& r : records)
    if (r.name == name) return &r;
  return nullptr;
}

namespace {

const char* relation_symbol(Relation r) {
  switch (r) {
    case Relation::AtMost: return "<=";
    case Relation::AtLeast: return ">=";
    case Relation::Below: return "<";
  }
  return "?";
}

std::string model_slug(const RunConfig& cfg) {
  std::string s = std::string(to_string(cfg.family)) + "-n" + std::to_string(cfg.n);
  if (cfg.family != Family::Heisenberg) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "-k%g", cfg.k);
    s += buf;
  }
  return s;
}

double max_abs(double acc, double v) { return std::max(acc, std::abs(v)); }

// Upper end of the radial range used for grids: stays 0.2 away from C(S).
double grid_top(const ModelHypersurface& hs, double cap) { return std::min(cap, hs.r_max() - 0.2); }

SurfaceField as_surface_field(VectorField V) {
  return [V = std::move(V)](const Vec& q) { return V(q); };
}

Table eps_table(std::string name, const std::vector<double>& eps, const std::vector<double>& err) {
  Table t{std::move(name), {"eps", "sup_error"}, {false, false}, {}};
  for (std::size_t i = 0; i < eps.size(); ++i) t.rows.push_back({eps[i], err[i]});
  return t;
}

ordered_json moments_json(const MomentStats& m) { return {{"mean", m.mean}, {"variance", m.variance}, {"se", m.se}}; }

ordered_json stats_json(const PathStats& s) {
  return {{"paths", s.paths},
          {"completed", s.completed},
          {"hits", s.hits},
          {"hit_fraction", s.hit_fraction},
          {"explosions", s.explosions},
          {"clamped", s.clamped},
          {"r", moments_json(s.r)},
          {"r2", moments_json(s.r2)},
          {"max_retraction_residual", s.max_retraction_residual},
          {"seed", s.seed},
          {"stream", s.stream}};
}

}  // namespace

SuiteReport verify_identities(const RunConfig& cfg) {
  const ModelSpace ms = ModelSpace::make(cfg.family, cfg.n, cfg.k);
  const ModelHypersurface hs(ms);
  const Tolerances& tol = cfg.tol;
  const int n = cfg.n;
  SuiteReport rep;
  rep.suite = "verify-identities";
  rep.model = hs.label();

  // Contact normalization and Reeb field on the ambient space.
  const NormalizationResult norm = verify_normalization(ms, cfg.samples, cfg.seed);
  rep.check("normalization residual", "(d omega)^n(e_1,...,e_2n) = n!", norm.max_residual, tol.normalization);
  {
    RngStream rng(cfg.seed, 11);
    double om = 0.0, dom = 0.0;
    for (int i = 0; i < cfg.samples; ++i) {
      const ReebResidual r = reeb_residual(ms, sample_point(ms, rng).coords);
      om = std::max(om, r.omega_defect);
      dom = std::max(dom, r.d_omega_defect);
    }
    rep.check("reeb omega residual", "omega(X0) = 1", om, tol.reeb_omega);
    rep.check("reeb d_omega residual", "d omega(X0, .) = 0", dom, tol.reeb_d_omega);
  }

  const std::vector<Vec> grid = make_grid(hs, cfg.grid_points, 0.2, grid_top(hs, 3.0), cfg.seed);
  const Mat& G = ms.fibre_metric_matrix();

  // Sub-Riemannian normal.
  {
    double om = 0.0, unit = 0.0, orth = 0.0, closed = 0.0;
    for (const Vec& x : grid) {
      const Point p{x};
      const Vec N = sr_normal(hs, p).components;
      const Vec Nc = sr_normal_closed_form(hs, p).components;
      const Mat Y = horizontal_frame(hs, p).vectors;
      om = max_abs(om, ms.omega(x, N));
      unit = max_abs(unit, bilinear(G, N, N) - 1.0);
      for (int i = 0; i < Y.cols(); ++i) orth = max_abs(orth, bilinear(G, N, Y.col(i)));
      closed = std::max(closed, (N - Nc).cwiseAbs().maxCoeff());
    }
    rep.check("omega(N)", "omega(N) = 0", om, tol.normal);
    rep.check("g(N,N) - 1", "g(N, N) = 1", unit, tol.normal);
    rep.check("g(N,Y_i)", "g(N, Y_i) = 0", orth, tol.normal);
    rep.check("closed-form N vs generic N", "N = grad_H u / |grad_H u|", closed, tol.normal);

    // |N_eps - N| behaves like 1 - (1 + (eps tau)^2)^(-1/2) with tau ~ 2/dist(x, C(S)),
    // so the eps^2 regime only starts once eps tau < 1. The rate is fitted on
    // points at distance >= normal_margin from C(S); the full grid is reported too.
    const std::vector<Vec> inner =
        make_grid(hs, cfg.grid_points, cfg.normal_margin, std::min(3.0, hs.r_max() - cfg.normal_margin), cfg.seed);
    auto sup_errors = [&](const std::vector<Vec>& pts) {
      std::vector<double> err(cfg.normal_eps.size(), 0.0);
      for (const Vec& x : pts) {
        const Vec N = sr_normal(hs, Point{x}).components;
        for (std::size_t e = 0; e < cfg.normal_eps.size(); ++e) {
          const Vec Ne = riemannian_normal_eps(hs, Point{x}, cfg.normal_eps[e]).components;
          err[e] = std::max(err[e], (Ne - N).cwiseAbs().maxCoeff());
        }
      }
      return err;
    };
    const std::vector<double> eps_err = sup_errors(inner);
    const std::vector<double> full_err = sup_errors(grid);
    const double order = fitted_order(cfg.normal_eps, eps_err);
    rep.check("N_eps -> N fitted order", "N_eps -> N", order, tol.normal_order, Relation::AtLeast);
    rep.summary["normal_eps"] = {{"eps", cfg.normal_eps},
                                 {"margin", cfg.normal_margin},
                                 {"sup_errors", eps_err},
                                 {"fitted_order", order},
                                 {"full_grid_sup_errors", full_err},
                                 {"full_grid_fitted_order", fitted_order(cfg.normal_eps, full_err)}};
    rep.tables.push_back(eps_table("normal-eps", cfg.normal_eps, eps_err));
  }

  // Volume form mu = iota_N Omega in both charts.
  {
    const SphericalChart sc(hs);
    double rel = 0.0, exact = 0.0;
    for (const Vec& x : grid) {
      const Vec c = sc.from_ambient(x);
      if (sc.singular_distance(c) > 0.05) rel = max_abs(rel, induced_volume_direct(hs, sc, c) / sc.density(c) - 1.0);
      const WorkingChart wc = WorkingChart::around(hs, x);
      const Vec cw = wc.from_ambient(x);
      rel = max_abs(rel, induced_volume_direct(hs, wc, cw) / wc.density(cw) - 1.0);
      if (hs.family() == Family::Heisenberg && n == 1) {
        const double r = hs.radius(x);
        exact = max_abs(exact, induced_volume_direct(hs, sc, c) / (0.5 * r * r) - 1.0);
      }
    }
    rep.check("volume density vs iota_N Omega", "mu = iota_N Omega", rel, tol.volume);
    if (hs.family() == Family::Heisenberg && n == 1)
      rep.check("H^1 density r^2/2", "mu = (r^2/2) dr ^ d phi", exact, tol.volume_exact);
  }

  // Divergences.
  {
    const SurfaceField R = [&hs](const Vec& q) { return hs.radial_field(q); };
    double err = 0.0;
    for (const Vec& x : grid) err = max_abs(err, divergence_mu(hs, R, Point{x}) - hs.radial_divergence(hs.radius(x)));
    const char* anchor = hs.family() == Family::Heisenberg ? "div_mu(R) = 2n/r"
                         : hs.family() == Family::Sphere   ? "div_mu(R) = 2nk cot(kr)"
                                                           : "div_mu(R) = 2nk coth(kr)";
    rep.check("div_mu(R) closed form", anchor, err, tol.divergence);
  }

  if (hs.family() == Family::Heisenberg && n == 2) {
    const SurfaceField U1 = as_surface_field(heisenberg2_field(1));
    const SurfaceField U2 = as_surface_field(heisenberg2_field(2));
    const SurfaceField U3 = as_surface_field(heisenberg2_field(3));
    double d1 = 0.0, d23 = 0.0, dz = 0.0, br = 0.0;
    for (const Vec& x : grid) {
      const Point p{x};
      const double r = x.head(4).norm();
      d1 = max_abs(d1, divergence_mu(hs, U1, p) - 4.0 / r);
      d23 = max_abs(d23, divergence_mu(hs, U2, p));
      d23 = max_abs(d23, divergence_mu(hs, U3, p));
      const Mat U = heisenberg2_frame(x);
      dz = max_abs(dz, ms.d_omega(U.col(1), U.col(2)) + 1.0);
      const Vec b = lie_bracket(heisenberg2_field(2), heisenberg2_field(3), p).components;
      br = std::max(br, (b + 2.0 * U.col(3) / r).cwiseAbs().maxCoeff());
    }
    rep.check("div_mu(U1) = 4/r", "div_mu(U_1) = 4/r", d1, tol.frame_divergence);
    rep.check("div_mu(U2), div_mu(U3) = 0", "div_mu(U_2) = div_mu(U_3) = 0", d23, tol.frame_divergence);
    rep.check("d zeta(U2,U3) + 1", "d zeta(U_2, U_3) = -1", dz, tol.structure);
    rep.check("[U2,U3] + 2 U4 / r", "[U_2, U_3] = -2 U_4 / r", br, tol.bracket);
  }

  // Quasi-contact structure (n >= 2) and bracket generation.
  if (n >= 2) {
    RngStream rng(cfg.seed, 13);
    int wrong_rank = 0;
    double angle = 0.0;
    for (int i = 0; i < cfg.samples; ++i) {
      const Vec x = hs.sample(rng, 0.2, grid_top(hs, 3.0));
      const QuasiContactResult q = quasi_contact_check(hs, Point{x});
      if (q.rank != 2 * n - 2) ++wrong_rank;
      angle = std::max(angle, q.radial_angle);
    }
    rep.check("rank d zeta|_W defects", "rank(d zeta|_W) = 2n - 2", wrong_rank, 0.0);
    rep.check("ker d zeta|_W angle to R", "ker(d zeta|_W) = span R", angle, tol.kernel_angle);
  }
  // For n = 1, W is a line field and cannot be bracket generating.
  if (n >= 2) {
    int wrong = 0;
    for (const Vec& x : grid)
      if (bracket_generation_rank(hs, Point{x}) != 2 * n) ++wrong;
    rep.check("bracket generation defects", "span{Y_i, [Y_i, Y_j]} = TS", wrong, 0.0);
  }

  // Sub-Laplacian cross-checks.
  {
    double err = 0.0;
    for (int v = 0; v < 3; ++v) {
      const TestFunction f = bump_function(hs, v);
      for (const Vec& x : grid) {
        const double a = sublaplacian_apply(hs, f.field, Point{x}, Method::DivGrad).value;
        const double b = sublaplacian_apply(hs, f.field, Point{x}, Method::FrameFormula).value;
        err = max_abs(err, a - b);
      }
    }
    rep.check("div-grad vs frame formula", "Delta = div_mu grad_H = sum Y_i^2 + div_mu(Y_i) Y_i", err,
              tol.sublaplacian);
  }
  if (hs.family() == Family::Heisenberg) {
    const TestFunction g = radial_power(hs, -(2.0 * n - 1.0));
    double err = 0.0;
    for (const Vec& x : grid) err = max_abs(err, sublaplacian_apply(hs, g.field, Point{x}, Method::DivGrad).value);
    rep.check("Delta r^(1-2n)", "Delta r^(1-2n) = 0", err, tol.sublaplacian);
    if (n == 2) {
      double cf = 0.0;
      for (int v = 0; v < 3; ++v) {
        const TestFunction f = bump_function(hs, v);
        for (const Vec& x : grid) {
          const double a = sublaplacian_apply(hs, f.field, Point{x}, Method::DivGrad).value;
          const double b = sublaplacian_apply(hs, f.field, Point{x}, Method::ClosedForm).value;
          cf = max_abs(cf, a - b);
        }
      }
      rep.check("H^2 closed form", "Delta = U_1^2 + U_2^2 + U_3^2 + (4/r) U_1", cf, tol.sublaplacian);
    }
  }
  return rep;
}

SuiteReport converge(const RunConfig& cfg) {
  const ModelHypersurface hs(ModelSpace::make(cfg.family, cfg.n, cfg.k));
  SuiteReport rep;
  rep.suite = "converge";
  rep.model = hs.label();
  const std::vector<Vec> grid = make_grid(hs, cfg.convergence_points, 0.2, grid_top(hs, 3.2), cfg.seed);
  ordered_json fns = ordered_json::array();
  for (int v = 0; v < 3; ++v) {
    const TestFunction f = bump_function(hs, v);
    const ConvergenceReport cr = convergence_study(hs, f, grid, cfg.eps, 0.2, "random r in [0.2, r_top]");
    double ratio = 0.0;
    for (std::size_t i = 1; i < cr.sup_errors.size(); ++i)
      ratio = std::max(ratio, cr.sup_errors[i] / cr.sup_errors[i - 1]);
    rep.check(f.id + " sup errors decreasing", "Delta_eps f -> Delta f", ratio, 1.0, Relation::Below);
    rep.check(f.id + " fitted order", "Delta_eps f -> Delta f", cr.fitted_order, cfg.tol.convergence_order,
              Relation::AtLeast);
    fns.push_back({{"function", f.id},
                   {"sup_errors", cr.sup_errors},
                   {"fitted_order", cr.fitted_order},
                   {"strictly_decreasing", cr.strictly_decreasing}});
    rep.tables.push_back(eps_table("eps-" + f.id, cr.eps_schedule, cr.sup_errors));
  }
  rep.summary["eps"] = cfg.eps;
  rep.summary["functions"] = fns;
  return rep;
}

namespace {

void full_process_checks(SuiteReport& rep, const ModelHypersurface& hs, const RunConfig& cfg, const PathStats& st) {
  const Tolerances& tol = cfg.tol;
  rep.check("hit fraction", hs.family() == Family::Sphere ? "hits neither endpoint of the interval"
                                                          : "almost surely does not hit characteristic points",
            st.hit_fraction, tol.hit_fraction);
  rep.check("guard exits", "no explosion", static_cast<double>(st.explosions), 0.0);
  rep.check("retraction residual", "x stays on S", st.max_retraction_residual, tol.retraction);
  if (hs.family() == Family::Heisenberg) {
    const double r0 = cfg.sim.r0, T = cfg.sim.horizon;
    const double gap = std::abs(st.r2.mean - r0 * r0 - (2.0 * cfg.n + 1.0) * T);
    rep.check("squared-radius moment", "E r_T^2 = r_0^2 + (2n+1) T", gap,
              std::max(tol.moment_sigmas * st.r2.se, tol.moment_floor));
  }
}

std::vector<Table> snapshot_tables(const PathStats& st) {
  std::vector<Table> out;
  for (std::size_t s = 0; s < st.snapshots.size(); ++s) {
    Table t{"snapshot" + std::to_string(s), {"path", "r", "hit"}, {true, false, true}, {}};
    for (const auto& e : st.snapshots[s].entries)
      t.rows.push_back({static_cast<double>(e.path), e.r, e.hit ? 1.0 : 0.0});
    out.push_back(std::move(t));
  }
  return out;
}

Table histogram_table(std::string name, const Snapshot& full, const Snapshot& ref, int bins) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* snap : {&full, &ref})
    for (const auto& e : snap->entries)
      if (std::isfinite(e.r)) {
        lo = std::min(lo, e.r);
        hi = std::max(hi, e.r);
      }
  Table t{std::move(name), {"r", "full", "reference"}, {false, false, false}, {}};
  if (!(hi > lo)) return t;
  const double width = (hi - lo) / bins;
  std::vector<double> cf(bins, 0.0), cr(bins, 0.0);
  auto fill = [&](const Snapshot& s, std::vector<double>& c) {
    for (const auto& e : s.entries) {
      if (!std::isfinite(e.r)) continue;
      const int b = std::min(bins - 1, static_cast<int>((e.r - lo) / width));
      c[b] += 1.0;
    }
    for (double& v : c) v /= static_cast<double>(s.entries.size());
  };
  fill(full, cf);
  fill(ref, cr);
  for (int b = 0; b < bins; ++b) t.rows.push_back({lo + (b + 0.5) * width, cf[b], cr[b]});
  return t;
}

}  // namespace

SuiteReport simulate(const RunConfig& cfg) {
  const ModelHypersurface hs(ModelSpace::make(cfg.family, cfg.n, cfg.k));
  SuiteReport rep;
  rep.suite = "simulate";
  rep.model = hs.label();
  const PathStats st = simulate_full(hs, cfg.sim);
  full_process_checks(rep, hs, cfg, st);
  rep.summary["full"] = stats_json(st);
  rep.tables = snapshot_tables(st);
  return rep;
}

SuiteReport radial_compare(const RunConfig& cfg) {
  const ModelHypersurface hs(ModelSpace::make(cfg.family, cfg.n, cfg.k));
  SuiteReport rep;
  rep.suite = "radial-compare";
  rep.model = hs.label();
  const RadialKind rk = radial_kind_for(hs);
  const PathStats full = simulate_full(hs, cfg.sim);
  const PathStats ref = simulate_radial_reference(rk, cfg.sim);
  const DistributionComparison cmp = compare_distributions(full.terminal, ref.terminal);
  const std::string law = std::string(rk.name()) + " process of order " + std::to_string(rk.order);
  rep.check("KS distance", "radial part is a " + law, cmp.ks, cfg.tol.ks);
  full_process_checks(rep, hs, cfg, full);
  rep.summary["reference_law"] = law;
  rep.summary["ks"] = cmp.ks;
  rep.summary["mean_gap"] = {{"value", cmp.mean_gap}, {"se", cmp.mean_gap_se}};
  rep.summary["second_moment_gap"] = {{"value", cmp.second_moment_gap}, {"se", cmp.second_moment_gap_se}};
  rep.summary["full"] = stats_json(full);
  rep.summary["reference"] = stats_json(ref);
  for (std::size_t s = 0; s < full.snapshots.size(); ++s)
    rep.tables.push_back(
        histogram_table("histogram" + std::to_string(s), full.snapshots[s], ref.snapshots[s], cfg.histogram_bins));
  return rep;
}

SuiteReport run_suite(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteReport rep;
  switch (cfg.command) {
    case Command::VerifyIdentities: rep = verify_identities(cfg); break;
    case Command::Converge: rep = converge(cfg); break;
    case Command::Simulate: rep = simulate(cfg); break;
    case Command::RadialCompare: rep = radial_compare(cfg); break;
  }
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

namespace {

void dump_into(std::string& out, const ordered_json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + ordered_json(key).dump() + ": ";
        dump_into(out, value, indent, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump_into(out, j[i], indent, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case ordered_json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default: out += j.dump();
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  f.close();
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

std::filesystem::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory '" + dir + "'");
  return dir;
}

}  // namespace

std::string dump_scientific(const ordered_json& j, int indent) {
  std::string out;
  dump_into(out, j, indent, 0);
  out += "\n";
  return out;
}

std::string report_json(const SuiteReport& report, const RunConfig& cfg) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["suite"] = report.suite;
  j["model"] = report.model;
  j["config"] = to_json(cfg);
  ordered_json recs = ordered_json::array();
  for (const auto& r : report.records)
    recs.push_back({{"name", r.name},
                    {"anchor", r.anchor},
                    {"measured", r.measured},
                    {"relation", relation_symbol(r.relation)},
                    {"threshold", r.threshold},
                    {"pass", r.pass}});
  j["records"] = recs;
  j["overall_pass"] = report.overall_pass;
  j["summary"] = report.summary;
  return dump_scientific(j);
}

std::string table_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ",";
      if (table.integral[c] && std::isfinite(row[c]))
        out += std::to_string(static_cast<long long>(std::llround(row[c])));
      else
        out += format_double(row[c]);
    }
    out += "\n";
  }
  return out;
}

std::vector<std::string> emit_plotdata(const SuiteReport& report, const std::string& dir) {
  const std::filesystem::path base = ensure_dir(dir);
  std::vector<std::string> written;
  for (const auto& t : report.tables) {
    const auto path = base / (t.name + ".csv");
    write_file(path, table_csv(t));
    written.push_back(path.string());
  }
  return written;
}

std::vector<std::string> write_artifacts(const SuiteReport& report, const RunConfig& cfg) {
  const std::string dir =
      (std::filesystem::path(cfg.output_dir) / (std::string(to_string(cfg.command)) + "-" + model_slug(cfg))).string();
  const std::filesystem::path base = ensure_dir(dir);
  const auto json_path = base / "report.json";
  write_file(json_path, report_json(report, cfg));
  std::vector<std::string> written{json_path.string()};
  for (auto& p : emit_plotdata(report, dir)) written.push_back(std::move(p));
  return written;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  RunConfig cfg = config;
  try {
    cfg.finalize();
  } catch (const ArgumentError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  }
  SuiteReport rep;
  try {
    rep = run_suite(cfg);
  } catch (const ArgumentError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "suite aborted: " << e.what() << "\n";
    return 1;
  }
  try {
    for (const auto& path : write_artifacts(rep, cfg)) out << "wrote " << path << "\n";
  } catch (const IoError& e) {
    err << "output error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& r : rep.records)
    out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << format_double(r.measured) << " "
        << relation_symbol(r.relation) << " " << format_double(r.threshold) << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", rep.runtime_seconds);
  out << rep.suite << " " << rep.model << ": " << (rep.overall_pass ? "pass" : "fail") << " (" << buf << " s)\n";
  return rep.overall_pass ? 0 : 1;
}

}  // namespace hypersub
