#include "cylasym/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cylasym/asymptotics.hpp"
#include "cylasym/config.hpp"
#include "cylasym/errors.hpp"
#include "cylasym/grid.hpp"
#include "cylasym/nonlinearity.hpp"
#include "cylasym/ode1d.hpp"
#include "cylasym/solver.hpp"

namespace cylasym {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct Options {
  std::string config;
  std::string out;
  int threads = 1;
  long seed = 0;
};

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

ojson jnum(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

class Artifacts {
 public:
  Artifacts(fs::path dir, std::ostream& log) : dir_(std::move(dir)), log_(log) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw DomainError("cannot create output directory '" + dir_.string() + "'");
  }
  const fs::path& dir() const { return dir_; }

  void write(const std::string& name, const std::string& body) const {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw DomainError("cannot write '" + (dir_ / name).string() + "'");
    f << body;
    log_ << "wrote " << (dir_ / name).string() << '\n';
  }
  void write_json(const std::string& name, const ojson& j) const { write(name, j.dump(2) + "\n"); }

 private:
  fs::path dir_;
  std::ostream& log_;
};

ojson describe_config(const RunConfig& c) {
  ojson j;
  j["nonlinearity"] = c.nl.describe();
  j["p"] = c.p;
  return j;
}

const GeometryConfig& need_geometry(const RunConfig& c) {
  if (!c.geometry) throw ConfigError("/geometry", "missing required key");
  return *c.geometry;
}

const std::variant<FiniteRegime, BlowupRegime>& need_boundary(const RunConfig& c) {
  if (!c.boundary) throw ConfigError("/boundary", "missing required key");
  return *c.boundary;
}

int cells_for(double length, std::optional<double> h, std::optional<int> n, const char* key) {
  if (n) {
    if (*n < 3) throw ConfigError(std::string("/geometry/") + (key[1] == 'x' ? "nx" : "ny"), "must be at least 3");
    return *n;
  }
  if (!h) throw ConfigError(std::string("/geometry/") + key, "give a node count or a spacing");
  const double k = std::round(length / *h);
  if (k < 2.0 || std::abs(length / *h - k) > 1e-9 * k)
    throw ConfigError(std::string("/geometry/") + key, "spacing must divide the extent");
  return static_cast<int>(k) + 1;
}

RectGrid grid_for(const GeometryConfig& g, double ell) {
  return RectGrid(ell, g.cross, cells_for(2.0 * ell, g.hx, g.nx, "hx"),
                  cells_for(g.cross.width(), g.hy, g.ny, "hy"));
}

Window window_or_default(const RunConfig& c, const RectGrid& g) {
  if (c.window) return *c.window;
  const double wy = 0.25 * g.cross().width();
  return {-0.5 * g.ell(), 0.5 * g.ell(), g.cross().lo + wy, g.cross().hi - wy};
}

SolverConfig solver_for(const RunConfig& c, const RectGrid& g) {
  return c.solver.apply(default_solver_config(c.p, g));
}

ojson iterations_json(const SolveResult& r) {
  ojson it = ojson::array();
  for (int k : r.iterations) it.push_back(k);
  return it;
}

ojson solve_json(const SolveResult& r) {
  ojson j;
  j["energy"] = jnum(r.energy);
  j["residual"] = jnum(r.residual);
  j["residual_floor"] = jnum(r.residual_floor);
  j["tol"] = r.tol;
  j["eps_final"] = r.eps_final;
  j["iterations"] = iterations_json(r);
  if (const auto* b = std::get_if<BlowupStage>(&r.boundary_mode))
    j["boundary"] = {{"blowup_M", b->M}};
  else
    j["boundary"] = {{"dirichlet", std::get<DirichletMode>(r.boundary_mode).description}};
  return j;
}

std::string grid_csv(const GridFunction& u) {
  std::ostringstream os;
  write_csv(u, os);
  return os.str();
}

// Final-stage solution for the configured regime on grid g.
struct RegimeSolve {
  SolveResult final;
  std::optional<BlowupReport> blowup;
};

RegimeSolve solve_regime(const RunConfig& c, const RectGrid& g, const Window& w) {
  const SolverConfig cfg = solver_for(c, g);
  return std::visit(
      [&](const auto& regime) -> RegimeSolve {
        using T = std::decay_t<decltype(regime)>;
        if constexpr (std::is_same_v<T, FiniteRegime>) {
          return {solve_dirichlet(g, c.nl, cfg, DirichletData::cross_affine(g.cross(), regime.g0, regime.g1)),
                  std::nullopt};
        } else {
          BlowupReport rep = solve_blowup(g, c.nl, cfg, regime.M_list, w);
          SolveResult last = rep.stages.back();
          return {std::move(last), std::move(rep)};
        }
      },
      need_boundary(c));
}

int cmd_psi(const RunConfig& c, const Artifacts& art, std::ostream& out) {
  std::string csv = "r,psi\n";
  ojson values = ojson::array();
  for (double r : c.psi_r_values) {
    const auto v = psi_p(c.nl, c.p, r);
    csv += num(r) + "," + (v ? num(*v) : std::string("inf")) + "\n";
    values.push_back({{"r", r}, {"psi", v ? ojson(*v) : ojson(nullptr)}, {"finite", v.has_value()}});
  }
  const bool a1 = check_a1(c.nl, c.p);
  ojson j = describe_config(c);
  j["a1"] = a1;
  j["values"] = values;
  art.write("psi.csv", csv);
  art.write_json("psi.json", j);
  out << "(A1) " << (a1 ? "holds" : "fails") << '\n';
  return kExitOk;
}

int cmd_ode1d(const RunConfig& c, const Artifacts& art, std::ostream& out) {
  if (!c.ode1d_r && !c.ode1d_a) throw ConfigError("/ode1d", "missing required key");
  const LargeSolution1D s = c.ode1d_r ? solve_large_1d(c.nl, c.p, *c.ode1d_r)
                                      : large_1d_from_center(c.nl, c.p, *c.ode1d_a);
  std::string csv = "t,gap,phi,dphi,residual\n";
  for (const ProfileSample& p : s.samples())
    csv += num(p.t) + "," + num(p.gap) + "," + num(p.phi) + "," + num(p.dphi) + "," + num(p.residual) + "\n";
  ojson j = describe_config(c);
  j["r"] = s.r();
  j["a"] = s.a();
  j["residual_max"] = s.residual_max();
  j["samples"] = s.samples().size();
  art.write("profile.csv", csv);
  art.write_json("ode1d.json", j);
  out << "r = " << num(s.r()) << ", a = " << num(s.a()) << '\n';
  return kExitOk;
}

int cmd_solve(const RunConfig& c, const Artifacts& art, std::ostream& out) {
  const GeometryConfig& geo = need_geometry(c);
  if (!geo.ell) throw ConfigError("/geometry/ell", "missing required key");
  const RectGrid g = grid_for(geo, *geo.ell);
  const Window w = window_or_default(c, g);
  const RegimeSolve rs = solve_regime(c, g, w);

  ojson j = describe_config(c);
  j["grid"] = nlohmann::ordered_json::parse(sidecar_json(g));
  j["result"] = solve_json(rs.final);
  art.write("solution.csv", grid_csv(rs.final.solution));
  art.write("solution.grid.json", sidecar_json(g) + "\n");
  if (rs.blowup) {
    std::string csv = "M,window_change,energy,residual\n";
    ojson stages = ojson::array();
    for (std::size_t k = 0; k < rs.blowup->stages.size(); ++k) {
      const SolveResult& st = rs.blowup->stages[k];
      const double M = std::get<BlowupStage>(st.boundary_mode).M;
      const double change = k == 0 ? std::numeric_limits<double>::quiet_NaN() : rs.blowup->window_change[k - 1];
      csv += num(M) + "," + (k == 0 ? std::string() : num(change)) + "," + num(st.energy) + "," +
             num(st.residual) + "\n";
      stages.push_back(solve_json(st));
    }
    j["blowup"] = {{"stages", stages},
                   {"monotonicity_violation", rs.blowup->monotonicity_violation},
                   {"monotone", rs.blowup->monotone},
                   {"window", {{"x", {w.x_lo, w.x_hi}}, {"y", {w.y_lo, w.y_hi}}}}};
    art.write("blowup.csv", csv);
  }
  art.write_json("diagnostics.json", j);
  out << "energy " << num(rs.final.energy) << ", residual " << num(rs.final.residual) << '\n';
  return kExitOk;
}

SweepSpec sweep_spec(const RunConfig& c, int threads) {
  const GeometryConfig& geo = need_geometry(c);
  if (geo.ell_list.empty()) throw ConfigError("/geometry/ell_list", "missing required key");
  if (!geo.hx) throw ConfigError("/geometry/hx", "sweeps need a fixed spacing");
  if (!geo.hy) throw ConfigError("/geometry/hy", "sweeps need a fixed spacing");
  if (!c.window) throw ConfigError("/window", "missing required key");
  SweepSpec s;
  s.nl = c.nl;
  s.p = c.p;
  s.cross = geo.cross;
  s.regime = need_boundary(c);
  s.ell_list = geo.ell_list;
  s.window = *c.window;
  s.hx = *geo.hx;
  s.hy = *geo.hy;
  if (!c.solver.empty()) {
    SolverConfig base;
    base.p = c.p;
    base.tol = 1e-11;
    s.solver = c.solver.apply(base);
  }
  s.estimate_floor = c.estimate_floor;
  s.threads = threads;
  return s;
}

void write_rate(const RateReport& r, const Artifacts& art) {
  std::string csv = "ell,error,used_in_fit\n";
  std::string plot = "# log-log data: ell error (rows used in the fit)\n";
  for (const RateRow& row : r.rows) {
    csv += num(row.ell) + "," + num(row.error) + "," + (row.used_in_fit ? "true" : "false") + "\n";
    if (row.used_in_fit) plot += num(row.ell) + " " + num(row.error) + "\n";
  }
  ojson j;
  j["slope"] = jnum(r.slope);
  j["intercept"] = jnum(r.intercept);
  j["target_slope"] = r.target_slope;
  j["pass"] = r.pass;
  j["floor"] = jnum(r.floor);
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["monotone_above_floor"] = r.monotone_above_floor;
  art.write("rate.csv", csv);
  art.write("rate_plot.dat", plot);
  art.write_json("rate.json", j);
}

int cmd_sweep(const RunConfig& c, const Artifacts& art, std::ostream& out, int threads) {
  const SweepSpec spec = sweep_spec(c, threads);
  const SweepOutcome o = sweep_ell(spec);
  std::string csv = "ell,error,ok,failure\n";
  for (const RateRow& row : o.rows)
    csv += num(row.ell) + "," + num(row.error) + "," + (row.ok ? "true" : "false") + "," +
           csv_field(row.failure) + "\n";
  ojson j = describe_config(c);
  j["floor"] = jnum(o.floor);
  j["mesh_difference"] = jnum(o.mesh_difference);
  j["noise_level"] = jnum(o.noise_level);
  j["floor_failure"] = o.floor_failure;
  art.write("sweep.csv", csv);
  art.write_json("sweep.json", j);
  const RateReport r = fit_rate(o.rows, c.p, o.floor);
  write_rate(r, art);
  out << "sweep: " << o.rows.size() << " rows, floor " << num(o.floor) << ", slope " << num(r.slope) << " ("
      << to_string(r.status) << ")\n";
  return kExitOk;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      f.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  f.push_back(cur);
  return f;
}

double parse_num(const std::string& s, const std::string& where) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError(where + ": not a number '" + s + "'");
  }
}

int cmd_rate(const RunConfig& c, const Artifacts& art, std::ostream& out) {
  const fs::path in = c.rate_input ? fs::path(*c.rate_input) : art.dir();
  std::ifstream csv(in / "sweep.csv");
  std::ifstream meta(in / "sweep.json");
  if (!csv || !meta) throw DomainError("rate: cannot read sweep.csv / sweep.json in '" + in.string() + "'");
  std::string line;
  if (!std::getline(csv, line) || line != "ell,error,ok,failure")
    throw DomainError("rate: sweep.csv has an unexpected header");
  std::vector<RateRow> rows;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw DomainError("rate: malformed sweep.csv row '" + line + "'");
    RateRow r;
    r.ell = parse_num(f[0], "sweep.csv ell");
    r.error = parse_num(f[1], "sweep.csv error");
    r.ok = f[2] == "true";
    r.failure = f[3];
    rows.push_back(r);
  }
  const nlohmann::json m = nlohmann::json::parse(meta);
  const double floor =
      m.at("floor").is_null() ? std::numeric_limits<double>::infinity() : m.at("floor").get<double>();
  const RateReport r = fit_rate(std::move(rows), c.p, floor);
  write_rate(r, art);
  out << "rate: slope " << num(r.slope) << ", target " << num(r.target_slope) << ", " << to_string(r.status)
      << ", " << (r.pass ? "pass" : "fail") << '\n';
  return r.pass ? kExitOk : kExitProperty;
}

ojson report_json(const CheckReport& r) {
  return {{"holds", r.holds},     {"margin", jnum(r.margin)}, {"observed", jnum(r.observed)},
          {"bound", jnum(r.bound)}, {"worst", {r.worst_x, r.worst_y}}, {"checked", r.checked},
          {"detail", r.detail}};
}

int cmd_check(const RunConfig& c, const Artifacts& art, std::ostream& out) {
  ojson j = describe_config(c);
  const bool a1 = check_a1(c.nl, c.p);
  j["a1"] = a1;
  if (a1) {
    const A2Report a2 = check_a2(c.nl, c.p, c.a2_beta, c.a2_t_max);
    ojson est = ojson::array();
    for (std::size_t k = 0; k < a2.beta_values.size(); ++k)
      est.push_back({{"beta", a2.beta_values[k]}, {"liminf", a2.estimated_liminf_per_beta[k]}});
    j["a2"] = {{"passes", a2.passes}, {"estimates", est}};
  } else {
    j["a2"] = nullptr;
  }
  out << "(A1) " << (a1 ? "holds" : "fails") << '\n';

  bool all_hold = true;
  const PropertyConfig& pc = c.properties;
  if (!pc.empty()) {
    const GeometryConfig& geo = need_geometry(c);
    if (!geo.ell) throw ConfigError("/geometry/ell", "missing required key");
    const RectGrid g = grid_for(geo, *geo.ell);
    const SolverConfig cfg = solver_for(c, g);
    ojson props;
    auto record = [&](const char* name, const CheckReport& r) {
      props[name].push_back(report_json(r));
      all_hold = all_hold && r.holds;
      out << name << ": " << (r.holds ? "holds" : "VIOLATED") << " (" << r.detail << ")\n";
    };
    for (const auto& [lo, hi] : pc.comparison_pairs) {
      const SolveResult u = solve_dirichlet(g, c.nl, cfg, DirichletData::constant(lo));
      const SolveResult v = solve_dirichlet(g, c.nl, cfg, DirichletData::constant(hi));
      record("comparison", verify_comparison(u, v));
    }
    if (!pc.barrier_balls.empty() || !pc.caccioppoli_windows.empty()) {
      const RegimeSolve rs = solve_regime(c, g, window_or_default(c, g));
      for (const auto& b : pc.barrier_balls) record("barrier", verify_barrier(rs.final, c.nl, c.p, b.x0, b.y0, b.R));
      for (const auto& w : pc.caccioppoli_windows)
        record("caccioppoli", verify_caccioppoli(rs.final, c.nl, c.p, w.inner, w.outer));
    }
    if (pc.monotone_ell_pair) {
      const auto [l1, l2] = *pc.monotone_ell_pair;
      if (!c.window) throw ConfigError("/window", "monotone_ell_pair needs a window");
      if (!geo.hx || !geo.hy) throw ConfigError("/geometry", "monotone_ell_pair needs hx and hy");
      const RegimeSolve a = solve_regime(c, grid_for(geo, l1), *c.window);
      const RegimeSolve b = solve_regime(c, grid_for(geo, l2), *c.window);
      record("monotone_in_ell", verify_monotone_in_ell(a.final, b.final, *c.window));
    }
    j["properties"] = props;
  }
  j["all_hold"] = all_hold;
  art.write_json("check.json", j);
  return all_hold ? kExitOk : kExitProperty;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quasilinear absorption problems on expanding cylinders"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config, "JSON run configuration (schema_version 1)");
  app.add_option("--out", opt.out, "output directory");
  app.add_option("--threads", opt.threads, "concurrent sweep rows (0 = auto)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", opt.seed, "reserved; the pipeline is deterministic");
  const char* names[] = {"psi", "ode1d", "solve", "sweep", "rate", "check"};
  const char* help[] = {"Keller-Osserman integral table and (A1)",
                        "symmetric 1D large solution",
                        "Dirichlet or blow-up solve on one cylinder",
                        "ell-sweep of windowed errors",
                        "fit the convergence rate of a sweep",
                        "(A1)/(A2) classification and structural checks"};
  for (int k = 0; k < 6; ++k) app.add_subcommand(names[k], help[k])->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    if (opt.config.empty()) throw ConfigError("/", "--config is required");
    const RunConfig c = load_run_config(opt.config);
    const fs::path dir = !opt.out.empty() ? fs::path(opt.out) : c.output ? fs::path(*c.output) : fs::path(".");
    const Artifacts art(dir, out);
    if (sub == "psi") return cmd_psi(c, art, out);
    if (sub == "ode1d") return cmd_ode1d(c, art, out);
    if (sub == "solve") return cmd_solve(c, art, out);
    if (sub == "sweep") return cmd_sweep(c, art, out, opt.threads);
    if (sub == "rate") return cmd_rate(c, art, out);
    return cmd_check(c, art, out);
  } catch (const ConfigError& e) {
    err << "config error at " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    for (const auto& line : e.trace()) err << "  " << line << '\n';
    return kExitNumerical;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace cylasym
