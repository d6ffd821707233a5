#include "cylasym/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cylasym {

SolverConfig SolverOverrides::apply(SolverConfig base) const {
  if (tol) base.tol = *tol;
  if (max_newton) base.max_newton = *max_newton;
  if (eps_schedule) base.eps_schedule = *eps_schedule;
  if (backtrack) base.backtrack = *backtrack;
  if (armijo) base.armijo = *armijo;
  return base;
}

namespace {

using nlohmann::json;

// Object view over a JSON object. Keys outside `allowed` are rejected on
// construction; `done` rejects allowed keys that were not consumed (keys that
// do not apply to the chosen variant).
class Obj {
 public:
  Obj(const json& j, std::string path, std::initializer_list<const char*> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(pointer(), "expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      bool known = false;
      for (const char* a : allowed) known = known || it.key() == a;
      if (!known) throw ConfigError(child(it.key()), "unknown key");
    }
  }

  std::string pointer() const { return path_.empty() ? "/" : path_; }
  std::string child(const std::string& key) const { return path_ + "/" + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(child(key), "missing required key");
    used_.insert(key);
    return j_.at(key);
  }
  const json* get(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(child(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t k = 0; k < j.size(); ++k) v.push_back(number(j[k], path + "/" + std::to_string(k)));
  return v;
}

std::pair<double, double> pair(const json& j, const std::string& path) {
  const auto v = numbers(j, path);
  if (v.size() != 2) throw ConfigError(path, "expected two numbers");
  return {v[0], v[1]};
}

Nonlinearity parse_nonlinearity(const json& j, const std::string& path) {
  Obj o(j, path, {"kind", "coefficient", "exponent", "scale"});
  const std::string kind = string(o.at("kind"), o.child("kind"));
  Nonlinearity nl = Nonlinearity::zero();
  try {
    if (kind == "power") {
      nl = Nonlinearity::power(number(o.at("coefficient"), o.child("coefficient")),
                               number(o.at("exponent"), o.child("exponent")));
    } else if (kind == "exp_minus_one") {
      nl = Nonlinearity::exp_minus_one(number(o.at("scale"), o.child("scale")));
    } else if (kind == "zero") {
    } else {
      throw ConfigError(o.child("kind"), "unknown kind '" + kind + "' (power, exp_minus_one, zero)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  o.done();
  return nl;
}

Window parse_window(const json& j, const std::string& path) {
  Obj o(j, path, {"x", "y"});
  const auto [x_lo, x_hi] = pair(o.at("x"), o.child("x"));
  const auto [y_lo, y_hi] = pair(o.at("y"), o.child("y"));
  o.done();
  if (!(x_lo < x_hi && y_lo < y_hi)) throw ConfigError(path, "window bounds must be increasing");
  return {x_lo, x_hi, y_lo, y_hi};
}

GeometryConfig parse_geometry(const json& j, const std::string& path) {
  Obj o(j, path, {"ell", "ell_list", "cross", "nx", "ny", "hx", "hy"});
  GeometryConfig g;
  if (const json* v = o.get("ell")) g.ell = number(*v, o.child("ell"));
  if (const json* v = o.get("ell_list")) g.ell_list = numbers(*v, o.child("ell_list"));
  if (const json* v = o.get("cross")) {
    const auto [lo, hi] = pair(*v, o.child("cross"));
    if (!(lo < hi)) throw ConfigError(o.child("cross"), "cross interval must satisfy y0 < y1");
    g.cross = {lo, hi};
  }
  if (const json* v = o.get("nx")) g.nx = integer(*v, o.child("nx"));
  if (const json* v = o.get("ny")) g.ny = integer(*v, o.child("ny"));
  if (const json* v = o.get("hx")) g.hx = number(*v, o.child("hx"));
  if (const json* v = o.get("hy")) g.hy = number(*v, o.child("hy"));
  o.done();
  if (g.ell && !g.ell_list.empty()) throw ConfigError(path, "give either ell or ell_list, not both");
  return g;
}

std::variant<FiniteRegime, BlowupRegime> parse_boundary(const json& j, const std::string& path) {
  Obj o(j, path, {"dirichlet", "blowup"});
  std::variant<FiniteRegime, BlowupRegime> out;
  const json* d = o.get("dirichlet");
  const json* b = o.get("blowup");
  o.done();
  if ((d != nullptr) == (b != nullptr)) throw ConfigError(path, "give exactly one of dirichlet, blowup");
  if (d) {
    Obj od(*d, path + "/dirichlet", {"value", "g0", "g1"});
    FiniteRegime f;
    if (const json* v = od.get("value")) {
      f.g0 = f.g1 = number(*v, od.child("value"));
      if (od.has("g0") || od.has("g1")) throw ConfigError(od.pointer(), "give either value or g0/g1");
    } else {
      f.g0 = number(od.at("g0"), od.child("g0"));
      f.g1 = number(od.at("g1"), od.child("g1"));
    }
    od.done();
    out = f;
  } else {
    Obj ob(*b, path + "/blowup", {"M_list"});
    BlowupRegime r{numbers(ob.at("M_list"), ob.child("M_list"))};
    ob.done();
    if (r.M_list.empty()) throw ConfigError(ob.child("M_list"), "must not be empty");
    out = r;
  }
  return out;
}

SolverOverrides parse_solver(const json& j, const std::string& path) {
  Obj o(j, path, {"tol", "max_newton", "eps_schedule", "backtrack", "armijo"});
  SolverOverrides s;
  if (const json* v = o.get("tol")) s.tol = number(*v, o.child("tol"));
  if (const json* v = o.get("max_newton")) s.max_newton = integer(*v, o.child("max_newton"));
  if (const json* v = o.get("eps_schedule")) s.eps_schedule = numbers(*v, o.child("eps_schedule"));
  if (const json* v = o.get("backtrack")) s.backtrack = number(*v, o.child("backtrack"));
  if (const json* v = o.get("armijo")) s.armijo = number(*v, o.child("armijo"));
  o.done();
  try {
    SolverConfig probe = s.apply(SolverConfig{});
    validate(probe);
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
  return s;
}

PropertyConfig parse_properties(const json& j, const std::string& path) {
  Obj o(j, path, {"comparison_pairs", "barrier_balls", "caccioppoli_windows", "monotone_ell_pair"});
  PropertyConfig pc;
  if (const json* v = o.get("comparison_pairs")) {
    if (!v->is_array()) throw ConfigError(o.child("comparison_pairs"), "expected an array of pairs");
    for (std::size_t k = 0; k < v->size(); ++k)
      pc.comparison_pairs.push_back(pair((*v)[k], o.child("comparison_pairs") + "/" + std::to_string(k)));
  }
  if (const json* v = o.get("barrier_balls")) {
    if (!v->is_array()) throw ConfigError(o.child("barrier_balls"), "expected an array of [x0, y0, R]");
    for (std::size_t k = 0; k < v->size(); ++k) {
      const std::string p = o.child("barrier_balls") + "/" + std::to_string(k);
      const auto b = numbers((*v)[k], p);
      if (b.size() != 3) throw ConfigError(p, "expected [x0, y0, R]");
      pc.barrier_balls.push_back({b[0], b[1], b[2]});
    }
  }
  if (const json* v = o.get("caccioppoli_windows")) {
    if (!v->is_array()) throw ConfigError(o.child("caccioppoli_windows"), "expected an array");
    for (std::size_t k = 0; k < v->size(); ++k) {
      const std::string p = o.child("caccioppoli_windows") + "/" + std::to_string(k);
      Obj w((*v)[k], p, {"inner", "outer"});
      NestedWindows nw{parse_window(w.at("inner"), w.child("inner")), parse_window(w.at("outer"), w.child("outer"))};
      w.done();
      pc.caccioppoli_windows.push_back(nw);
    }
  }
  if (const json* v = o.get("monotone_ell_pair")) pc.monotone_ell_pair = pair(*v, o.child("monotone_ell_pair"));
  o.done();
  return pc;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("malformed JSON: ") + e.what());
  }
  Obj o(doc, "", {"schema_version", "nonlinearity", "p", "geometry", "boundary", "solver", "window", "output",
                   "psi", "ode1d", "a2", "properties", "sweep", "rate"});
  RunConfig c;
  c.schema_version = integer(o.at("schema_version"), "/schema_version");
  if (c.schema_version != 1) throw ConfigError("/schema_version", "unsupported schema_version (expected 1)");
  c.nl = parse_nonlinearity(o.at("nonlinearity"), "/nonlinearity");
  c.p = number(o.at("p"), "/p");
  if (!(c.p > 1.0)) throw ConfigError("/p", "p must exceed 1");
  if (const json* v = o.get("geometry")) c.geometry = parse_geometry(*v, "/geometry");
  if (const json* v = o.get("boundary")) c.boundary = parse_boundary(*v, "/boundary");
  if (const json* v = o.get("solver")) c.solver = parse_solver(*v, "/solver");
  if (const json* v = o.get("window")) c.window = parse_window(*v, "/window");
  if (const json* v = o.get("output")) c.output = string(*v, "/output");
  if (const json* v = o.get("psi")) {
    Obj s(*v, "/psi", {"r_values"});
    c.psi_r_values = numbers(s.at("r_values"), s.child("r_values"));
    s.done();
    for (double r : c.psi_r_values)
      if (!(r > 0.0)) throw ConfigError("/psi/r_values", "r values must be positive");
  }
  if (const json* v = o.get("ode1d")) {
    Obj s(*v, "/ode1d", {"r", "a"});
    if (const json* r = s.get("r")) c.ode1d_r = number(*r, s.child("r"));
    if (const json* a = s.get("a")) c.ode1d_a = number(*a, s.child("a"));
    s.done();
    if (c.ode1d_r.has_value() == c.ode1d_a.has_value())
      throw ConfigError("/ode1d", "give exactly one of r, a");
  }
  if (const json* v = o.get("a2")) {
    Obj s(*v, "/a2", {"beta", "t_max"});
    if (const json* b = s.get("beta")) c.a2_beta = numbers(*b, s.child("beta"));
    if (const json* t = s.get("t_max")) c.a2_t_max = number(*t, s.child("t_max"));
    s.done();
  }
  if (const json* v = o.get("properties")) c.properties = parse_properties(*v, "/properties");
  if (const json* v = o.get("sweep")) {
    Obj s(*v, "/sweep", {"estimate_floor"});
    if (const json* e = s.get("estimate_floor")) c.estimate_floor = boolean(*e, s.child("estimate_floor"));
    s.done();
  }
  if (const json* v = o.get("rate")) {
    Obj s(*v, "/rate", {"input"});
    c.rate_input = string(s.at("input"), s.child("input"));
    s.done();
  }
  o.done();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

}  // namespace cylasym
