#include "compton/harness.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "compton/errors.hpp"
#include "compton/verify.hpp"

namespace compton {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// Strict reader: every key must be known, every value must have the right type.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ParseError(path_ + ": expected an object");
  }
  ~Reader() = default;

  void allow(std::initializer_list<const char*> keys) {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!ok.count(it.key())) throw ParseError(path_ + "/" + it.key() + ": unknown field");
  }
  bool has(const char* k) const { return j_.contains(k) && !j_.at(k).is_null(); }
  double num(const char* k, double def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number()) throw ParseError(at(k) + ": expected a number");
    return v.get<double>();
  }
  int integer(const char* k, int def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number_integer()) throw ParseError(at(k) + ": expected an integer");
    return v.get<int>();
  }
  bool boolean(const char* k, bool def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_boolean()) throw ParseError(at(k) + ": expected true or false");
    return v.get<bool>();
  }
  std::string str(const char* k, const std::string& def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_string()) throw ParseError(at(k) + ": expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const char* k, std::vector<double> def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_array()) throw ParseError(at(k) + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ParseError(at(k) + "/" + std::to_string(i) + ": expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  std::vector<std::vector<double>> rows(const char* k) const {
    std::vector<std::vector<double>> out;
    if (!has(k)) return out;
    const json& v = j_.at(k);
    if (!v.is_array()) throw ParseError(at(k) + ": expected an array of arrays");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_array()) throw ParseError(at(k) + "/" + std::to_string(i) + ": expected an array");
      std::vector<double> r;
      for (std::size_t q = 0; q < v[i].size(); ++q) {
        if (!v[i][q].is_number())
          throw ParseError(at(k) + "/" + std::to_string(i) + "/" + std::to_string(q) + ": expected a number");
        r.push_back(v[i][q].get<double>());
      }
      out.push_back(std::move(r));
    }
    return out;
  }
  Reader child(const char* k) const {
    static const json empty = json::object();
    if (!has(k)) return Reader(empty, at(k));
    return Reader(j_.at(k), at(k));
  }
  std::string at(const char* k) const { return path_ + "/" + k; }

 private:
  const json& j_;
  std::string path_;
};

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json canonical_json(const ExperimentConfig& c) {
  json atoms = json::array();
  for (const Atom& a : c.initial.atoms) atoms.push_back({a.x, a.mass});
  json rm = json::array();
  const std::size_t n = c.initial.atoms.size();
  if (!c.reduced.rate_matrix.empty())
    for (std::size_t i = 0; i < n; ++i)
      rm.push_back(std::vector<double>(c.reduced.rate_matrix.begin() + i * n,
                                       c.reduced.rate_matrix.begin() + (i + 1) * n));
  return json{
      {"mode", c.mode},
      {"physical", {{"beta", c.physical.beta}, {"m", c.physical.m}}},
      {"truncation", {{"theta", c.theta}, {"delta_star", c.delta_star}, {"theta1", c.theta1}}},
      {"grid", {{"min", c.grid.min}, {"max", c.grid.max}, {"n", c.grid.n}}},
      {"initial",
       {{"kind", c.initial.kind},
        {"mu", c.initial.mu},
        {"scale", c.initial.scale},
        {"bump", {{"amplitude", c.initial.bump_amplitude}, {"center", c.initial.bump_center}, {"width", c.initial.bump_width}}},
        {"origin_mass", c.initial.origin_mass},
        {"support", {c.initial.support_min, c.initial.support_max}},
        {"atoms", atoms}}},
      {"solver",
       {{"dt_init", c.solver.dt_init},
        {"dt_min", c.solver.dt_min},
        {"dt_max", c.solver.dt_max},
        {"t_end", c.solver.t_end},
        {"scheme", c.solver.scheme == Scheme::RK4 ? "rk4" : "euler"},
        {"mass_tolerance", c.solver.mass_tolerance},
        {"record_interval", c.solver.record_interval},
        {"n", c.n},
        {"kernel_tol", c.kernel_tol}}},
      {"diagnostics",
       {{"eta", c.solver.eta},
        {"alphas", c.solver.alphas},
        {"eps_list", c.solver.eps_list},
        {"entropy", c.solver.track_entropy},
        {"snapshots", c.solver.keep_snapshots}}},
      {"reduced",
       {{"mode", c.reduced.mode},
        {"rate_matrix", rm},
        {"rtol", c.reduced.rtol},
        {"r", c.reduced.r},
        {"iter_tol", c.reduced.iter_tol},
        {"limit_tol", c.reduced.limit_tol},
        {"limit_window", c.reduced.limit_window},
        {"disable_phi", c.reduced.disable_phi},
        {"outputs", c.reduced.outputs}}},
      {"seed", c.seed}};
}

double c_star_without_cutoff(const PhysicalParams& pp, const std::vector<double>& x, double tol) {
  double best = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i; j < x.size(); ++j)
      best = std::max(best, eval_B(pp, x[i], x[j], tol).value * (x[i] + x[j]) *
                                std::exp(-0.5 * (x[i] + x[j])));
  return best;
}

}  // namespace

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("config is not valid JSON at " + line_col(text, e.byte) + ": " + e.what());
  }
  ExperimentConfig c;
  Reader r(j, "");
  r.allow({"mode", "physical", "truncation", "grid", "initial", "solver", "diagnostics", "reduced", "seed"});
  c.mode = r.str("mode", "full");
  if (c.mode != "full" && c.mode != "reduced") throw ParseError("/mode: expected \"full\" or \"reduced\"");
  {
    Reader p = r.child("physical");
    p.allow({"beta", "m"});
    c.physical.beta = p.num("beta", 1.0);
    c.physical.m = p.num("m", 1.0);
  }
  {
    Reader t = r.child("truncation");
    t.allow({"theta", "delta_star", "theta1"});
    c.theta = t.num("theta", 0.5);
    c.delta_star = t.num("delta_star", 1.0);
    c.theta1 = t.num("theta1", 0.7);
  }
  {
    Reader g = r.child("grid");
    g.allow({"min", "max", "n"});
    c.grid.min = g.num("min", c.grid.min);
    c.grid.max = g.num("max", c.grid.max);
    c.grid.n = g.integer("n", c.grid.n);
  }
  {
    Reader in = r.child("initial");
    in.allow({"kind", "mu", "scale", "bump", "origin_mass", "support", "atoms"});
    c.initial.kind = in.str("kind", "planck_mu");
    c.initial.mu = in.num("mu", -1.0);
    c.initial.scale = in.num("scale", 1.0);
    Reader b = in.child("bump");
    b.allow({"amplitude", "center", "width"});
    c.initial.bump_amplitude = b.num("amplitude", 0.0);
    c.initial.bump_center = b.num("center", 3.0);
    c.initial.bump_width = b.num("width", 1.0);
    c.initial.origin_mass = in.num("origin_mass", 0.0);
    auto sup = in.numbers("support", {0.0, 1e300});
    if (sup.size() != 2) throw ParseError(in.at("support") + ": expected [min, max]");
    c.initial.support_min = sup[0];
    c.initial.support_max = sup[1];
    for (const auto& row : in.rows("atoms")) {
      if (row.size() != 2) throw ParseError(in.at("atoms") + ": each atom is [x, mass]");
      c.initial.atoms.push_back({row[0], row[1]});
    }
    static const std::set<std::string> kinds{"planck_mu", "scaled_planck", "bump", "atoms", "zero"};
    if (!kinds.count(c.initial.kind)) throw ParseError(in.at("kind") + ": unknown initial data kind");
  }
  {
    Reader s = r.child("solver");
    s.allow({"dt_init", "dt_min", "dt_max", "t_end", "scheme", "mass_tolerance", "record_interval", "n", "kernel_tol"});
    c.solver.dt_init = s.num("dt_init", 1e-3);
    c.solver.dt_min = s.num("dt_min", 1e-9);
    c.solver.dt_max = s.num("dt_max", c.solver.dt_init);
    c.solver.t_end = s.num("t_end", 1.0);
    const std::string sch = s.str("scheme", "rk4");
    if (sch == "rk4") c.solver.scheme = Scheme::RK4;
    else if (sch == "euler") c.solver.scheme = Scheme::Euler;
    else throw ParseError(s.at("scheme") + ": expected \"rk4\" or \"euler\"");
    c.solver.mass_tolerance = s.num("mass_tolerance", 1e-10);
    c.solver.record_interval = s.num("record_interval", 0.1);
    c.n = s.integer("n", 20);
    c.kernel_tol = s.num("kernel_tol", 1e-10);
  }
  {
    Reader d = r.child("diagnostics");
    d.allow({"eta", "alphas", "eps_list", "entropy", "snapshots"});
    c.solver.eta = d.num("eta", 0.4);
    c.solver.alphas = d.numbers("alphas", {1.0, 2.0, 3.0});
    c.solver.eps_list = d.numbers("eps_list", {0.4, 0.2, 0.1});
    c.solver.track_entropy = d.boolean("entropy", true);
    c.solver.keep_snapshots = d.boolean("snapshots", true);
  }
  {
    Reader q = r.child("reduced");
    q.allow({"mode", "rate_matrix", "rtol", "r", "iter_tol", "limit_tol", "limit_window", "disable_phi", "outputs"});
    c.reduced.mode = q.str("mode", "picard");
    if (c.reduced.mode != "picard" && c.reduced.mode != "atoms")
      throw ParseError(q.at("mode") + ": expected \"picard\" or \"atoms\"");
    for (const auto& row : q.rows("rate_matrix")) {
      if (row.size() != c.initial.atoms.size())
        throw ParseError(q.at("rate_matrix") + ": must be N x N for the N initial atoms");
      c.reduced.rate_matrix.insert(c.reduced.rate_matrix.end(), row.begin(), row.end());
    }
    if (!c.reduced.rate_matrix.empty() &&
        c.reduced.rate_matrix.size() != c.initial.atoms.size() * c.initial.atoms.size())
      throw ParseError(q.at("rate_matrix") + ": must be N x N for the N initial atoms");
    c.reduced.rtol = q.num("rtol", 1e-10);
    c.reduced.r = q.num("r", 1.0);
    c.reduced.iter_tol = q.num("iter_tol", 1e-13);
    c.reduced.limit_tol = q.num("limit_tol", 1e-8);
    c.reduced.limit_window = q.num("limit_window", 1.0);
    c.reduced.disable_phi = q.boolean("disable_phi", false);
    c.reduced.outputs = q.integer("outputs", 100);
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ParseError("/seed: expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }

  // Validation of parameter domains.
  c.physical.validate();
  if (!(c.theta > 0 && c.theta < 1)) throw ValidationError("truncation: theta must lie in (0,1)");
  if (!(c.theta1 > c.theta && c.theta1 < 1))
    throw ValidationError("truncation: theta1 must lie in (theta, 1), got theta1 = " + fmt17(c.theta1) +
                          " with theta = " + fmt17(c.theta));
  if (!(c.delta_star > 0)) throw ValidationError("truncation: delta_star must be positive");
  c.truncation = TruncationParams::make(c.theta, c.delta_star, c.theta1);
  const double eta = c.solver.eta;
  const double eta_lo = 0.5 * (1.0 - c.theta);
  if (c.mode == "full") {
    if (!(eta < 0.5))
      throw ValidationError("diagnostics/eta = " + fmt17(eta) +
                            " violates the exponential-moment condition eta < 1/2 required by the full solver");
    if (!(eta > eta_lo))
      throw ValidationError("diagnostics/eta = " + fmt17(eta) + " violates eta > (1-theta)/2 = " + fmt17(eta_lo));
    if (c.n < 1) throw ValidationError("solver/n must be >= 1");
    c.solver.validate();
  } else {
    if (!(eta > eta_lo))
      throw ValidationError("diagnostics/eta = " + fmt17(eta) +
                            " violates the reduced-solver condition eta > (1-theta)/2 = " + fmt17(eta_lo));
    if (!(c.solver.t_end > 0)) throw ValidationError("solver/t_end must be positive");
    if (c.reduced.outputs < 1) throw ValidationError("reduced/outputs must be >= 1");
  }
  if (!(c.kernel_tol > 0 && c.kernel_tol <= 1e-3)) throw ValidationError("solver/kernel_tol must lie in (0, 1e-3]");
  const bool atoms_mode = c.mode == "reduced" && c.reduced.mode == "atoms";
  if (atoms_mode && c.initial.atoms.empty()) throw ValidationError("reduced atoms mode needs initial/atoms");
  if (!atoms_mode) {
    if (!(c.grid.min > 0 && c.grid.max > c.grid.min && c.grid.n >= 2))
      throw ValidationError("grid: need 0 < min < max and n >= 2");
  }

  // Derived constants.
  c.derived.rho_star = c.truncation.rho_star;
  c.derived.rho1 = c.truncation.rho1;
  if (c.mode == "full") {
    const Grid g = Grid::log_spaced(c.grid.min, c.grid.max, c.grid.n);
    const RegularizedKernel k = build_regularized_kernel(c.physical, c.truncation, c.n, g, c.kernel_tol);
    c.derived.c_star = k.c_star;
    c.derived.c_eta = c_eta(k.c_star, c.theta, eta);
    c.derived.x_eta0 = exp_moment(make_initial(c), eta);
  } else if (!atoms_mode) {
    const Grid g = Grid::log_spaced(c.grid.min, c.grid.max, c.grid.n);
    c.derived.c_star = c.reduced.disable_phi ? c_star_without_cutoff(c.physical, g.nodes, c.kernel_tol)
                                             : calibrate_c_star(c.physical, c.truncation, g.nodes, c.kernel_tol);
    c.derived.x_eta0 = exp_moment(make_initial(c), eta);
    c.derived.c0 = c.truncation.rho_star * c.derived.c_star * c.derived.x_eta0 /
                   std::sqrt(c.theta * (1.0 + c.theta));
  }
  c.canonical = canonical_json(c).dump();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

HybridMeasure make_initial(const ExperimentConfig& c) {
  const InitialSpec& s = c.initial;
  if (s.kind == "atoms") {
    std::vector<Atom> a = s.atoms;
    if (s.origin_mass > 0) a.push_back({0.0, s.origin_mass});
    return HybridMeasure::from_atoms(a);
  }
  Grid g = Grid::log_spaced(c.grid.min, c.grid.max, c.grid.n);
  std::vector<double> d(g.nodes.size(), 0.0);
  if (s.kind == "planck_mu" || s.kind == "scaled_planck") {
    d = planck_density(g, s.mu);
    for (double& v : d) v *= s.scale;
  }
  if (s.kind != "zero" && s.bump_amplitude != 0.0) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double z = (g.nodes[i] - s.bump_center) / s.bump_width;
      if (std::abs(z) < 1.0) d[i] += s.bump_amplitude * std::exp(-1.0 / (1.0 - z * z));
    }
  }
  for (std::size_t i = 0; i < d.size(); ++i)
    if (g.nodes[i] < s.support_min || g.nodes[i] > s.support_max) d[i] = 0.0;
  HybridMeasure u = HybridMeasure::from_density(std::move(g), std::move(d));
  if (s.origin_mass > 0) u.atoms.push_back({0.0, s.origin_mass});
  u.check();
  return u;
}

bool RunManifest::all_passed() const {
  for (const auto& a : assertions)
    if (!a.passed) return false;
  return true;
}

std::string RunManifest::to_json() const {
  json j;
  if (!preset.empty()) j["preset"] = preset;
  j["config_hash"] = config_hash;
  j["code_version"] = code_version;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  j["derived"] = derived_json.empty() ? json::object() : json::parse(derived_json);
  j["outputs"] = outputs;
  j["assertions"] = json::array();
  for (const auto& a : assertions) j["assertions"].push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
  j["all_passed"] = all_passed();
  return j.dump(2);
}

namespace {

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class OutputDir {
 public:
  OutputDir(const std::string& dir, RunManifest& m) : dir_(dir), m_(m) { fs::create_directories(dir_); }
  void write(const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(dir_) / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (fs::path(dir_) / name).string());
    out << content;
    m_.outputs.push_back(name);
  }
  void finish() {
    m_.outputs.push_back("manifest.json");
    m_.finished_at = utc_now();
    std::ofstream out(fs::path(dir_) / "manifest.json", std::ios::binary);
    out << m_.to_json() << "\n";
  }

 private:
  std::string dir_;
  RunManifest& m_;
};

std::string derived_json(const ExperimentConfig& c) {
  return json{{"rho_star", c.derived.rho_star}, {"rho1", c.derived.rho1}, {"c_star", c.derived.c_star},
              {"c_eta", c.derived.c_eta},       {"c0", c.derived.c0},     {"x_eta0", c.derived.x_eta0}}
      .dump();
}

RunManifest start_manifest(const ExperimentConfig& c) {
  RunManifest m;
  m.config_hash = c.hash();
  m.started_at = utc_now();
  m.derived_json = derived_json(c);
  return m;
}

void expect(RunManifest& m, const std::string& name, bool ok, const std::string& detail) {
  m.assertions.push_back({name, ok, detail});
}

std::string snapshot_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_%.6f.json", t);
  return buf;
}

json limit_json(const AtomRun& run) {
  json j;
  j["converged"] = run.converged;
  if (!run.converged) {
    j["reason"] = run.note;
    return j;
  }
  const LimitClassification& l = run.limit;
  j["atoms"] = json::array();
  for (const auto& a : l.atoms) j["atoms"].push_back({a.x, a.mass, a.component});
  j["components"] = json::array();
  for (std::size_t c = 0; c < l.component_mass.size(); ++c)
    j["components"].push_back({{"min_point", l.component_min_point[c]},
                               {"initial_mass", l.component_mass[c]},
                               {"limit_mass", l.component_limit_mass[c]}});
  j["checks"] = {{"in_initial_support", l.in_initial_support},
                 {"pairwise_disjoint", l.pairwise_disjoint},
                 {"mass_sums", l.mass_sums},
                 {"leftmost_survives", l.leftmost_survives},
                 {"queue_monotone", l.queue_monotone}};
  j["stationarity"] = l.stationarity;
  j["max_component_drift"] = l.max_component_drift;
  j["vanished_mass"] = l.vanished_mass;
  return j;
}

std::string reduced_csv(const PointTrajectory& tr, double eta) {
  std::string csv = "t,M0,M1,M2,X_eta,D_2\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    double M[3] = {0, 0, 0}, X = 0;
    for (std::size_t i = 0; i < tr.locations.size(); ++i) {
      const double x = tr.locations[i], m = tr.masses[k][i];
      M[0] += m;
      M[1] += x * m;
      M[2] += x * x * m;
      X += std::exp(eta * x) * m;
    }
    const double D2 = dissipation_alpha(tr.locations, tr.masses[k], tr.rate, 2.0);
    csv += fmt17(tr.times[k]) + "," + fmt17(M[0]) + "," + fmt17(M[1]) + "," + fmt17(M[2]) + "," + fmt17(X) +
           "," + fmt17(D2) + "\n";
  }
  return csv;
}

void reduced_assertions(RunManifest& m, const PointTrajectory& tr, double mass_tol, double eta) {
  const double M0 = std::accumulate(tr.masses.front().begin(), tr.masses.front().end(), 0.0);
  double drift = 0.0;
  for (const auto& ms : tr.masses)
    drift = std::max(drift, std::abs(std::accumulate(ms.begin(), ms.end(), 0.0) - M0) / std::max(M0, 1e-300));
  expect(m, "mass conservation", drift <= mass_tol, "max relative drift " + fmt17(drift));
  LyapunovReport ly = lyapunov_check(tr, {1.0, 2.0, 3.0});
  bool mono = true, dneg = true;
  for (const auto& r : ly.rows) {
    mono = mono && r.nonincreasing;
    dneg = dneg && r.dissipation_nonpositive;
  }
  expect(m, "M_alpha nonincreasing (alpha = 1,2,3)", mono, "");
  expect(m, "D_alpha <= 0", dneg, "");
  bool xmono = true;
  double prev = INFINITY;
  for (const auto& ms : tr.masses) {
    double X = 0;
    for (std::size_t i = 0; i < ms.size(); ++i) X += std::exp(eta * tr.locations[i]) * ms[i];
    if (X > prev * (1 + 1e-12)) xmono = false;
    prev = X;
  }
  expect(m, "X_eta nonincreasing", xmono, "");
}

}  // namespace

RunManifest simulate_full(const ExperimentConfig& c, const std::string& out_dir) {
  if (c.mode != "full") throw ValidationError("simulate-full needs a config with mode \"full\"");
  RunManifest m = start_manifest(c);
  OutputDir out(out_dir, m);
  out.write("config.json", json::parse(c.canonical).dump(2) + "\n");

  const HybridMeasure u0 = make_initial(c);
  const RegularizedKernel k = build_regularized_kernel(c.physical, c.truncation, c.n, u0.grid, c.kernel_tol);
  const TrajectoryRecord tr = run_full(u0, k, c.solver);

  std::string csv = "t,M0,X_eta,H,D_total,alpha_est\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    csv += fmt17(tr.times[i]) + "," + fmt17(tr.reports[i].M0) + "," + fmt17(tr.reports[i].X_eta) + "," +
           fmt17(tr.reports[i].H) + "," + fmt17(tr.dissipation[i].total) + "," + fmt17(tr.alpha_estimate[i]) + "\n";
  out.write("trajectory.csv", csv);
  for (std::size_t i = 0; i < tr.snapshots.size(); ++i)
    out.write(snapshot_name(tr.times[i]), to_json(tr.snapshots[i]) + "\n");

  expect(m, "mass conservation", tr.max_mass_drift <= c.solver.mass_tolerance,
         "max relative drift " + fmt17(tr.max_mass_drift));
  expect(m, "X_eta growth bound", tr.x_eta_violations == 0,
         std::to_string(tr.x_eta_violations) + " violations, C_eta = " + fmt17(tr.c_eta));
  if (c.solver.track_entropy) {
    const EntropyBalance eb = entropy_balance_check(tr);
    expect(m, "dissipation nonnegative", eb.D_nonnegative, "min step D " + fmt17(tr.min_step_dissipation));
    expect(m, "entropy monotone (nondecreasing)", eb.H_nondecreasing, "");
    expect(m, "entropy balance", eb.relative <= 1e-4,
           "H(t2)-H(t1)-int D = " + fmt17(eb.residual) + " (relative " + fmt17(eb.relative) + ")");
  }
  out.finish();
  return m;
}

RunManifest simulate_reduced(const ExperimentConfig& c, const std::string& out_dir) {
  if (c.mode != "reduced") throw ValidationError("simulate-reduced needs a config with mode \"reduced\"");
  RunManifest m = start_manifest(c);
  OutputDir out(out_dir, m);
  out.write("config.json", json::parse(c.canonical).dump(2) + "\n");
  const double eta = c.solver.eta;
  LimitOptions lo;
  lo.limit_tol = c.reduced.limit_tol;
  lo.window = c.reduced.limit_window;

  if (c.reduced.mode == "atoms") {
    std::vector<double> x, ms;
    for (const Atom& a : c.initial.atoms) {
      x.push_back(a.x);
      ms.push_back(a.mass);
    }
    RateKernel k = c.reduced.rate_matrix.empty()
                       ? RateKernel::physical(c.physical, c.truncation, c.kernel_tol, !c.reduced.disable_phi)
                       : RateKernel::synthetic(x, c.reduced.rate_matrix);
    const AtomSystemState s = AtomSystemState::make(x, ms, k);
    const AtomRun run = run_atoms(s, c.solver.t_end, c.reduced.rtol, c.reduced.outputs, lo);
    out.write("trajectory.csv", reduced_csv(run.traj, eta));
    out.write("limit.json", limit_json(run).dump(2) + "\n");
    reduced_assertions(m, run.traj, 1e-12, eta);
    expect(m, "limit reached", run.converged, run.note);
    if (run.converged) {
      expect(m, "limit atoms in initial support", run.limit.in_initial_support, "");
      expect(m, "limit atoms pairwise disjoint", run.limit.pairwise_disjoint, "");
      expect(m, "component mass sums", run.limit.mass_sums, "max drift " + fmt17(run.limit.max_component_drift));
      expect(m, "leftmost point survives", run.limit.leftmost_survives, "");
      expect(m, "queue monotone", run.limit.queue_monotone, "");
    }
  } else {
    const HybridMeasure u0 = make_initial(c);
    const RateKernel k = RateKernel::physical(c.physical, c.truncation, c.kernel_tol, !c.reduced.disable_phi);
    PicardConfig pc;
    pc.t_end = c.solver.t_end;
    pc.iter_tol = c.reduced.iter_tol;
    pc.r = c.reduced.r;
    pc.eta = eta;
    for (int q = 1; q < c.reduced.outputs; ++q) pc.output_times.push_back(c.solver.t_end * q / c.reduced.outputs);
    const PicardTrajectory tr = picard_solve(u0, k, pc);
    const PointTrajectory pts = tr.to_points();
    out.write("trajectory.csv", reduced_csv(pts, eta));
    AtomRun run;
    run.traj = pts;
    try {
      run.limit = classify_limit(pts, lo);
      run.converged = true;
    } catch (const NotConverged& e) {
      run.note = e.what();
    }
    out.write("limit.json", limit_json(run).dump(2) + "\n");
    reduced_assertions(m, pts, 1e-10, eta);
    const double ratio = flatness_bound_ratio(tr);
    expect(m, "flatness bound u <= u0 exp(t C0 / x^1.5)", ratio <= 1.0 + 1e-9,
           "max ratio " + fmt17(ratio) + ", C0 = " + fmt17(tr.c0));
  }
  out.finish();
  return m;
}

std::vector<std::string> preset_names() {
  return {"equilibrium", "over-planck", "planck-bump", "example51", "flat-picard",
          "kernel-verify", "random-atoms", "dirac"};
}

std::string preset_config(const std::string& name) {
  if (name == "equilibrium")
    return R"({"mode":"full","initial":{"kind":"planck_mu","mu":-1},
              "solver":{"t_end":1,"dt_init":1e-3,"record_interval":0.1}})";
  if (name == "over-planck")
    return R"({"mode":"full","initial":{"kind":"scaled_planck","mu":-1,"scale":2},
              "solver":{"t_end":1,"dt_init":1e-3,"record_interval":0.1}})";
  if (name == "planck-bump")
    return R"({"mode":"full","initial":{"kind":"planck_mu","mu":-1,"bump":{"amplitude":0.5,"center":3,"width":1}},
              "solver":{"t_end":1,"dt_init":1e-3,"record_interval":0.1}})";
  if (name == "example51")
    return R"({"mode":"reduced","initial":{"kind":"atoms","atoms":[[1,0.6],[2,0.2],[3,0.2]]},
              "reduced":{"mode":"atoms","rate_matrix":[[0,1,0],[-1,0,1],[0,-1,0]],"rtol":1e-12,"outputs":200},
              "solver":{"t_end":200}})";
  if (name == "flat-picard")
    return R"({"mode":"reduced","grid":{"min":0.5,"max":30,"n":200},
              "initial":{"kind":"planck_mu","mu":0,"support":[0.5,30]},
              "reduced":{"mode":"picard","outputs":50},"solver":{"t_end":5}})";
  if (name == "kernel-verify" || name == "random-atoms" || name == "dirac") return "{}";
  throw UnknownPreset("unknown preset \"" + name + "\"");
}

RunManifest run_preset(const std::string& name, const std::string& out_dir) {
  const std::string text = preset_config(name);
  if (name == "kernel-verify" || name == "random-atoms" || name == "dirac") {
    const ExperimentConfig c = parse_config(text);
    RunManifest m = start_manifest(c);
    m.preset = name;
    OutputDir out(out_dir, m);
    std::vector<int> ids = name == "kernel-verify" ? std::vector<int>{1, 2, 3}
                           : name == "random-atoms" ? std::vector<int>{11}
                                                    : std::vector<int>{12};
    json res = json::array();
    for (int id : ids) {
      const CriterionResult r = run_criterion(id);
      expect(m, r.name, r.passed, r.detail);
      res.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    }
    out.write("checks.json", res.dump(2) + "\n");
    out.finish();
    return m;
  }
  const ExperimentConfig c = parse_config(text);
  RunManifest m = c.mode == "full" ? simulate_full(c, out_dir) : simulate_reduced(c, out_dir);
  m.preset = name;
  if (name == "equilibrium" || name == "over-planck") {
    const HybridMeasure u0 = make_initial(c);
    std::ifstream in(fs::path(out_dir) / snapshot_name(c.solver.t_end));
    std::stringstream ss;
    ss << in.rdbuf();
    const HybridMeasure uT = measure_from_json(ss.str());
    if (name == "equilibrium") {
      double l1 = 0.0;
      for (std::size_t i = 0; i < u0.density.size(); ++i)
        l1 += u0.grid.weights[i] * std::abs(uT.density[i] - u0.density[i]);
      expect(m, "g_{-1} stationary", l1 <= 1e-5, "L1 drift " + fmt17(l1));
    } else {
      expect(m, "entropy increased", entropy(uT) > entropy(u0),
             "H(0) = " + fmt17(entropy(u0)) + ", H(T) = " + fmt17(entropy(uT)));
    }
  } else if (name == "example51") {
    const std::vector<double> x{1, 2, 3};
    const AtomSystemState s =
        AtomSystemState::make(x, {0.6, 0.2, 0.2}, RateKernel::synthetic(x, c.reduced.rate_matrix));
    const auto mT = integrate_atoms(s, {200.0}, c.reduced.rtol).masses.back();
    expect(m, "y(200) <= 1e-16", mT[1] <= 1e-16, "y(200) = " + fmt17(mT[1]));
    const double zb = 0.2 * std::exp(-1.0);
    expect(m, "z_inf >= 0.2 e^{-1}", mT[2] >= zb - 1e-9, "z(200) = " + fmt17(mT[2]) + ", bound " + fmt17(zb));
  }
  m.finished_at = utc_now();
  std::ofstream mf(fs::path(out_dir) / "manifest.json", std::ios::binary);
  mf << m.to_json() << "\n";
  return m;
}

std::string kernel_table_csv(const PhysicalParams& p, const Grid& g, double tol) {
  const auto tab = kernel_table(p, g.nodes, tol);
  std::string csv = "x,y,B,err\n";
  for (const auto& s : tab)
    csv += fmt17(s.x) + "," + fmt17(s.y) + "," + fmt17(s.value) + "," + fmt17(s.abs_error_estimate) + "\n";
  return csv;
}

std::string region_dump_csv(const TruncationParams& tp, const Grid& g) {
  std::string csv = "x,gamma1,gamma2,d1_lower,d1_upper\n";
  for (double x : g.nodes)
    csv += fmt17(x) + "," + fmt17(gamma1(tp, x)) + "," + fmt17(gamma2(tp, x)) + "," +
           fmt17(gamma1_curve(tp.theta1, tp.rho1, tp.delta_star, x)) + "," +
           fmt17(gamma2_curve(tp.theta1, tp.rho1, tp.delta_star, x)) + "\n";
  return csv;
}

}  // namespace compton
