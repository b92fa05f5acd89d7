#include "compton/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "compton/errors.hpp"

namespace compton {

Grid Grid::log_spaced(double xmin, double xmax, int n) {
  if (!(xmin > 0) || !(xmax > xmin) || n < 2)
    throw DomainError("grid needs 0 < min < max and at least 2 nodes");
  Grid g;
  g.xmin = xmin;
  g.xmax = xmax;
  g.n = n;
  g.nodes.resize(n);
  g.weights.resize(n);
  const double h = std::log(xmax / xmin) / (n - 1);
  for (int i = 0; i < n; ++i) g.nodes[i] = xmin * std::exp(h * i);
  g.nodes[0] = xmin;
  g.nodes[n - 1] = xmax;
  for (int i = 0; i < n; ++i) g.weights[i] = g.nodes[i] * h;
  g.weights[0] *= 0.5;
  g.weights[n - 1] *= 0.5;
  return g;
}

HybridMeasure HybridMeasure::from_atoms(std::vector<Atom> atoms) {
  HybridMeasure u;
  u.atoms = std::move(atoms);
  u.normalize();
  return u;
}

HybridMeasure HybridMeasure::from_density(Grid grid, std::vector<double> density) {
  if (density.size() != grid.nodes.size()) throw DomainError("density size does not match grid");
  HybridMeasure u;
  u.grid = std::move(grid);
  u.density = std::move(density);
  return u;
}

void HybridMeasure::normalize(double location_eps) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  std::vector<Atom> out;
  for (const Atom& a : atoms) {
    if (!(a.mass > 0)) continue;
    if (!out.empty() && std::abs(a.x - out.back().x) < location_eps * std::max(1.0, a.x)) {
      Atom& b = out.back();
      const double mt = a.mass + b.mass;
      b.x = (a.x * a.mass + b.x * b.mass) / mt;
      b.mass = mt;
    } else {
      out.push_back(a);
    }
  }
  atoms = std::move(out);
}

double HybridMeasure::origin_mass() const {
  double a = 0.0;
  for (const Atom& at : atoms)
    if (at.x == 0.0) a += at.mass;
  return a;
}

void HybridMeasure::check() const {
  for (size_t i = 0; i < atoms.size(); ++i) {
    if (!(atoms[i].x >= 0) || !std::isfinite(atoms[i].x)) throw DomainError("atom location invalid");
    if (!(atoms[i].mass >= 0) || !std::isfinite(atoms[i].mass)) throw DomainError("atom mass invalid");
    if (i > 0 && !(atoms[i].x > atoms[i - 1].x)) throw DomainError("atoms not sorted/distinct");
  }
  if (density.size() != grid.nodes.size()) throw DomainError("density size does not match grid");
  for (double g : density)
    if (!(g >= 0) || !std::isfinite(g)) throw DomainError("density value invalid");
}

double moment(const HybridMeasure& u, double rho) {
  double s = 0.0;
  for (const Atom& a : u.atoms) {
    if (a.x == 0.0) {
      if (rho < 0) throw DomainError("moment of negative order with an atom at the origin");
      if (rho == 0) s += a.mass;
    } else {
      s += a.mass * std::pow(a.x, rho);
    }
  }
  for (size_t i = 0; i < u.density.size(); ++i)
    s += u.grid.weights[i] * std::pow(u.grid.nodes[i], rho) * u.density[i];
  return s;
}

double exp_moment(const HybridMeasure& u, double eta) {
  if (eta < 0) throw DomainError("exp_moment needs eta >= 0");
  double xmax = 0.0;
  for (const Atom& a : u.atoms) xmax = std::max(xmax, a.x);
  if (!u.grid.empty()) xmax = std::max(xmax, u.grid.xmax);
  if (eta * xmax > 700.0) throw Overflow("exp_moment: eta * max location exceeds 700");
  double s = 0.0;
  for (const Atom& a : u.atoms) s += a.mass * std::exp(eta * a.x);
  for (size_t i = 0; i < u.density.size(); ++i)
    s += u.grid.weights[i] * std::exp(eta * u.grid.nodes[i]) * u.density[i];
  return s;
}

double entropy_density(double x, double s) {
  if (s <= 0) return 0.0;
  const double x2 = x * x;
  if (x2 == 0.0) return -s * x;  // (s log s - s log s)
  const double t = x2 + s;
  return t * std::log(t) - s * std::log(s) - x2 * std::log(x2) - s * x;
}

double entropy(const HybridMeasure& u) {
  double H = 0.0;
  for (size_t i = 0; i < u.density.size(); ++i)
    H += u.grid.weights[i] * entropy_density(u.grid.nodes[i], u.density[i]);
  for (const Atom& a : u.atoms) H -= a.x * a.mass;
  return H;
}

namespace {

using PL = std::vector<std::pair<double, double>>;  // concave piecewise-linear, sorted by phi

double interp(const PL& f, double x) {
  for (size_t i = 1; i < f.size(); ++i) {
    if (x <= f[i].first) {
      const auto& [x0, y0] = f[i - 1];
      const auto& [x1, y1] = f[i];
      if (x1 == x0) return std::max(y0, y1);
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
  }
  return f.back().second;
}

PL clip_unit(const PL& f) {
  PL out;
  out.emplace_back(-1.0, interp(f, -1.0));
  for (const auto& p : f)
    if (p.first > -1.0 + 1e-15 && p.first < 1.0 - 1e-15) out.push_back(p);
  out.emplace_back(1.0, interp(f, 1.0));
  return out;
}

// sup over psi in [phi-d, phi+d] of f(psi), restricted to [-1,1].
PL window(const PL& f, double d) {
  size_t a = 0;
  for (size_t i = 1; i < f.size(); ++i)
    if (f[i].second > f[a].second) a = i;
  PL g;
  for (size_t i = 0; i <= a; ++i) g.emplace_back(f[i].first - d, f[i].second);
  for (size_t i = a; i < f.size(); ++i) g.emplace_back(f[i].first + d, f[i].second);
  return clip_unit(g);
}

void add_points(const HybridMeasure& u, double sign, std::vector<std::pair<double, double>>& pts) {
  for (const Atom& a : u.atoms) pts.emplace_back(a.x, sign * a.mass);
  for (size_t i = 0; i < u.density.size(); ++i)
    if (u.density[i] != 0.0) pts.emplace_back(u.grid.nodes[i], sign * u.grid.weights[i] * u.density[i]);
}

}  // namespace

double bl_distance(const HybridMeasure& u, const HybridMeasure& v) {
  std::vector<std::pair<double, double>> pts;
  add_points(u, 1.0, pts);
  add_points(v, -1.0, pts);
  if (pts.empty()) return 0.0;
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  // Merge coincident locations.
  std::vector<std::pair<double, double>> merged;
  for (const auto& p : pts) {
    if (!merged.empty() && merged.back().first == p.first)
      merged.back().second += p.second;
    else
      merged.push_back(p);
  }
  PL V{{-1.0, -merged[0].second}, {1.0, merged[0].second}};
  for (size_t k = 1; k < merged.size(); ++k) {
    V = window(V, merged[k].first - merged[k - 1].first);
    for (auto& p : V) p.second += merged[k].second * p.first;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : V) best = std::max(best, p.second);
  return std::max(best, 0.0);
}

bool gamma_disjoint(const TruncationParams& tp, double a, double c) {
  const double lo = std::min(a, c), hi = std::max(a, c);
  if (lo == hi) return false;
  return lo <= gamma1(tp, hi);
}

std::vector<double> ComponentPartition::masses() const {
  std::vector<double> m;
  for (const auto& c : components) m.push_back(c.mass);
  return m;
}

std::vector<double> ComponentPartition::min_points() const {
  std::vector<double> m;
  for (const auto& c : components) m.push_back(c.lo);
  return m;
}

ComponentPartition components(const HybridMeasure& u, const TruncationParams& tp,
                              double mass_eps) {
  const double M0 = moment(u, 0.0);
  struct Piece {
    double lo, hi, mass;
    long atom;  // -1 for a grid range
    size_t first, last;
  };
  std::vector<Piece> pieces;
  for (size_t k = 0; k < u.atoms.size(); ++k)
    pieces.push_back({u.atoms[k].x, u.atoms[k].x, u.atoms[k].mass, static_cast<long>(k), 0, 0});
  const double floor_mass = mass_eps * M0;
  for (size_t i = 0; i < u.density.size();) {
    if (!(u.grid.weights[i] * u.density[i] > floor_mass)) {
      ++i;
      continue;
    }
    size_t j = i;
    double mass = 0.0;
    while (j < u.density.size() && u.grid.weights[j] * u.density[j] > floor_mass) {
      mass += u.grid.weights[j] * u.density[j];
      ++j;
    }
    pieces.push_back({u.grid.nodes[i], u.grid.nodes[j - 1], mass, -1, i, j - 1});
    i = j;
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const Piece& a, const Piece& b) { return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi); });

  ComponentPartition part;
  Component cur;
  bool open = false;
  auto add = [&](const Piece& p) {
    if (!open) {
      cur = Component{};
      cur.lo = p.lo;
      cur.hi = p.hi;
      open = true;
    }
    cur.hi = std::max(cur.hi, p.hi);
    cur.mass += p.mass;
    if (p.atom >= 0)
      cur.atom_indices.push_back(static_cast<size_t>(p.atom));
    else
      cur.ranges.emplace_back(p.first, p.last);
  };
  for (const Piece& p : pieces) {
    if (open && p.lo > cur.hi && gamma1(tp, p.lo) >= cur.hi) {
      part.components.push_back(cur);
      open = false;
    }
    add(p);
  }
  if (open) part.components.push_back(cur);
  return part;
}

MomentReport make_report(const HybridMeasure& u, const std::vector<double>& alphas, double eta,
                         const TruncationParams* tp) {
  MomentReport r;
  r.M0 = moment(u, 0.0);
  for (double a : alphas) r.M_alpha[a] = moment(u, a);
  r.eta = eta;
  r.X_eta = exp_moment(u, eta);
  r.H = entropy(u);
  r.alpha0 = u.origin_mass();
  if (tp) r.component_masses = components(u, *tp).masses();
  return r;
}

std::string to_json(const HybridMeasure& u, int indent) {
  nlohmann::json j;
  j["atoms"] = nlohmann::json::array();
  for (const Atom& a : u.atoms) j["atoms"].push_back({a.x, a.mass});
  if (u.grid.empty()) {
    j["grid"] = nullptr;
  } else {
    j["grid"] = {{"min", u.grid.xmin}, {"max", u.grid.xmax}, {"n", u.grid.n}, {"spacing", "log"}};
  }
  j["density"] = u.density;
  return j.dump(indent);
}

HybridMeasure measure_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("measure JSON: ") + e.what());
  }
  HybridMeasure u;
  try {
    for (const auto& a : j.at("atoms")) u.atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    if (!j.at("grid").is_null()) {
      const auto& g = j.at("grid");
      if (g.value("spacing", std::string("log")) != "log") throw ParseError("/grid/spacing: only \"log\" is supported");
      u.grid = Grid::log_spaced(g.at("min").get<double>(), g.at("max").get<double>(), g.at("n").get<int>());
    }
    u.density = j.at("density").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("measure JSON: ") + e.what());
  }
  u.check();
  return u;
}

}  // namespace compton
