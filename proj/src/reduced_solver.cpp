#include "compton/reduced_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/numeric/odeint.hpp>

#include "compton/errors.hpp"
#include "compton/quadrature.hpp"

namespace compton {

RateKernel RateKernel::physical(const PhysicalParams& pp, const TruncationParams& tp, double tol,
                                bool use_phi) {
  RateKernel k;
  k.kind = Kind::Physical;
  k.pp = pp;
  k.tp = tp;
  k.tol = tol;
  k.use_phi = use_phi;
  return k;
}

RateKernel RateKernel::synthetic(std::vector<double> locations, std::vector<double> table) {
  const std::size_t n = locations.size();
  if (table.size() != n * n) throw ValidationError("rate table must be N x N for N locations");
  for (std::size_t i = 0; i < n; ++i) {
    if (table[i * n + i] != 0.0) throw ValidationError("rate table must have a zero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      if (table[i * n + j] != -table[j * n + i])
        throw ValidationError("rate table must be antisymmetric");
      if (!std::isfinite(table[i * n + j])) throw ValidationError("rate table entries must be finite");
    }
    for (std::size_t j = i + 1; j < n; ++j)
      if (locations[i] == locations[j]) throw ValidationError("rate table locations must be distinct");
  }
  RateKernel k;
  k.kind = Kind::Synthetic;
  k.locations = std::move(locations);
  k.table = std::move(table);
  return k;
}

double RateKernel::eval(double x, double y) const {
  if (x == y) return 0.0;
  if (kind == Kind::Synthetic) {
    const std::size_t n = locations.size();
    auto idx = [&](double v) {
      for (std::size_t i = 0; i < n; ++i)
        if (locations[i] == v) return i;
      throw DomainError("synthetic rate table has no entry for this location");
    };
    return table[idx(x) * n + idx(y)];
  }
  if (!(x > 0) || !(y > 0)) return 0.0;
  if (x > y) return -eval(y, x);
  const double phi = use_phi ? eval_Phi(tp, x, y) : 1.0;
  if (phi == 0.0) return 0.0;
  return phi * eval_B(pp, x, y, tol).value / (x * y) * (std::exp(-x) - std::exp(-y));
}

namespace {
void rate_row(const RateKernel& k, const std::vector<double>& x, std::vector<double>& R,
              std::size_t i) {
  const std::size_t n = x.size();
  for (std::size_t j = i + 1; j < n; ++j) {
    const double v = k.eval(x[i], x[j]);
    R[i * n + j] = v;
    R[j * n + i] = -v;
  }
}
}  // namespace

std::vector<double> rate_matrix(const RateKernel& k, const std::vector<double>& x) {
  std::vector<double> R(x.size() * x.size(), 0.0);
  const long n = static_cast<long>(x.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) rate_row(k, x, R, static_cast<std::size_t>(i));
  return R;
}

std::vector<double> rate_matrix_serial(const RateKernel& k, const std::vector<double>& x) {
  std::vector<double> R(x.size() * x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) rate_row(k, x, R, i);
  return R;
}

AtomSystemState AtomSystemState::make(std::vector<double> locations, std::vector<double> masses,
                                      const RateKernel& k) {
  if (locations.size() != masses.size()) throw DomainError("locations and masses differ in size");
  std::vector<std::size_t> order(locations.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return locations[a] < locations[b]; });
  AtomSystemState s;
  for (auto i : order) {
    if (!(locations[i] >= 0) || !(masses[i] >= 0)) throw DomainError("atoms need x >= 0 and mass >= 0");
    if (!s.locations.empty() && locations[i] == s.locations.back())
      throw DomainError("atom locations must be distinct");
    s.locations.push_back(locations[i]);
    s.masses.push_back(masses[i]);
  }
  s.rate = rate_matrix(k, s.locations);
  return s;
}

std::vector<double> atom_ode_rhs(const std::vector<double>& R, const std::vector<double>& m) {
  const std::size_t n = m.size();
  std::vector<double> r(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i] == 0.0) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double f = R[i * n + j] * m[i] * m[j];
      r[i] += f;
      r[j] -= f;
    }
  }
  return r;
}

std::vector<double> atom_ode_rhs(const AtomSystemState& s) { return atom_ode_rhs(s.rate, s.masses); }

HybridMeasure PointTrajectory::measure_at(std::size_t k) const {
  std::vector<Atom> a;
  for (std::size_t i = 0; i < locations.size(); ++i)
    if (masses[k][i] > 0) a.push_back({locations[i], masses[k][i]});
  HybridMeasure u;
  u.atoms = std::move(a);
  return u;
}

PointTrajectory integrate_atoms(const AtomSystemState& s, const std::vector<double>& times,
                                double rtol) {
  namespace ode = boost::numeric::odeint;
  using State = std::vector<double>;
  PointTrajectory tr;
  tr.locations = s.locations;
  tr.rate = s.rate;
  std::vector<double> ts = times;
  if (ts.empty() || ts.front() != 0.0) ts.insert(ts.begin(), 0.0);
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (!(ts[i] > ts[i - 1])) throw DomainError("output times must be strictly increasing");
  State m = s.masses;
  auto sys = [&](const State& y, State& dy, double) { dy = atom_ode_rhs(s.rate, y); };
  auto obs = [&](const State& y, double t) {
    tr.times.push_back(t);
    tr.masses.push_back(y);
  };
  if (ts.size() == 1) {
    obs(m, 0.0);
    return tr;
  }
  auto stepper = ode::make_dense_output(1e-300, rtol, ode::runge_kutta_dopri5<State>());
  ode::integrate_times(stepper, sys, m, ts.begin(), ts.end(), 1e-3, obs,
                       ode::max_step_checker(10000000));
  return tr;
}

std::vector<std::vector<std::size_t>> coupling_components(const std::vector<double>& R,
                                                          const std::vector<double>& masses) {
  const std::size_t n = masses.size();
  std::vector<int> label(n, -1);
  std::vector<std::vector<std::size_t>> comps;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(masses[i] > 0) || label[i] >= 0) continue;
    const int c = static_cast<int>(comps.size());
    comps.emplace_back();
    std::vector<std::size_t> stack{i};
    label[i] = c;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      comps[c].push_back(p);
      for (std::size_t q = 0; q < n; ++q)
        if (label[q] < 0 && masses[q] > 0 && R[p * n + q] != 0.0) {
          label[q] = c;
          stack.push_back(q);
        }
    }
    std::sort(comps[c].begin(), comps[c].end());
  }
  return comps;
}

LimitClassification classify_limit(const PointTrajectory& traj, const LimitOptions& opt) {
  if (traj.times.empty()) throw NotConverged("classify_limit: empty trajectory");
  const std::size_t n = traj.locations.size();
  const std::size_t last = traj.times.size() - 1;
  const auto& m0 = traj.masses.front();
  const auto& mT = traj.masses[last];
  const double M0 = std::accumulate(m0.begin(), m0.end(), 0.0);
  LimitClassification lc;

  const double t_ref = traj.times[last] - opt.window;
  std::size_t k0 = 0;
  for (std::size_t k = 0; k <= last; ++k)
    if (traj.times[k] <= t_ref + 1e-12 * std::max(1.0, std::abs(t_ref))) k0 = k;
  lc.stationarity = bl_distance(traj.measure_at(k0), traj.measure_at(last));

  std::vector<bool> survives(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    double lr = 0.0;
    for (std::size_t j = 0; j < n; ++j) lr += traj.rate[i * n + j] * mT[j];
    survives[i] = mT[i] > opt.vanish_mass * M0 && lr >= -opt.vanish_rate;
    if (!survives[i]) lc.vanished_mass += mT[i];
  }
  if (traj.times[last] - traj.times[k0] < opt.window * (1 - 1e-12) || lc.stationarity > opt.limit_tol)
    throw NotConverged("classify_limit: stationarity rule not met (d0 = " +
                       std::to_string(lc.stationarity) + ")");
  if (lc.vanished_mass > 1e-2 * opt.mass_sum_tol * M0)
    throw NotConverged("classify_limit: vanishing atoms still carry mass " +
                       std::to_string(lc.vanished_mass));

  const auto comps = coupling_components(traj.rate, m0);
  std::vector<std::size_t> comp_of(n, 0);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    double mass = 0.0;
    double lo = INFINITY;
    for (auto i : comps[c]) {
      comp_of[i] = c;
      mass += m0[i];
      lo = std::min(lo, traj.locations[i]);
    }
    lc.component_mass.push_back(mass);
    lc.component_min_point.push_back(lo);
  }
  for (std::size_t k = 0; k <= last; ++k)
    for (std::size_t c = 0; c < comps.size(); ++c) {
      double s = 0.0;
      for (auto i : comps[c]) s += traj.masses[k][i];
      lc.max_component_drift = std::max(lc.max_component_drift, std::abs(s - lc.component_mass[c]) / M0);
    }

  // Survivors, merged into clusters when adjacent ones are still coupled.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return traj.locations[a] < traj.locations[b]; });
  std::vector<std::size_t> surv;
  for (auto i : order)
    if (survives[i]) surv.push_back(i);
  std::size_t prev = n;
  for (auto i : surv) {
    if (prev < n && traj.rate[prev * n + i] != 0.0) {
      lc.atoms.back().mass += mT[i];
    } else {
      lc.atoms.push_back({traj.locations[i], mT[i], comp_of[i]});
    }
    prev = i;
  }

  lc.in_initial_support = true;
  for (auto i : surv)
    if (!(m0[i] > 0)) lc.in_initial_support = false;

  lc.pairwise_disjoint = true;
  for (std::size_t a = 0; a < surv.size(); ++a)
    for (std::size_t b = a + 1; b < surv.size(); ++b)
      if (traj.rate[surv[a] * n + surv[b]] != 0.0) lc.pairwise_disjoint = false;

  lc.component_limit_mass.assign(comps.size(), 0.0);
  for (auto i : surv) lc.component_limit_mass[comp_of[i]] += mT[i];
  lc.mass_sums = true;
  for (std::size_t c = 0; c < comps.size(); ++c)
    if (std::abs(lc.component_limit_mass[c] - lc.component_mass[c]) > opt.mass_sum_tol * M0)
      lc.mass_sums = false;

  lc.leftmost_survives = true;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (!(lc.component_min_point[c] > 0)) continue;
    bool found = false;
    for (auto i : surv)
      if (traj.locations[i] == lc.component_min_point[c]) found = true;
    if (!found) lc.leftmost_survives = false;
  }

  // Queue monotonicity: mass in [r, inf) never increases.
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < n; ++i)
    if (m0[i] > 0) {
      lo = std::min(lo, traj.locations[i]);
      hi = std::max(hi, traj.locations[i]);
    }
  lc.queue_monotone = true;
  for (int q = 0; q < 10 && lo <= hi; ++q) {
    const double r = lo + (hi - lo) * q / 9.0;
    double before = INFINITY;
    for (std::size_t k = 0; k <= last; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (traj.locations[i] >= r) s += traj.masses[k][i];
      if (s > before + 1e-12 * M0) lc.queue_monotone = false;
      before = s;
    }
  }
  return lc;
}

AtomRun run_atoms(const AtomSystemState& s, double t_end, double rtol, int n_out,
                  const LimitOptions& opt) {
  if (!(t_end > 0)) throw DomainError("run_atoms: t_end must be positive");
  std::vector<double> ts;
  for (int k = 0; k <= n_out; ++k) ts.push_back(t_end * k / n_out);
  ts.back() = t_end;
  if (t_end > opt.window) ts.push_back(t_end - opt.window);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  AtomRun run;
  run.traj = integrate_atoms(s, ts, rtol);
  try {
    run.limit = classify_limit(run.traj, opt);
    run.converged = true;
  } catch (const NotConverged& e) {
    run.note = e.what();
  }
  return run;
}

AtomRun run_atoms_to_limit(const AtomSystemState& s, double rtol, double t_start, double t_max,
                           const LimitOptions& opt) {
  double T = t_start;
  while (true) {
    AtomRun run = run_atoms(s, T, rtol, 100, opt);
    if (run.converged) return run;
    if (T >= t_max) throw NotConverged("run_atoms_to_limit: " + run.note);
    T = std::min(2.0 * T, t_max);
  }
}

double dissipation_alpha(const std::vector<double>& x, const std::vector<double>& m,
                         const std::vector<double>& R, double alpha) {
  const std::size_t n = x.size();
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = std::pow(x[i], alpha);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d += 2.0 * R[i * n + j] * (p[i] - p[j]) * m[i] * m[j];
  return d;
}

double dissipation_alpha(const HybridMeasure& u, const RateKernel& k, double alpha) {
  std::vector<Atom> pts = u.atoms;
  for (std::size_t i = 0; i < u.density.size(); ++i)
    if (u.density[i] > 0) pts.push_back({u.grid.nodes[i], u.grid.weights[i] * u.density[i]});
  HybridMeasure v = HybridMeasure::from_atoms(pts);
  std::vector<double> x, m;
  for (const Atom& a : v.atoms) {
    x.push_back(a.x);
    m.push_back(a.mass);
  }
  return dissipation_alpha(x, m, rate_matrix(k, x), alpha);
}

bool LyapunovReport::ok(double rel_tol) const {
  for (const auto& r : rows)
    if (!r.nonincreasing || !r.dissipation_nonpositive || r.max_rel_err > rel_tol) return false;
  return true;
}

LyapunovReport lyapunov_check(const PointTrajectory& traj, const std::vector<double>& alphas) {
  LyapunovReport rep;
  const std::size_t K = traj.times.size();
  const std::size_t n = traj.locations.size();
  for (double a : alphas) {
    LyapunovRow row;
    row.alpha = a;
    std::vector<double> M(K), D(K);
    for (std::size_t k = 0; k < K; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::pow(traj.locations[i], a) * traj.masses[k][i];
      M[k] = s;
      D[k] = dissipation_alpha(traj.locations, traj.masses[k], traj.rate, a);
      if (D[k] > 0) row.dissipation_nonpositive = false;
    }
    for (std::size_t k = 1; k < K; ++k) {
      const double inc = M[k] - M[k - 1];
      if (inc > 1e-12 * std::abs(M[k - 1])) row.nonincreasing = false;
      row.max_increase = std::max(row.max_increase, inc);
    }
    for (std::size_t k = 1; k + 1 < K; ++k) {
      const double h1 = traj.times[k] - traj.times[k - 1];
      const double h2 = traj.times[k + 1] - traj.times[k];
      if (std::abs(h1 - h2) > 1e-9 * std::max(h1, h2)) continue;
      const double fd = (M[k + 1] - M[k - 1]) / (h1 + h2);
      const double target = 0.5 * D[k];
      if (std::abs(target) < 1e-10 * std::abs(M[k])) continue;
      row.max_rel_err = std::max(row.max_rel_err, std::abs(fd - target) / std::abs(target));
      ++row.points;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {

std::vector<double> rates_impl(const std::vector<double>& RW, const std::vector<double>& u,
                               bool parallel) {
  const long n = static_cast<long>(u.size());
  std::vector<double> F(u.size());
  auto row = [&](long i) {
    const double* r = &RW[static_cast<std::size_t>(i) * u.size()];
    double s = 0.0;
    for (long j = 0; j < n; ++j) s += r[j] * u[j];
    F[i] = s;
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) row(i);
  } else {
    for (long i = 0; i < n; ++i) row(i);
  }
  return F;
}

}  // namespace

std::vector<double> picard_rates(const std::vector<double>& RW, const std::vector<double>& u) {
  return rates_impl(RW, u, true);
}

std::vector<double> picard_rates_serial(const std::vector<double>& RW,
                                        const std::vector<double>& u) {
  return rates_impl(RW, u, false);
}

double flatness_integral(const HybridMeasure& u0, double r, double eta) {
  double s = 0.0;
  for (std::size_t i = 0; i < u0.density.size(); ++i) {
    if (u0.density[i] == 0.0) continue;
    const double x = u0.grid.nodes[i];
    const double e1 = r / std::pow(x, 1.5), e2 = eta * x;
    if (e1 > 700.0 || e2 > 700.0)
      throw FlatnessViolation("flatness integral diverges numerically near x = " + std::to_string(x));
    s += u0.grid.weights[i] * u0.density[i] * (std::exp(e1) + std::exp(e2));
  }
  for (const Atom& a : u0.atoms) {
    if (a.mass == 0.0) continue;
    if (a.x == 0.0) throw FlatnessViolation("mass at the origin makes the flatness integral infinite");
    const double e1 = r / std::pow(a.x, 1.5), e2 = eta * a.x;
    if (e1 > 700.0 || e2 > 700.0)
      throw FlatnessViolation("flatness integral diverges numerically near x = " + std::to_string(a.x));
    s += a.mass * (std::exp(e1) + std::exp(e2));
  }
  if (!std::isfinite(s) || s > 1e300) throw FlatnessViolation("flatness integral is not finite");
  return s;
}

PointTrajectory PicardTrajectory::to_points() const {
  PointTrajectory p;
  p.locations = grid.nodes;
  p.rate = rate;
  p.times = times;
  for (const auto& d : densities) {
    std::vector<double> m(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m[i] = grid.weights[i] * d[i];
    p.masses.push_back(std::move(m));
  }
  return p;
}

PicardTrajectory picard_solve(const HybridMeasure& u0, const RateKernel& k, const PicardConfig& cfg) {
  if (!u0.atoms.empty()) throw DomainError("picard_solve needs a pure grid density");
  if (u0.grid.empty()) throw DomainError("picard_solve needs a grid");
  if (!(cfg.t_end > 0)) throw DomainError("picard_solve: t_end must be positive");
  u0.check();
  flatness_integral(u0, cfg.r, cfg.eta);

  PicardTrajectory tr;
  tr.grid = u0.grid;
  const auto& x = u0.grid.nodes;
  const auto& w = u0.grid.weights;
  const std::size_t N = x.size();
  tr.rate = rate_matrix(k, x);
  std::vector<double> RW(N * N);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) RW[i * N + j] = tr.rate[i * N + j] * w[j];

  // Bound constants.
  if (k.kind == RateKernel::Kind::Physical) {
    double cs = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      cs = std::max(cs, eval_B_diagonal_closed_form(k.pp, x[i]) * 2.0 * x[i] * std::exp(-x[i]));
      for (std::size_t j = i + 1; j < N; ++j) {
        const double r = tr.rate[i * N + j];
        if (r == 0.0) continue;
        const double pb = std::abs(r) * x[i] * x[j] / std::abs(std::exp(-x[i]) - std::exp(-x[j]));
        cs = std::max(cs, pb * (x[i] + x[j]) * std::exp(-0.5 * (x[i] + x[j])));
      }
    }
    tr.c_star = cs;
    tr.x_eta0 = exp_moment(u0, cfg.eta);
    const double th = k.tp.theta;
    tr.c0 = k.tp.rho_star * cs * tr.x_eta0 / std::sqrt(th * (1.0 + th));
  } else {
    tr.c_star = tr.c0 = NAN;
  }

  // Collocation data on [0,1].
  const int s = cfg.stages;
  const GaussRule gr = gauss_legendre(s);
  std::vector<double> c(s), b(s), A(s * s);
  for (int l = 0; l < s; ++l) {
    c[l] = 0.5 * (1.0 + gr.nodes[l]);
    b[l] = 0.5 * gr.weights[l];
  }
  auto lagrange = [&](int l, double t) {
    double v = 1.0;
    for (int q = 0; q < s; ++q)
      if (q != l) v *= (t - c[q]) / (c[l] - c[q]);
    return v;
  };
  for (int kk = 0; kk < s; ++kk)
    for (int l = 0; l < s; ++l) {
      double v = 0.0;
      for (int q = 0; q < s; ++q) v += b[q] * c[kk] * lagrange(l, c[kk] * c[q]);
      A[kk * s + l] = v;
    }

  std::vector<double> outs = cfg.output_times;
  outs.push_back(cfg.t_end);
  std::sort(outs.begin(), outs.end());
  outs.erase(std::remove_if(outs.begin(), outs.end(), [&](double t) { return !(t > 0) || t > cfg.t_end; }),
             outs.end());
  outs.erase(std::unique(outs.begin(), outs.end()), outs.end());

  std::vector<double> U = u0.density;
  tr.times.push_back(0.0);
  tr.densities.push_back(U);
  std::vector<double> omega(N);
  for (std::size_t i = 0; i < N; ++i) omega[i] = w[i] * (1.0 + std::pow(x[i], -1.5));

  double t = 0.0;
  double h_next = cfg.h_max;
  for (double target : outs) {
    while (t < target) {
      double L = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        double si = 0.0;
        for (std::size_t j = 0; j < N; ++j) si += std::abs(RW[i * N + j]) * U[j];
        L = std::max(L, si);
      }
      double h = std::min({cfg.h_max, h_next, target - t});
      if (L > 0) h = std::min(h, cfg.contraction / L);
      double normU = 0.0;
      for (std::size_t i = 0; i < N; ++i) normU += omega[i] * U[i];
      if (normU == 0.0) {
        t = (h == target - t) ? target : t + h;
        continue;
      }
      std::vector<std::vector<double>> V(s, U), F(s);
      bool converged = false;
      while (!converged) {
        double prev = INFINITY;
        for (auto& v : V) v = U;
        for (int it = 0; it < cfg.max_iter; ++it) {
          for (int l = 0; l < s; ++l) F[l] = picard_rates(RW, V[l]);
          double diff = 0.0;
          for (int kk = 0; kk < s; ++kk) {
            double dk = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
              double E = 0.0;
              for (int l = 0; l < s; ++l) E += A[kk * s + l] * F[l][i];
              const double nv = U[i] * std::exp(h * E);
              dk += omega[i] * std::abs(nv - V[kk][i]);
              V[kk][i] = nv;
            }
            diff = std::max(diff, dk);
          }
          if (diff <= cfg.iter_tol * normU) {
            converged = true;
            break;
          }
          if (it >= 4 && diff > prev) break;
          prev = diff;
        }
        if (!converged) {
          h *= 0.5;
          ++tr.halvings;
          if (h < 1e-14 * std::max(1.0, cfg.t_end))
            throw NonContraction("picard_solve: fixed-point iteration does not contract");
        }
      }
      for (int l = 0; l < s; ++l) F[l] = picard_rates(RW, V[l]);
      for (std::size_t i = 0; i < N; ++i) {
        double E = 0.0;
        for (int l = 0; l < s; ++l) E += b[l] * F[l][i];
        U[i] = U[i] * std::exp(h * E);
      }
      t = (h == target - t) ? target : t + h;
      h_next = std::min(cfg.h_max, 2.0 * h);
      ++tr.windows;
    }
    tr.times.push_back(t);
    tr.densities.push_back(U);
  }
  return tr;
}

double flatness_bound_ratio(const PicardTrajectory& tr) {
  double worst = 0.0;
  const auto& u0 = tr.densities.front();
  for (std::size_t k = 0; k < tr.times.size(); ++k)
    for (std::size_t i = 0; i < u0.size(); ++i) {
      if (!(u0[i] > 0)) continue;
      const double bound = u0[i] * std::exp(tr.times[k] * tr.c0 / std::pow(tr.grid.nodes[i], 1.5));
      worst = std::max(worst, tr.densities[k][i] / bound);
    }
  return worst;
}

}  // namespace compton
