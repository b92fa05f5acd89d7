#include "compton/full_solver.hpp"

#include <algorithm>
#include <cmath>

#include "compton/errors.hpp"

namespace compton {

double phi_n(int n, double x) {
  if (n < 1) throw DomainError("phi_n needs n >= 1");
  const double a = 1.0 / (n + 1.0), b = 1.0 / n;
  if (x < a || x > n + 1.0) return 0.0;
  if (x < b) return n * (x - a) / (b - a);
  if (x <= n) return 1.0 / x;
  return (n + 1.0 - x) / n;
}

double RegularizedKernel::eval(double x, double y) const {
  if (!(x > 0) || !(y > 0)) return 0.0;
  const double f = phi_n(n, x) * phi_n(n, y);
  if (f == 0.0) return 0.0;
  const double phi = eval_Phi(tp, x, y);
  if (phi == 0.0) return 0.0;
  return phi * eval_B(pp, x, y, tol).value * f;
}

std::size_t RegularizedKernel::band_entries() const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (hi[i] >= lo[i]) c += static_cast<std::size_t>(hi[i] - lo[i] + 1);
  return c;
}

namespace {

void band_row(RegularizedKernel& k, std::size_t i) {
  const auto& x = k.grid.nodes;
  k.lo[i] = 0;
  k.hi[i] = -1;
  if (phi_n(k.n, x[i]) == 0.0) return;
  int first = -1, last = -1;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (phi_n(k.n, x[j]) == 0.0 || eval_Phi(k.tp, x[i], x[j]) == 0.0) continue;
    if (first < 0) first = static_cast<int>(j);
    last = static_cast<int>(j);
  }
  if (first >= 0) {
    k.lo[i] = first;
    k.hi[i] = last;
  }
}

// Fills (i,j) and (j,i) for j >= i inside the band; returns the row's C_* candidate.
double fill_row(RegularizedKernel& k, std::size_t i) {
  const auto& x = k.grid.nodes;
  const std::size_t N = x.size();
  double best = 0.0;
  if (k.hi[i] < k.lo[i]) return best;
  const double fi = phi_n(k.n, x[i]);
  for (int jj = std::max<int>(k.lo[i], static_cast<int>(i)); jj <= k.hi[i]; ++jj) {
    const std::size_t j = static_cast<std::size_t>(jj);
    const double phi = eval_Phi(k.tp, x[i], x[j]);
    if (phi == 0.0) continue;
    const double pb = phi * eval_B(k.pp, x[i], x[j], k.tol).value;
    best = std::max(best, pb * (x[i] + x[j]) * std::exp(-0.5 * (x[i] + x[j])));
    const double v = pb * fi * phi_n(k.n, x[j]);
    k.table[i * N + j] = v;
    k.table[j * N + i] = v;
  }
  return best;
}

RegularizedKernel prepare(const PhysicalParams& pp, const TruncationParams& tp, int n,
                          const Grid& grid, double tol) {
  if (n < 1) throw DomainError("regularized kernel needs n >= 1");
  if (grid.empty()) throw DomainError("regularized kernel needs a grid");
  RegularizedKernel k;
  k.n = n;
  k.pp = pp;
  k.tp = tp;
  k.grid = grid;
  k.tol = tol;
  const std::size_t N = grid.nodes.size();
  k.lo.assign(N, 0);
  k.hi.assign(N, -1);
  k.table.assign(N * N, 0.0);
  return k;
}

}  // namespace

RegularizedKernel build_regularized_kernel(const PhysicalParams& pp, const TruncationParams& tp,
                                           int n, const Grid& grid, double tol) {
  RegularizedKernel k = prepare(pp, tp, n, grid, tol);
  const long N = static_cast<long>(grid.nodes.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < N; ++i) band_row(k, static_cast<std::size_t>(i));
  double best = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : best)
  for (long i = 0; i < N; ++i) best = std::max(best, fill_row(k, static_cast<std::size_t>(i)));
  k.c_star = best;
  return k;
}

RegularizedKernel build_regularized_kernel_serial(const PhysicalParams& pp,
                                                  const TruncationParams& tp, int n,
                                                  const Grid& grid, double tol) {
  RegularizedKernel k = prepare(pp, tp, n, grid, tol);
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) band_row(k, i);
  double best = 0.0;
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) best = std::max(best, fill_row(k, i));
  k.c_star = best;
  return k;
}

namespace {


std::vector<double> gain_factor(const RegularizedKernel& k, const std::vector<double>& g) {
  const auto& x = k.grid.nodes;
  std::vector<double> A(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) A[i] = (x[i] * x[i] + g[i]) * std::exp(-x[i]);
  return A;
}

inline double rate_row(const RegularizedKernel& k, const std::vector<double>& g,
                       const std::vector<double>& A, std::size_t i) {
  if (k.hi[i] < k.lo[i]) return 0.0;
  const std::size_t N = k.size();
  const double* b = &k.table[i * N];
  const auto& w = k.grid.weights;
  double s = 0.0;
  for (int j = k.lo[i]; j <= k.hi[i]; ++j) s += w[j] * b[j] * (g[j] * A[i] - g[i] * A[j]);
  return s;
}

void check_size(const RegularizedKernel& k, const std::vector<double>& g) {
  if (g.size() != k.size()) throw DomainError("density size does not match the kernel grid");
}

}  // namespace

std::vector<double> collision_rhs(const RegularizedKernel& kern, const std::vector<double>& g) {
  check_size(kern, g);
  const std::vector<double> A = gain_factor(kern, g);
  std::vector<double> rate(g.size());
  const long N = static_cast<long>(g.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < N; ++i) rate[i] = rate_row(kern, g, A, static_cast<std::size_t>(i));
  return rate;
}

std::vector<double> collision_rhs_serial(const RegularizedKernel& kern,
                                         const std::vector<double>& g) {
  check_size(kern, g);
  const std::vector<double> A = gain_factor(kern, g);
  std::vector<double> rate(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) rate[i] = rate_row(kern, g, A, i);
  return rate;
}

std::vector<double> collision_rhs_pairwise(const RegularizedKernel& kern,
                                           const std::vector<double>& g) {
  check_size(kern, g);
  const std::vector<double> A = gain_factor(kern, g);
  const auto& w = kern.grid.weights;
  std::vector<double> rate(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (int jj = std::max<int>(kern.lo[i], static_cast<int>(i) + 1); jj <= kern.hi[i]; ++jj) {
      const std::size_t j = static_cast<std::size_t>(jj);
      const double f = kern.at(i, j) * (g[j] * A[i] - g[i] * A[j]);
      rate[i] += w[j] * f;
      rate[j] -= w[i] * f;
    }
  }
  return rate;
}

void SolverConfig::validate() const {
  if (!(dt_min > 0 && dt_min <= dt_init && dt_init <= dt_max))
    throw ValidationError("solver: need 0 < dt_min <= dt_init <= dt_max");
  if (!(t_end > 0)) throw ValidationError("solver: t_end must be positive");
  if (!(record_interval > 0)) throw ValidationError("solver: record_interval must be positive");
}

StepResult step(const std::vector<double>& g, const RegularizedKernel& kern,
                const SolverConfig& cfg, double dt) {
  StepResult res;
  const std::size_t N = g.size();
  std::vector<double> tmp(N);
  while (true) {
    std::vector<double> next(N);
    if (cfg.scheme == Scheme::Euler) {
      const auto k1 = collision_rhs(kern, g);
      for (std::size_t i = 0; i < N; ++i) next[i] = g[i] + dt * k1[i];
    } else {
      const auto k1 = collision_rhs(kern, g);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = g[i] + 0.5 * dt * k1[i];
      const auto k2 = collision_rhs(kern, tmp);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = g[i] + 0.5 * dt * k2[i];
      const auto k3 = collision_rhs(kern, tmp);
      for (std::size_t i = 0; i < N; ++i) tmp[i] = g[i] + dt * k3[i];
      const auto k4 = collision_rhs(kern, tmp);
      for (std::size_t i = 0; i < N; ++i)
        next[i] = g[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    bool ok = true;
    for (double v : next)
      if (!(v >= 0)) {
        ok = false;
        break;
      }
    if (ok) {
      res.g = std::move(next);
      res.dt_used = dt;
      return res;
    }
    ++res.rejections;
    dt *= 0.5;
    if (dt < cfg.dt_min) throw StepCollapse("step: positivity lost down to dt_min");
  }
}

double j_function(double a, double b) {
  if (a == b) return 0.0;
  return (a - b) * (std::log(a) - std::log(b));
}

namespace {

// Density-density part, sum over ordered pairs; pairs with one zero argument are counted.
std::pair<double, long> d1_density(const RegularizedKernel& k, const std::vector<double>& g) {
  const auto& w = k.grid.weights;
  const std::vector<double> A = gain_factor(k, g);
  const long N = static_cast<long>(g.size());
  double total = 0.0;
  long singular = 0;
  for (long i = 0; i < N; ++i) {
    if (k.hi[i] < k.lo[i]) continue;
    double row = 0.0;
    for (int j = k.lo[i]; j <= k.hi[i]; ++j) {
      const double a = g[j] * A[i], b = g[i] * A[j];
      if (a == 0.0 && b == 0.0) continue;
      if (a == 0.0 || b == 0.0) {
        ++singular;
        continue;
      }
      row += w[j] * k.at(i, j) * j_function(a, b);
    }
    total += w[i] * row;
  }
  return {total, singular};
}

}  // namespace

DissipationParts entropy_dissipation(const HybridMeasure& u, const RegularizedKernel& kern) {
  DissipationParts d;
  if (!u.density.empty()) {
    if (!(u.grid == kern.grid)) throw DomainError("entropy_dissipation: density grid differs from kernel grid");
    auto [d1, s1] = d1_density(kern, u.density);
    d.d1 = d1;
    d.singular_pairs += s1;
  }
  const auto& x = kern.grid.nodes;
  const auto& w = kern.grid.weights;
  for (const Atom& at : u.atoms) {
    if (at.x <= 0.0) continue;
    for (std::size_t i = 0; i < u.density.size(); ++i) {
      const double b = kern.eval(x[i], at.x);
      if (b == 0.0) continue;
      const double a1 = (x[i] * x[i] + u.density[i]) * std::exp(-x[i]);
      const double a2 = u.density[i] * std::exp(-at.x);
      if (a2 == 0.0) {
        ++d.singular_pairs;
        continue;
      }
      d.d2 += w[i] * b * j_function(a1, a2) * at.mass;
    }
  }
  for (const Atom& p : u.atoms) {
    if (p.x <= 0.0) continue;
    for (const Atom& q : u.atoms) {
      if (q.x <= 0.0 || &p == &q) continue;
      const double b = kern.eval(p.x, q.x);
      if (b == 0.0) continue;
      d.d3 += b * j_function(std::exp(-p.x), std::exp(-q.x)) * p.mass * q.mass;
    }
  }
  d.total = 0.5 * d.d1 + d.d2 + 0.5 * d.d3;
  return d;
}

std::vector<OriginMassSample> origin_mass_estimate(const HybridMeasure& u,
                                                   const RegularizedKernel& kern,
                                                   const std::vector<double>& eps_list) {
  std::vector<OriginMassSample> out;
  const auto& x = kern.grid.nodes;
  const auto& w = kern.grid.weights;
  const std::vector<double>& g = u.density;
  if (!g.empty() && !(u.grid == kern.grid))
    throw DomainError("origin_mass_estimate: density grid differs from kernel grid");
  for (double eps : eps_list) {
    if (!(eps > 0)) throw DomainError("origin_mass_estimate: eps must be positive");
    auto cut = [eps](double s) {
      const double r = s / eps;
      return r >= 1.0 ? 0.0 : 0.5 * (1.0 + std::cos(M_PI * r));
    };
    OriginMassSample s;
    s.eps = eps;
    s.mass = u.origin_mass();
    for (const Atom& a : u.atoms)
      if (a.x > 0.0) s.mass += a.mass * cut(a.x);
    int below = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < eps) ++below;
    s.resolution_limited = below < 3;
    for (std::size_t i = 0; i < g.size(); ++i) s.mass += w[i] * cut(x[i]) * g[i];
    double flux = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (kern.hi[i] < kern.lo[i] || g[i] == 0.0) continue;
      for (int jj = std::max<int>(kern.lo[i], static_cast<int>(i) + 1); jj <= kern.hi[i]; ++jj) {
        const std::size_t j = static_cast<std::size_t>(jj);
        flux += w[i] * w[j] * kern.at(i, j) * (std::exp(-x[i]) - std::exp(-x[j])) *
                (cut(x[i]) - cut(x[j])) * g[i] * g[j];
      }
    }
    s.flux = flux;
    out.push_back(s);
  }
  return out;
}

double c_eta(double c_star, double theta, double eta) {
  return c_star / (2.0 * theta * theta) * (1.0 - theta) / (1.0 + theta) * eta / (0.5 - eta);
}

namespace {

double grid_mass(const Grid& grid, const std::vector<double>& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += grid.weights[i] * g[i];
  return s;
}

double best_alpha(const std::vector<OriginMassSample>& s, double fallback) {
  double a = fallback;
  double best_eps = INFINITY;
  for (const auto& o : s)
    if (!o.resolution_limited && o.eps < best_eps) {
      best_eps = o.eps;
      a = o.mass;
    }
  return a;
}

}  // namespace

TrajectoryRecord run_full(const HybridMeasure& u0, const RegularizedKernel& kern,
                          const SolverConfig& cfg) {
  cfg.validate();
  u0.check();
  if (!(u0.grid == kern.grid)) throw DomainError("run_full: initial density grid differs from kernel grid");
  for (const Atom& a : u0.atoms)
    if (a.x != 0.0) throw DomainError("run_full: only an origin atom can accompany the density");
  const double theta = kern.tp.theta;
  if (!(cfg.eta > 0.5 * (1.0 - theta) && cfg.eta < 0.5))
    throw ValidationError("run_full: eta must lie in ((1-theta)/2, 1/2)");

  TrajectoryRecord tr;
  tr.c_star = kern.c_star;
  tr.c_eta = c_eta(kern.c_star, theta, cfg.eta);

  HybridMeasure u = u0;
  std::vector<double>& g = u.density;
  const double M_start = grid_mass(kern.grid, g);
  const double X0 = exp_moment(u0, cfg.eta);

  double cum = 0.0;
  double D_prev = cfg.track_entropy ? d1_density(kern, g).first * 0.5 : 0.0;
  tr.min_step_dissipation = D_prev;

  auto record = [&](double t) {
    tr.times.push_back(t);
    MomentReport rep = make_report(u, cfg.alphas, cfg.eta, &kern.tp);
    const double bound = std::exp(tr.c_eta * t) * X0;
    if (rep.X_eta > (1.0 + 1e-6) * bound) ++tr.x_eta_violations;
    tr.x_eta_bound.push_back(bound);
    tr.reports.push_back(std::move(rep));
    tr.dissipation.push_back(cfg.track_entropy ? entropy_dissipation(u, kern) : DissipationParts{});
    auto om = origin_mass_estimate(u, kern, cfg.eps_list);
    tr.alpha_estimate.push_back(best_alpha(om, u.origin_mass()));
    tr.origin_series.push_back(std::move(om));
    tr.cumulative_dissipation.push_back(cum);
    if (cfg.keep_snapshots) tr.snapshots.push_back(u);
  };

  record(0.0);
  double t = 0.0;
  double dt = cfg.dt_init;
  int streak = 0;
  long rec_index = 1;
  const double t_eps = 1e-12 * cfg.t_end;
  while (t < cfg.t_end - t_eps) {
    const double target = std::min(cfg.t_end, rec_index * cfg.record_interval);
    // Absorb a roundoff-sized remainder into this step instead of a separate one.
    const double h = (target - t) <= dt * (1.0 + 1e-9) ? target - t : dt;
    StepResult r = step(g, kern, cfg, h);
    const bool hit = r.dt_used == h && h == target - t;
    g = std::move(r.g);
    t = hit ? target : t + r.dt_used;
    ++tr.steps;
    tr.rejections += r.rejections;
    if (r.rejections > 0) {
      dt = r.dt_used;
      streak = 0;
    } else if (++streak >= 20 && dt < cfg.dt_max) {
      dt = std::min(2.0 * dt, cfg.dt_max);
      streak = 0;
    }
    if (M_start > 0) {
      const double drift = std::abs(grid_mass(kern.grid, g) - M_start) / M_start;
      tr.max_mass_drift = std::max(tr.max_mass_drift, drift);
    }
    if (cfg.track_entropy) {
      const double D_now = 0.5 * d1_density(kern, g).first;
      cum += 0.5 * (D_prev + D_now) * r.dt_used;
      D_prev = D_now;
      if (D_now < 0) ++tr.negative_dissipation_steps;
      tr.min_step_dissipation = std::min(tr.min_step_dissipation, D_now);
    }
    if (hit || t >= cfg.t_end - t_eps) {
      record(t);
      ++rec_index;
      while (rec_index * cfg.record_interval <= t + t_eps) ++rec_index;
    }
  }
  return tr;
}

TrajectoryRecord run_full(const HybridMeasure& u0, const PhysicalParams& pp,
                          const TruncationParams& tp, int n, const SolverConfig& cfg) {
  const RegularizedKernel k = build_regularized_kernel(pp, tp, n, u0.grid);
  return run_full(u0, k, cfg);
}

EntropyBalance entropy_balance_check(const TrajectoryRecord& traj) {
  EntropyBalance b;
  if (traj.reports.empty()) return b;
  b.H_start = traj.reports.front().H;
  b.H_end = traj.reports.back().H;
  b.integral_D = traj.cumulative_dissipation.back() - traj.cumulative_dissipation.front();
  b.residual = b.H_end - b.H_start - b.integral_D;
  b.literal_residual = b.H_start - b.H_end - b.integral_D;
  b.relative = b.H_start != 0.0 ? std::abs(b.residual) / std::abs(b.H_start) : std::abs(b.residual);
  for (std::size_t k = 1; k < traj.reports.size(); ++k) {
    const double prev = traj.reports[k - 1].H;
    if (traj.reports[k].H < prev - 1e-12 * std::max(1.0, std::abs(prev))) b.H_nondecreasing = false;
  }
  b.D_nonnegative = traj.negative_dissipation_steps == 0;
  for (const auto& d : traj.dissipation)
    if (d.total < 0) b.D_nonnegative = false;
  return b;
}

std::vector<double> planck_density(const Grid& grid, double mu) {
  if (mu > 0) throw DomainError("planck_density needs mu <= 0");
  std::vector<double> g(grid.nodes.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = grid.nodes[i];
    g[i] = x * x / std::expm1(x - mu);
  }
  return g;
}

}  // namespace compton
