#include "compton/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "compton/full_solver.hpp"
#include "compton/harness.hpp"
#include "compton/reduced_solver.hpp"

namespace compton {

namespace {

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

Outcome kernel_oracle() {
  const PhysicalParams p{1.0, 1.0};
  double worst = 0.0;
  for (double x : {0.1, 1.0, 10.0}) {
    const double q = eval_B(p, x, x).value;
    const double c = eval_B_diagonal_closed_form(p, x);
    worst = std::max(worst, std::abs(q - c) / std::abs(c));
  }
  return {worst <= 1e-8, "max rel err " + g(worst)};
}

Outcome diagonal_asymptotics() {
  const PhysicalParams p{1.0, 1.0};
  const double x = 100.0;
  const double lhs = eval_B(p, x, x).value * x * x * std::exp(-x) / std::sqrt(p.beta);
  const double target = 2.0 * std::sqrt(2.0 * M_PI * p.m * p.beta);
  const double large_err = std::abs(lhs / target - 1.0);

  auto remainder = [&](double s) {
    return eval_B(p, s, s).value / std::sqrt(p.beta) - (44.0 / 15.0) * (1.0 / s + 1.0);
  };
  std::vector<double> xs;
  for (double s = 1e-2; s >= 1e-3 * (1 - 1e-12); s /= 2) xs.push_back(s);
  xs.push_back(1e-3);
  double omin = 1e9, omax = -1e9;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    const double o = std::log(remainder(xs[k]) / remainder(xs[k + 1])) / std::log(xs[k] / xs[k + 1]);
    omin = std::min(omin, o);
    omax = std::max(omax, o);
  }
  const bool ok = large_err <= 0.01 && omin >= 0.9 && omax <= 1.1;
  return {ok, "x=100 rel dev " + g(large_err) + "; small-x remainder order in [" + g(omin) + ", " + g(omax) +
                  "], r(1e-2)=" + g(remainder(1e-2)) + ", r(1e-3)=" + g(remainder(1e-3))};
}

Outcome majorant_suite() {
  const PhysicalParams p{1.0, 1.0};
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> U(0.0, 10.0);
  std::vector<std::pair<double, double>> pts;
  int over = 0;
  while (pts.size() < 100) {
    const double x = 10.0 - U(rng), y = 10.0 - U(rng);  // (0, 10]
    if (x <= 0 || y <= 0 || x == y) continue;
    pts.emplace_back(x, y);
    if (eval_B(p, x, y).value > eval_majorant(p, x, y)) ++over;
  }
  const MonotonicityReport mr = verify_antidiagonal_monotonicity(p, pts);
  return {over == 0 && mr.ok(), "majorant violations " + std::to_string(over) + ", sign violations " +
                                    std::to_string(mr.violations.size()) + " of " + std::to_string(mr.samples)};
}

Outcome truncation_continuity() {
  const std::pair<double, double> cases[] = {{0.3, 1.0}, {0.5, 1.0}, {0.5, 0.1}, {0.8, 5.0}};
  double e1 = 0.0, e2 = 0.0;
  for (auto [theta, ds] : cases) {
    const double rho = solve_rho(theta, ds);
    e1 = std::max(e1, std::abs(gamma1_curve(theta, rho, ds, ds) - theta * ds) / ds);
    e2 = std::max(e2, std::abs(gamma2_curve(theta, rho, ds, theta * ds) - ds));
  }
  return {e1 <= 1e-12 && e2 <= 1e-10, "gamma1 rel mismatch " + g(e1) + ", gamma2 mismatch " + g(e2)};
}

ExperimentConfig planck_bump(double t_end, double record) {
  std::ostringstream os;
  os << R"({"mode":"full","initial":{"kind":"planck_mu","mu":-1,"bump":{"amplitude":0.5,"center":3,"width":1}},)"
     << R"("solver":{"t_end":)" << t_end << R"(,"dt_init":1e-3,"record_interval":)" << record
     << R"(},"diagnostics":{"snapshots":false}})";
  return parse_config(os.str());
}

Outcome full_conservation() {
  const ExperimentConfig c = planck_bump(10.0, 0.1);
  const HybridMeasure u0 = make_initial(c);
  const RegularizedKernel k = build_regularized_kernel(c.physical, c.truncation, c.n, u0.grid, c.kernel_tol);
  SolverConfig sc = c.solver;
  sc.track_entropy = false;
  const TrajectoryRecord tr = run_full(u0, k, sc);
  const bool ok = tr.steps == 10000 && tr.max_mass_drift <= 1e-10 && tr.x_eta_violations == 0;
  return {ok, std::to_string(tr.steps) + " RK4 steps at N=" + std::to_string(u0.grid.n) + ", mass drift " +
                  g(tr.max_mass_drift) + ", X_eta bound violations " + std::to_string(tr.x_eta_violations) +
                  " (C_eta " + g(tr.c_eta) + ")"};
}

Outcome entropy_structure() {
  const ExperimentConfig c = planck_bump(1.0, 0.01);
  const HybridMeasure u0 = make_initial(c);
  const TrajectoryRecord tr = run_full(u0, c.physical, c.truncation, c.n, c.solver);
  const EntropyBalance b = entropy_balance_check(tr);
  const bool ok = b.D_nonnegative && b.relative <= 1e-4 && b.H_nondecreasing;
  return {ok, "min D " + g(tr.min_step_dissipation) + ", H " + g(b.H_start) + " -> " + g(b.H_end) + ", int D " +
                  g(b.integral_D) + ", balance residual " + g(b.relative) +
                  " relative (literal-sign residual " + g(b.literal_residual) + "), H monotone " +
                  (b.H_nondecreasing ? "increasing" : "violated")};
}

// Weighted L1 norm of the net rate relative to the gross gain+loss flux.
double relative_residual(const RegularizedKernel& k, const std::vector<double>& gv) {
  const auto rate = collision_rhs(k, gv);
  const auto& x = k.grid.nodes;
  const auto& w = k.grid.weights;
  const std::size_t N = x.size();
  std::vector<double> A(N);
  for (std::size_t i = 0; i < N; ++i) A[i] = (x[i] * x[i] + gv[i]) * std::exp(-x[i]);
  double net = 0.0, gross = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    net += w[i] * std::abs(rate[i]);
    for (int j = k.lo[i]; j <= k.hi[i]; ++j)
      gross += w[i] * w[j] * k.at(i, j) * (gv[j] * A[i] + gv[i] * A[j]);
  }
  return gross > 0 ? net / gross : net;
}

Outcome equilibrium_residual() {
  const PhysicalParams p{1.0, 1.0};
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  double worst_rel = 0.0, min_order = 1e9;
  std::string rows;
  for (double mu : {0.0, -0.5, -2.0}) {
    double r[2];
    for (int q = 0; q < 2; ++q) {
      const Grid gr = Grid::log_spaced(0.04, 40.0, 128 << q);
      const RegularizedKernel k = build_regularized_kernel(p, tp, 20, gr);
      r[q] = relative_residual(k, planck_density(gr, mu));
      worst_rel = std::max(worst_rel, r[q]);
    }
    const double order = (r[0] > 0 && r[1] > 0) ? std::log2(r[0] / r[1]) : 0.0;
    min_order = std::min(min_order, order);
    rows += " mu=" + g(mu) + ": " + g(r[0]) + " -> " + g(r[1]) + " (order " + g(order) + ");";
  }
  // A residual already at the rounding floor has no measurable order.
  const bool floor = worst_rel <= 1e-12;
  return {min_order >= 0.9 || floor, "N=128->256 relative residual" + rows +
                                         (floor ? " at rounding floor" : "")};
}

AtomSystemState three_atoms() {
  const std::vector<double> x{1.0, 2.0, 3.0};
  const RateKernel k = RateKernel::synthetic(x, {0, 1, 0, -1, 0, 1, 0, -1, 0});
  return AtomSystemState::make(x, {0.6, 0.2, 0.2}, k);
}

Outcome three_atom_check() {
  const AtomRun run = run_atoms(three_atoms(), 200.0, 1e-12, 200);
  const auto& mT = run.traj.masses.back();
  double drift = 0.0;
  for (const auto& ms : run.traj.masses) drift = std::max(drift, std::abs(ms[0] + ms[1] + ms[2] - 1.0));
  bool atoms_ac = run.converged && run.limit.atoms.size() == 2 && run.limit.atoms[0].x == 1.0 &&
                  run.limit.atoms[1].x == 3.0;
  const double zb = 0.2 * std::exp(-1.0);
  const bool ok = mT[1] <= 1e-16 && mT[2] >= zb - 1e-9 && atoms_ac && drift <= 1e-12;
  return {ok, "y(200) " + g(mT[1]) + ", z " + g(mT[2]) + " (bound " + g(zb) + "), limit atoms " +
                  (atoms_ac ? "{a,c}" : "wrong") + ", mass drift " + g(drift)};
}

Outcome lyapunov_suite() {
  std::vector<double> ts;
  for (int k = 0; k <= 2000; ++k) ts.push_back(1e-3 * k);
  const LyapunovReport la = lyapunov_check(integrate_atoms(three_atoms(), ts, 1e-10), {1, 2, 3});

  const PhysicalParams p{1.0, 1.0};
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  const Grid gr = Grid::log_spaced(0.5, 30.0, 200);
  const HybridMeasure u0 = HybridMeasure::from_density(gr, planck_density(gr, 0.0));
  PicardConfig pc;
  pc.t_end = 0.2;
  for (int k = 1; k < 200; ++k) pc.output_times.push_back(1e-3 * k);
  const LyapunovReport lp = lyapunov_check(picard_solve(u0, RateKernel::physical(p, tp), pc).to_points(), {1, 2, 3});

  double ea = 0.0, ep = 0.0;
  for (const auto& r : la.rows) ea = std::max(ea, r.max_rel_err);
  for (const auto& r : lp.rows) ep = std::max(ep, r.max_rel_err);
  return {la.ok(1e-4) && lp.ok(1e-4), "atoms: monotone " + std::string(la.ok(1.0) ? "yes" : "no") +
                                          ", dM/dt vs D/2 rel err " + g(ea) + "; Picard: monotone " +
                                          (lp.ok(1.0) ? "yes" : "no") + ", rel err " + g(ep)};
}

Outcome picard_flatness() {
  const PhysicalParams p{1.0, 1.0};
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  const Grid gr = Grid::log_spaced(0.5, 30.0, 200);
  const HybridMeasure u0 = HybridMeasure::from_density(gr, planck_density(gr, 0.0));
  PicardConfig pc;
  pc.t_end = 1.0;
  for (int k = 1; k < 20; ++k) pc.output_times.push_back(0.05 * k);
  const PicardTrajectory tr = picard_solve(u0, RateKernel::physical(p, tp), pc);
  const double ratio = flatness_bound_ratio(tr);
  double M0 = 0.0;
  for (std::size_t i = 0; i < gr.nodes.size(); ++i) M0 += gr.weights[i] * tr.densities.front()[i];
  double drift = 0.0;
  for (const auto& d : tr.densities) {
    double M = 0.0;
    for (std::size_t i = 0; i < gr.nodes.size(); ++i) M += gr.weights[i] * d[i];
    drift = std::max(drift, std::abs(M - M0) / M0);
  }
  return {ratio <= 1.0 + 1e-9 && drift <= 1e-10,
          "max u/bound " + g(ratio) + " (C0 " + g(tr.c0) + "), L1 drift " + g(drift)};
}

Outcome random_atoms() {
  const PhysicalParams p{1.0, 1.0};
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  const RateKernel k = RateKernel::physical(p, tp);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  bool ok = true;
  std::string rows;
  for (int s = 0; s < 5; ++s) {
    std::vector<double> x(4), m(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = 0.5 + 3.5 * U(rng);
      m[i] = 0.1 + U(rng);
    }
    const auto t0 = std::chrono::steady_clock::now();
    const AtomRun run = run_atoms_to_limit(AtomSystemState::make(x, m, k), 1e-10);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool good = run.converged && run.limit.ok() && sec < 10.0;
    ok = ok && good;
    rows += " #" + std::to_string(s) + (good ? " ok" : " FAIL") + " (" + std::to_string(run.limit.atoms.size()) +
            " atoms, T=" + g(run.traj.times.back()) + ", " + g(sec) + "s)";
    if (!run.converged) rows += " " + run.note;
  }
  return {ok, "5 seeded systems:" + rows};
}

Outcome dirac_trend() {
  const PhysicalParams p{1.0, 1.0};
  const auto rows = diagonal_concentration_check(p, bump_test_function(), {1e2, 1e3, 1e4});
  bool mono = true;
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (!(std::abs(rows[k].ratio - 1) < std::abs(rows[k - 1].ratio - 1))) mono = false;
  const double last = std::abs(rows.back().ratio - 1.0);
  std::string d = "ratios";
  for (const auto& r : rows) d += " " + g(r.ratio);
  return {mono && last <= 0.05, d};
}

struct Criterion {
  const char* name;
  double limit;
  Outcome (*fn)();
};

const Criterion kCriteria[kCriterionCount] = {
    {"kernel oracle agreement", 1.0, kernel_oracle},
    {"diagonal asymptotics", 0.0, diagonal_asymptotics},
    {"majorant and monotonicity", 10.0, majorant_suite},
    {"truncation continuity", 0.0, truncation_continuity},
    {"full solver conservation", 120.0, full_conservation},
    {"entropy structure", 0.0, entropy_structure},
    {"equilibrium residual", 0.0, equilibrium_residual},
    {"three-atom reduced system", 1.0, three_atom_check},
    {"Lyapunov suite", 0.0, lyapunov_suite},
    {"Picard flatness bound", 0.0, picard_flatness},
    {"long-time classification", 50.0, random_atoms},
    {"Dirac concentration trend", 60.0, dirac_trend},
};

}  // namespace

CriterionResult run_criterion(int id) {
  CriterionResult r;
  r.id = id;
  if (id < 1 || id > kCriterionCount) {
    r.name = "unknown";
    r.detail = "no such criterion";
    return r;
  }
  const Criterion& s = kCriteria[id - 1];
  r.name = s.name;
  r.limit_seconds = s.limit;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Outcome o = s.fn();
    r.passed = o.passed;
    r.detail = o.detail;
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.limit_seconds > 0 && r.seconds >= r.limit_seconds) {
    r.passed = false;
    r.detail += "; runtime " + g(r.seconds) + "s over limit " + g(r.limit_seconds) + "s";
  }
  return r;
}

std::vector<CriterionResult> run_acceptance() {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriterionCount; ++id) out.push_back(run_criterion(id));
  return out;
}

std::string format_result_line(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-28s %8.3fs  ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.seconds);
  return head + r.detail;
}

}  // namespace compton
