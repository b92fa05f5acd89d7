#pragma once

#include <string>
#include <vector>

#include "compton/measure.hpp"

namespace compton {

/// R(x,y) = Phi B/(xy) (e^{-x} - e^{-y}) or a user table on fixed locations.
struct RateKernel {
  enum class Kind { Physical, Synthetic };
  Kind kind = Kind::Physical;
  PhysicalParams pp;
  TruncationParams tp;
  double tol = 1e-10;
  bool use_phi = true;  // false drops the cutoff (experimental)
  std::vector<double> locations;
  std::vector<double> table;  // synthetic: N x N, antisymmetric

  static RateKernel physical(const PhysicalParams& pp, const TruncationParams& tp,
                             double tol = 1e-10, bool use_phi = true);
  /// Validates exact antisymmetry of the table.
  static RateKernel synthetic(std::vector<double> locations, std::vector<double> table);

  double eval(double x, double y) const;
};

/// N x N rate matrix on the given points; R_ji = -R_ij exactly.
std::vector<double> rate_matrix(const RateKernel& k, const std::vector<double>& x);
std::vector<double> rate_matrix_serial(const RateKernel& k, const std::vector<double>& x);

struct AtomSystemState {
  std::vector<double> locations;
  std::vector<double> masses;
  std::vector<double> rate;  // N x N

  static AtomSystemState make(std::vector<double> locations, std::vector<double> masses,
                              const RateKernel& k);
  std::size_t size() const { return locations.size(); }
};

/// dm_i/dt = m_i sum_j R_ij m_j, assembled pairwise.
std::vector<double> atom_ode_rhs(const AtomSystemState& s);
std::vector<double> atom_ode_rhs(const std::vector<double>& R, const std::vector<double>& m);

/// Point masses on fixed locations over time (atoms, or grid nodes with w_i u_i).
struct PointTrajectory {
  std::vector<double> locations;
  std::vector<double> rate;  // N x N
  std::vector<double> times;
  std::vector<std::vector<double>> masses;

  HybridMeasure measure_at(std::size_t k) const;
};

struct LimitAtom {
  double x = 0.0;
  double mass = 0.0;
  std::size_t component = 0;
};

struct LimitOptions {
  double window = 1.0;             // stationarity window Delta
  double limit_tol = 1e-8;         // bl_distance(u(t_end - Delta), u(t_end)) bound
  double vanish_rate = 1e-8;       // atoms with log-rate below -vanish_rate are vanishing
  double vanish_mass = 1e-12;      // ... as are atoms below vanish_mass * M0
  double mass_sum_tol = 1e-8;      // per-component mass sums, relative to M0
};

struct LimitClassification {
  std::vector<LimitAtom> atoms;
  std::vector<double> component_mass;        // initial M_n
  std::vector<double> component_limit_mass;  // sum of surviving atoms per component
  std::vector<double> component_min_point;   // k_n
  double stationarity = 0.0;
  double max_component_drift = 0.0;  // over every recorded time, relative to M0
  double vanished_mass = 0.0;
  bool in_initial_support = false;
  bool pairwise_disjoint = false;
  bool mass_sums = false;
  bool leftmost_survives = false;
  bool queue_monotone = false;
  bool ok() const {
    return in_initial_support && pairwise_disjoint && mass_sums && leftmost_survives;
  }
};

/// Connected components of the coupling graph (R_ij != 0) over the initial support.
std::vector<std::vector<std::size_t>> coupling_components(const std::vector<double>& R,
                                                          const std::vector<double>& masses);

/// Throws NotConverged when the stationarity rule fails at the last record.
LimitClassification classify_limit(const PointTrajectory& traj, const LimitOptions& opt = {});

struct AtomRun {
  PointTrajectory traj;
  LimitClassification limit;
  bool converged = false;
  std::string note;
};

/// Dormand-Prince with relative error control; outputs at n_out uniform times plus
/// t_end - window. The limit is classified when the stationarity rule holds.
AtomRun run_atoms(const AtomSystemState& s, double t_end, double rtol, int n_out = 100,
                  const LimitOptions& opt = {});
/// Doubles the horizon (starting at t_start) until the limit is reached or t_max passes.
AtomRun run_atoms_to_limit(const AtomSystemState& s, double rtol, double t_start = 100.0,
                           double t_max = 1e7, const LimitOptions& opt = {});
/// Integrates and reports exactly at the given increasing times (t >= 0).
PointTrajectory integrate_atoms(const AtomSystemState& s, const std::vector<double>& times,
                                double rtol);

double dissipation_alpha(const std::vector<double>& x, const std::vector<double>& m,
                         const std::vector<double>& R, double alpha);
double dissipation_alpha(const HybridMeasure& u, const RateKernel& k, double alpha);

struct LyapunovRow {
  double alpha = 0.0;
  bool nonincreasing = true;
  double max_increase = 0.0;
  double max_rel_err = 0.0;  // central FD of M_alpha vs D_alpha/2
  int points = 0;
  bool dissipation_nonpositive = true;
};

struct LyapunovReport {
  std::vector<LyapunovRow> rows;
  bool ok(double rel_tol) const;
};

/// FD derivatives use consecutive equally spaced records.
LyapunovReport lyapunov_check(const PointTrajectory& traj, const std::vector<double>& alphas);

struct PicardConfig {
  double t_end = 1.0;
  double iter_tol = 1e-13;
  int max_iter = 60;
  int stages = 8;
  double contraction = 0.25;  // window length * rate bound
  double h_max = 0.5;
  double r = 1.0;             // flatness exponent e^{r/x^{3/2}}
  double eta = 0.4;
  std::vector<double> output_times;  // empty: t_end only
};

struct PicardTrajectory {
  Grid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> densities;
  std::vector<double> rate;  // N x N on grid nodes
  double c_star = 0.0;
  double c0 = 0.0;
  double x_eta0 = 0.0;
  long windows = 0;
  long halvings = 0;

  PointTrajectory to_points() const;
};

/// F_i = sum_j R_ij w_j u_j (log-rate of u_i); OpenMP rows and serial reference.
std::vector<double> picard_rates(const std::vector<double>& RW, const std::vector<double>& u);
std::vector<double> picard_rates_serial(const std::vector<double>& RW,
                                        const std::vector<double>& u);

/// Fixed point of u(t) = u0 exp(int_0^t int R u) by windowed Gauss collocation in time.
PicardTrajectory picard_solve(const HybridMeasure& u0, const RateKernel& k,
                              const PicardConfig& cfg);

/// Flatness integral sum w u0 (e^{r x^{-3/2}} + e^{eta x}); FlatnessViolation if not finite.
double flatness_integral(const HybridMeasure& u0, double r, double eta);

/// Largest u(t,x) / (u0(x) e^{t C0 / x^{3/2}}) over records and nodes with u0 > 0.
double flatness_bound_ratio(const PicardTrajectory& tr);

}  // namespace compton
