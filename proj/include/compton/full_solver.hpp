#pragma once

#include <string>
#include <vector>

#include "compton/measure.hpp"

namespace compton {

/// Cutoff phi_n: 1/x on [1/n, n], linear to 0 at 1/(n+1) and n+1.
double phi_n(int n, double x);

/// b_n(x_i,x_j) = Phi B phi_n(x_i) phi_n(x_j) tabulated on a grid.
/// Row i is nonzero only on the band [lo[i], hi[i]] (empty when lo > hi).
struct RegularizedKernel {
  int n = 1;
  PhysicalParams pp;
  TruncationParams tp;
  Grid grid;
  double tol = 1e-10;
  std::vector<int> lo, hi;
  std::vector<double> table;  // dense N x N, row-major
  double c_star = 0.0;        // max of Phi B (x+y) e^{-(x+y)/2} over the band

  std::size_t size() const { return grid.nodes.size(); }
  double at(std::size_t i, std::size_t j) const { return table[i * size() + j]; }
  /// b_n at arbitrary points (used for atoms).
  double eval(double x, double y) const;
  std::size_t band_entries() const;
};

RegularizedKernel build_regularized_kernel(const PhysicalParams& pp, const TruncationParams& tp,
                                           int n, const Grid& grid, double tol = 1e-10);
RegularizedKernel build_regularized_kernel_serial(const PhysicalParams& pp,
                                                  const TruncationParams& tp, int n,
                                                  const Grid& grid, double tol = 1e-10);

/// rate_i = sum_j w_j b_ij [g_j (x_i^2+g_i) e^{-x_i} - g_i (x_j^2+g_j) e^{-x_j}].
/// Rows are independent with a fixed summation order, so the OpenMP and serial
/// versions agree bitwise.
std::vector<double> collision_rhs(const RegularizedKernel& kern, const std::vector<double>& g);
std::vector<double> collision_rhs_serial(const RegularizedKernel& kern,
                                         const std::vector<double>& g);
/// Pairwise scatter assembly (i<j flux added to i, subtracted from j); reference only.
std::vector<double> collision_rhs_pairwise(const RegularizedKernel& kern,
                                           const std::vector<double>& g);

enum class Scheme { RK4, Euler };

struct SolverConfig {
  double dt_init = 1e-3;
  double dt_min = 1e-9;
  double dt_max = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::RK4;
  double mass_tolerance = 1e-10;
  double record_interval = 0.1;
  double eta = 0.4;
  std::vector<double> alphas{1.0, 2.0, 3.0};
  std::vector<double> eps_list{0.4, 0.2, 0.1};
  bool track_entropy = true;
  bool keep_snapshots = false;

  void validate() const;
};

struct StepResult {
  std::vector<double> g;
  double dt_used = 0.0;
  int rejections = 0;
};

/// One step of size dt (halved until the result is nonnegative).
StepResult step(const std::vector<double>& g, const RegularizedKernel& kern,
                const SolverConfig& cfg, double dt);

struct DissipationParts {
  double d1 = 0.0, d2 = 0.0, d3 = 0.0, total = 0.0;
  long singular_pairs = 0;  // pairs with exactly one zero argument of j, left out of the sums
};

double j_function(double a, double b);

DissipationParts entropy_dissipation(const HybridMeasure& u, const RegularizedKernel& kern);

struct OriginMassSample {
  double eps = 0.0;
  double mass = 0.0;  // alpha + int phi_eps g
  double flux = 0.0;  // quadratic exchange term, >= 0
  bool resolution_limited = false;
};

/// Cutoff phi(s) = (1 + cos(pi s))/2 on [0,1], rescaled to [0,eps].
std::vector<OriginMassSample> origin_mass_estimate(const HybridMeasure& u,
                                                   const RegularizedKernel& kern,
                                                   const std::vector<double>& eps_list);

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<MomentReport> reports;
  std::vector<DissipationParts> dissipation;
  std::vector<std::vector<OriginMassSample>> origin_series;
  std::vector<double> alpha_estimate;
  std::vector<double> cumulative_dissipation;  // trapezoid over every step
  std::vector<double> x_eta_bound;             // e^{C_eta t} X_eta(u0)
  std::vector<HybridMeasure> snapshots;

  double c_star = 0.0;
  double c_eta = 0.0;
  long steps = 0;
  long rejections = 0;
  double max_mass_drift = 0.0;  // relative, over every step
  double min_step_dissipation = 0.0;
  long negative_dissipation_steps = 0;
  long x_eta_violations = 0;
};

double c_eta(double c_star, double theta, double eta);

TrajectoryRecord run_full(const HybridMeasure& u0, const RegularizedKernel& kern,
                          const SolverConfig& cfg);
TrajectoryRecord run_full(const HybridMeasure& u0, const PhysicalParams& pp,
                          const TruncationParams& tp, int n, const SolverConfig& cfg);

struct EntropyBalance {
  double H_start = 0.0, H_end = 0.0, integral_D = 0.0;
  double residual = 0.0;          // H_end - H_start - int D
  double literal_residual = 0.0;  // H_start - H_end - int D
  double relative = 0.0;          // |residual| / |H_start|
  bool H_nondecreasing = true;
  bool D_nonnegative = true;
};

EntropyBalance entropy_balance_check(const TrajectoryRecord& traj);

/// g_mu(x) = x^2/(e^{x-mu} - 1) sampled on the grid.
std::vector<double> planck_density(const Grid& grid, double mu);

}  // namespace compton
