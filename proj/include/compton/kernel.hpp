#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace compton {

struct PhysicalParams {
  double beta = 1.0;
  double m = 1.0;

  void validate() const;
};

struct KernelSample {
  double x = 0.0;
  double y = 0.0;
  double value = 0.0;
  double abs_error_estimate = 0.0;
};

/// Redistribution kernel B_beta(x,y) by adaptive quadrature of the angular integral.
KernelSample eval_B(const PhysicalParams& p, double x, double y, double tol = 1e-10);

/// B_beta(x,x) in closed form (error-function expression), with an exact
/// power series for small x where the closed form cancels.
double eval_B_diagonal_closed_form(const PhysicalParams& p, double x);

/// Upper bound for B_beta (Gaussian factor times N(x+y, |x-y|)).
double eval_majorant(const PhysicalParams& p, double x, double y);

/// Cruder bound sqrt(beta) e^{(x+y)/2} 4(10 max^2 + min^2)/(15 max^3).
double eval_crude_bound(const PhysicalParams& p, double x, double y);

struct MonotonicityViolation {
  double x, y;
  double derivative;
  std::string what;
};

struct MonotonicityReport {
  int samples = 0;
  std::vector<MonotonicityViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks sign of grad B . (1,-1) by central differences (positive when y > x)
/// and the midpoint bound B(x,y) <= B(mid,mid). rel_step scales the FD step
/// h = rel_step*min(x,y); StepTooLarge if h > min(x,y)/10.
MonotonicityReport verify_antidiagonal_monotonicity(
    const PhysicalParams& p, const std::vector<std::pair<double, double>>& samples,
    double tol = 1e-10, double rel_step = 1e-4);

struct ScaledPoint {
  double tau, x, u;
};
/// Forward scaling tau = beta^3 t, x = beta k, u = x^2 f.
ScaledPoint scale_to_dimensionless(const PhysicalParams& p, double t, double k, double f);
struct PhysicalPoint {
  double t, k, f;
};
PhysicalPoint scale_to_physical(const PhysicalParams& p, double tau, double x, double u);

/// Test function for the diagonal concentration check: f is supported in [lo,hi]^2.
struct TestFunction2D {
  std::function<double(double, double)> f;
  double lo = 1.0;
  double hi = 2.0;
};

/// Smooth bump psi(x)psi(y), psi(s) = exp(-1/(1-(2s-3)^2)) on (1,2).
TestFunction2D bump_test_function();

struct ConcentrationRow {
  double beta;
  double integral;
  double limit;
  double ratio;
};

/// Integrates phi * 1{|x-y| <= (x+y) sqrt(2/(beta m))} * majorant over (x,y) and
/// compares with (88/15) sqrt(pi/(2m)) erf(1) int phi(z/2,z/2) e^{z/2} dz.
std::vector<ConcentrationRow> diagonal_concentration_check(const PhysicalParams& p,
                                                           const TestFunction2D& phi,
                                                           const std::vector<double>& betas);

/// Full N x N kernel table on the given nodes (row-major). The OpenMP version
/// and the serial reference are bitwise identical.
std::vector<KernelSample> kernel_table(const PhysicalParams& p, const std::vector<double>& nodes,
                                       double tol);
std::vector<KernelSample> kernel_table_serial(const PhysicalParams& p,
                                              const std::vector<double>& nodes, double tol);

}  // namespace compton
