#pragma once

#include "compton/kernel.hpp"

namespace compton {

/// Cone / curvature geometry of the truncation region. Build with make().
struct TruncationParams {
  double theta = 0.5;
  double delta_star = 1.0;
  double theta1 = 0.7;
  double rho_star = 0.0;
  double rho1 = 0.0;

  static TruncationParams make(double theta, double delta_star, double theta1);
};

/// rho such that the curved branch of gamma1 hits theta*delta_star at delta_star.
/// Bisection on a monotone residual, at most 200 iterations.
double solve_rho(double theta, double delta_star);

/// Lower / upper boundary curves of Gamma for the outer pair (theta, rho_star).
double gamma1(const TruncationParams& tp, double x);
double gamma2(const TruncationParams& tp, double x);

/// Same curves for an arbitrary (theta, rho) pair; used for the D1 boundary.
double gamma1_curve(double theta, double rho, double delta_star, double x);
double gamma2_curve(double theta, double rho, double delta_star, double x);

/// z(x) = x - gamma1(x), the minimal separation between Gamma-disjoint blocks.
double separation_scale(const TruncationParams& tp, double x);

enum class Region { InsideD1, Transition, Outside };
Region in_support(const TruncationParams& tp, double x, double y);

double eval_Phi(const TruncationParams& tp, double x, double y);

/// Phi * B_beta / (x y); zero outside D without evaluating B.
double truncated_kernel(const PhysicalParams& pp, const TruncationParams& tp, double x,
                        double y, double tol = 1e-10);

/// Empirical C_*: max over node pairs of Phi*B*(x+y)*exp(-(x+y)/2).
double calibrate_c_star(const PhysicalParams& pp, const TruncationParams& tp,
                        const std::vector<double>& nodes, double tol = 1e-10);

}  // namespace compton
