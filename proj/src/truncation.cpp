#include "compton/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "compton/errors.hpp"

namespace compton {

namespace {

// Curved branch of gamma1: the smaller root y of |x-y| = rho sqrt(xy(x+y)),
// written without the cancellation of the textbook form.
double curved_gamma1(double rho, double x) {
  if (x <= 0) return 0.0;
  const double r2x = rho * rho * x;
  return 2.0 * x / (2.0 + r2x + rho * std::sqrt(x) * std::sqrt(r2x + 8.0));
}

// Curved branch of gamma2 (larger root); needs rho^2 x < 1.
double curved_gamma2(double rho, double x) {
  if (x <= 0) return 0.0;
  const double r2x = rho * rho * x;
  return (2.0 * x + r2x * x + rho * x * std::sqrt(x) * std::sqrt(r2x + 8.0)) /
         (2.0 * (1.0 - r2x));
}

// Cone ratio theta' whose solved rho equals s: inverse of the rho(theta) map.
double effective_theta(double s, double delta_star) {
  const double a = s * s * delta_star;
  return 2.0 / (2.0 + a + s * std::sqrt(delta_star) * std::sqrt(a + 8.0));
}

}  // namespace

double solve_rho(double theta, double delta_star) {
  if (!(theta > 0 && theta < 1)) throw NoRoot("solve_rho: theta must lie in (0,1)");
  if (!(delta_star > 0) || !std::isfinite(delta_star))
    throw NoRoot("solve_rho: delta_star must be positive");
  auto residual = [&](double rho) { return curved_gamma1(rho, delta_star) - theta * delta_star; };
  double lo = 0.0, hi = 1.0 / std::sqrt(delta_star);
  double rlo = residual(lo), rhi = residual(hi);
  for (int k = 0; k < 200 && rhi > 0; ++k) {
    lo = hi;
    rlo = rhi;
    hi *= 2.0;
    rhi = residual(hi);
  }
  if (!(rlo > 0 && rhi < 0)) throw NoRoot("solve_rho: no sign change of the residual");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double rm = residual(mid);
    if (rm > rlo || rm < rhi) throw NoRoot("solve_rho: residual not monotone on the bracket");
    if (rm > 0) {
      lo = mid;
      rlo = rm;
    } else {
      hi = mid;
      rhi = rm;
    }
  }
  const double rho = std::abs(rlo) <= std::abs(rhi) ? lo : hi;
  if (std::abs(residual(rho)) > 1e-12 * delta_star)
    throw NoRoot("solve_rho: residual tolerance not reached");
  return rho;
}

TruncationParams TruncationParams::make(double theta, double delta_star, double theta1) {
  if (!(theta > 0 && theta < 1)) throw ValidationError("theta must lie in (0,1)");
  if (!(delta_star > 0)) throw ValidationError("delta_star must be positive");
  if (!(theta1 > theta && theta1 < 1)) throw ValidationError("theta1 must lie in (theta,1)");
  TruncationParams tp;
  tp.theta = theta;
  tp.delta_star = delta_star;
  tp.theta1 = theta1;
  tp.rho_star = solve_rho(theta, delta_star);
  tp.rho1 = solve_rho(theta1, delta_star);
  if (!(tp.rho_star * tp.rho_star * theta * delta_star < 1.0))
    throw ValidationError("rho_star^2 theta delta_star must be < 1");
  return tp;
}

double gamma1_curve(double theta, double rho, double delta_star, double x) {
  if (x <= delta_star) return curved_gamma1(rho, x);
  return theta * x;
}

double gamma2_curve(double theta, double rho, double delta_star, double x) {
  if (x <= theta * delta_star) return curved_gamma2(rho, x);
  return x / theta;
}

double gamma1(const TruncationParams& tp, double x) {
  return gamma1_curve(tp.theta, tp.rho_star, tp.delta_star, x);
}

double gamma2(const TruncationParams& tp, double x) {
  return gamma2_curve(tp.theta, tp.rho_star, tp.delta_star, x);
}

double separation_scale(const TruncationParams& tp, double x) { return x - gamma1(tp, x); }

Region in_support(const TruncationParams& tp, double x, double y) {
  const double hi = std::max(x, y), lo = std::min(x, y);
  if (hi <= 0) return Region::Outside;
  if (hi <= tp.delta_star) {
    if (lo <= 0) return Region::Outside;
    const double s = (hi - lo) / std::sqrt(lo * hi * (lo + hi));
    if (s <= tp.rho1) return Region::InsideD1;
    if (s > tp.rho_star) return Region::Outside;
    return Region::Transition;
  }
  const double r = lo / hi;
  if (r >= tp.theta1) return Region::InsideD1;
  if (r < tp.theta) return Region::Outside;
  return Region::Transition;
}

double eval_Phi(const TruncationParams& tp, double x, double y) {
  if (!(x > 0 || y > 0)) throw DomainError("Phi is undefined at the origin");
  switch (in_support(tp, x, y)) {
    case Region::InsideD1: return 1.0;
    case Region::Outside: return 0.0;
    case Region::Transition: break;
  }
  const double hi = std::max(x, y), lo = std::min(x, y);
  double r;
  if (hi <= tp.delta_star) {
    const double s = (hi - lo) / std::sqrt(lo * hi * (lo + hi));
    r = effective_theta(s, tp.delta_star);
  } else {
    r = lo / hi;
  }
  return std::clamp((r - tp.theta) / (tp.theta1 - tp.theta), 0.0, 1.0);
}

double truncated_kernel(const PhysicalParams& pp, const TruncationParams& tp, double x,
                        double y, double tol) {
  if (!(x > 0) || !(y > 0)) throw DomainError("truncated_kernel: x and y must be positive");
  const double phi = eval_Phi(tp, x, y);
  if (phi == 0.0) return 0.0;
  return phi * eval_B(pp, x, y, tol).value / (x * y);
}

double calibrate_c_star(const PhysicalParams& pp, const TruncationParams& tp,
                        const std::vector<double>& nodes, double tol) {
  const long n = static_cast<long>(nodes.size());
  double best = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : best)
  for (long i = 0; i < n; ++i) {
    for (long j = i; j < n; ++j) {
      const double x = nodes[i], y = nodes[j];
      const double phi = eval_Phi(tp, x, y);
      if (phi == 0.0) continue;
      const double v = phi * eval_B(pp, x, y, tol).value * (x + y) * std::exp(-0.5 * (x + y));
      best = std::max(best, v);
    }
  }
  return best;
}

}  // namespace compton
