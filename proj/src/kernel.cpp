#include "compton/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "compton/errors.hpp"
#include "compton/quadrature.hpp"

namespace compton {

void PhysicalParams::validate() const {
  if (!(beta > 0) || !std::isfinite(beta)) throw ValidationError("beta must be > 0");
  if (!(m > 0) || !std::isfinite(m)) throw ValidationError("m must be > 0");
}

KernelSample eval_B(const PhysicalParams& p, double x, double y, double tol) {
  p.validate();
  if (!(x > 0) || !(y > 0)) throw DomainError("eval_B: x and y must be positive");
  if (!(tol > 0) || tol > 1e-3) throw DomainError("eval_B: tol must lie in (0, 1e-3]");
  const double d2 = (x - y) * (x - y);
  const double xy = x * y;
  const double bm = p.beta * p.m;
  // t = 1 - s^2 on s in [0, sqrt 2]; R^2 = (x-y)^2 + 2xy s^2.
  auto f = [&](double s) {
    const double s2 = s * s;
    const double t = 1.0 - s2;
    const double R2 = d2 + 2.0 * xy * s2;
    const double R = std::sqrt(R2);
    const double expo = -bm * d2 / (2.0 * R2) - R2 / (8.0 * bm);
    return (1.0 + t * t) * 2.0 * s / R * std::exp(expo);
  };
  const double smax = std::sqrt(2.0);
  std::vector<double> pts{0.0, smax};
  const double s_gap = std::sqrt(d2 / (2.0 * xy));
  const double s_gauss = std::sqrt(8.0 * bm / (2.0 * xy));
  for (double b : {s_gap, 4.0 * s_gap, s_gauss}) {
    if (b > 1e-300 && b < smax) pts.push_back(b);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  QuadOptions opt;
  opt.rel_tol = tol * 0.5;
  opt.max_panels = 4000;
  QuadResult r = integrate(f, pts, opt);
  const double pref = std::sqrt(p.beta) * std::exp(0.5 * (x + y));
  KernelSample out;
  out.x = x;
  out.y = y;
  out.value = pref * r.value;
  out.abs_error_estimate = pref * r.abs_error;
  return out;
}

double eval_B_diagonal_closed_form(const PhysicalParams& p, double x) {
  if (!(x > 0)) throw DomainError("diagonal closed form: x must be positive");
  const double bm = p.beta * p.m;
  const double sb = std::sqrt(p.beta);
  if (x * x <= 2.0 * bm) {
    // Angular integral expanded in a = x^2/(4 m beta):
    //   sum_k (-a)^k/k! * int_0^2 (2 - 2s + s^2) s^{k-1/2} ds
    const double a = x * x / (4.0 * bm);
    double sum = 0.0, term = 1.0;
    for (int k = 0; k < 60; ++k) {
      const double kk = k;
      const double J = 2.0 * std::pow(2.0, kk + 0.5) / (kk + 0.5) -
                       2.0 * std::pow(2.0, kk + 1.5) / (kk + 1.5) +
                       std::pow(2.0, kk + 2.5) / (kk + 2.5);
      const double c = term * J;
      sum += c;
      if (k > 2 && std::abs(c) < 1e-18 * std::abs(sum)) break;
      term *= -a / (kk + 1.0);
    }
    return sb * std::exp(x) / (std::sqrt(2.0) * x) * sum;
  }
  const double x2 = x * x;
  const double poly = 6.0 * bm * bm - 2.0 * bm * x2 + x2 * x2;
  const double bracket = std::sqrt(2.0 * M_PI) * poly * std::erf(x / std::sqrt(2.0 * bm)) -
                         12.0 * std::exp(-x2 / (2.0 * bm)) * std::pow(bm, 1.5) * x;
  return sb * 2.0 * std::exp(x) * std::sqrt(bm) / std::pow(x, 6) * bracket;
}

double eval_majorant(const PhysicalParams& p, double x, double y) {
  const double s = x + y;
  const double d = x - y;
  const double q = std::abs(d);
  const double bm = p.beta * p.m;
  const double g = std::exp(-p.beta * (p.m * d * d + d * d * d * d / (4.0 * bm * p.beta)) /
                            (2.0 * s * s));
  const double N = 8.0 * std::exp(0.5 * s) * (10.0 * (s + q) * (s + q) + (s - q) * (s - q)) /
                   (15.0 * (s + q) * (s + q) * (s + q));
  return std::sqrt(p.beta) * g * N;
}

double eval_crude_bound(const PhysicalParams& p, double x, double y) {
  const double hi = std::max(x, y), lo = std::min(x, y);
  return std::sqrt(p.beta) * std::exp(0.5 * (x + y)) * 4.0 * (10.0 * hi * hi + lo * lo) /
         (15.0 * hi * hi * hi);
}

MonotonicityReport verify_antidiagonal_monotonicity(
    const PhysicalParams& p, const std::vector<std::pair<double, double>>& samples, double tol,
    double rel_step) {
  MonotonicityReport rep;
  for (auto [x, y] : samples) {
    if (!(x > 0) || !(y > 0) || x == y)
      throw DomainError("monotonicity samples need x != y, both positive");
    const double lo = std::min(x, y);
    double h = rel_step * lo;
    if (h > lo / 10.0) throw StepTooLarge("finite-difference step exceeds min(x,y)/10");
    // Keep both stencil points on the same side of the diagonal.
    h = std::min(h, std::abs(x - y) / 4.0);
    const double up = eval_B(p, x + h, y - h, tol).value;
    const double dn = eval_B(p, x - h, y + h, tol).value;
    const double deriv = (up - dn) / (2.0 * h);
    ++rep.samples;
    const bool want_positive = y > x;
    if ((want_positive && !(deriv > 0)) || (!want_positive && !(deriv < 0)))
      rep.violations.push_back({x, y, deriv, "antidiagonal derivative sign"});
    const KernelSample b = eval_B(p, x, y, tol);
    const KernelSample mid = eval_B(p, 0.5 * (x + y), 0.5 * (x + y), tol);
    if (b.value > mid.value + b.abs_error_estimate + mid.abs_error_estimate)
      rep.violations.push_back({x, y, deriv, "midpoint bound"});
  }
  return rep;
}

ScaledPoint scale_to_dimensionless(const PhysicalParams& p, double t, double k, double f) {
  const double x = p.beta * k;
  return {p.beta * p.beta * p.beta * t, x, x * x * f};
}

PhysicalPoint scale_to_physical(const PhysicalParams& p, double tau, double x, double u) {
  const double k = x / p.beta;
  return {tau / (p.beta * p.beta * p.beta), k, x > 0 ? u / (x * x) : 0.0};
}

TestFunction2D bump_test_function() {
  auto psi = [](double s) {
    const double z = 2.0 * s - 3.0;
    if (std::abs(z) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - z * z));
  };
  return {[psi](double x, double y) { return psi(x) * psi(y); }, 1.0, 2.0};
}

std::vector<ConcentrationRow> diagonal_concentration_check(const PhysicalParams& p,
                                                           const TestFunction2D& phi,
                                                           const std::vector<double>& betas) {
  QuadOptions outer;
  outer.rel_tol = 1e-9;
  outer.abs_tol = 1e-300;
  QuadOptions inner;
  inner.rel_tol = 1e-10;
  inner.abs_tol = 1e-300;

  auto diag = [&](double z) { return phi.f(0.5 * z, 0.5 * z) * std::exp(0.5 * z); };
  const double diag_int = integrate(diag, 2.0 * phi.lo, 2.0 * phi.hi, outer).value;
  const double limit =
      88.0 / 15.0 * std::sqrt(M_PI / (2.0 * p.m)) * std::erf(1.0) * diag_int;

  std::vector<ConcentrationRow> rows;
  for (double b : betas) {
    PhysicalParams pb{b, p.m};
    const double c = std::sqrt(2.0 / (b * p.m));
    auto over_zeta = [&](double zeta) {
      const double w = std::min(zeta * c, 2.0 * (phi.hi - phi.lo));
      auto over_xi = [&](double xi) {
        const double x = 0.5 * (zeta + xi), y = 0.5 * (zeta - xi);
        const double v = phi.f(x, y);
        return v == 0.0 ? 0.0 : v * eval_majorant(pb, x, y);
      };
      return 0.5 * integrate(over_xi, std::vector<double>{-w, 0.0, w}, inner).value;
    };
    const double I = integrate(over_zeta, 2.0 * phi.lo, 2.0 * phi.hi, outer).value;
    rows.push_back({b, I, limit, limit != 0.0 ? I / limit : 0.0});
  }
  return rows;
}

namespace {
void fill_row(const PhysicalParams& p, const std::vector<double>& nodes, double tol,
              std::vector<KernelSample>& out, size_t i) {
  const size_t n = nodes.size();
  for (size_t j = 0; j < n; ++j) out[i * n + j] = eval_B(p, nodes[i], nodes[j], tol);
}
}  // namespace

std::vector<KernelSample> kernel_table(const PhysicalParams& p, const std::vector<double>& nodes,
                                       double tol) {
  const long n = static_cast<long>(nodes.size());
  std::vector<KernelSample> out(nodes.size() * nodes.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) fill_row(p, nodes, tol, out, static_cast<size_t>(i));
  return out;
}

std::vector<KernelSample> kernel_table_serial(const PhysicalParams& p,
                                              const std::vector<double>& nodes, double tol) {
  std::vector<KernelSample> out(nodes.size() * nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) fill_row(p, nodes, tol, out, i);
  return out;
}

}  // namespace compton
