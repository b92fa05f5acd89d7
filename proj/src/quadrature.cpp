#include "compton/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "compton/errors.hpp"

namespace compton {

namespace {

// Kronrod 15-point abscissae (positive half) and weights, Gauss 7-point weights.
constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double rk = fc * wgk[7];
  double rg = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * xgk[j];
    const double s = f(c - dx) + f(c + dx);
    rk += wgk[j] * s;
    if (j % 2 == 1) rg += wg[j / 2] * s;
  }
  rk *= h;
  rg *= h;
  // QUADPACK-style scaling of the raw Kronrod-Gauss difference.
  double err = std::abs(rk - rg);
  if (err > 0) err = std::abs(rk) * std::min(1.0, std::pow(200.0 * err / std::max(std::abs(rk), 1e-300), 1.5));
  err = std::max(err, 50.0 * 2.22e-16 * std::abs(rk));
  return {a, b, rk, err};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f,
                     const std::vector<double>& pts, const QuadOptions& opt) {
  std::priority_queue<Panel> heap;
  double value = 0.0, err = 0.0;
  int evals = 0;
  for (size_t k = 0; k + 1 < pts.size(); ++k) {
    if (!(pts[k + 1] > pts[k])) continue;
    Panel p = gk15(f, pts[k], pts[k + 1]);
    evals += 15;
    value += p.value;
    err += p.err;
    heap.push(p);
  }
  int panels = static_cast<int>(heap.size());
  auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(value)); };
  while (err > target() && !heap.empty()) {
    if (panels >= opt.max_panels)
      throw NonConvergence("adaptive quadrature: panel budget exhausted (error " +
                           std::to_string(err) + ", target " + std::to_string(target()) + ")");
    Panel p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {
      throw NonConvergence("adaptive quadrature: panel width reached machine resolution");
    }
    Panel l = gk15(f, p.a, m);
    Panel r = gk15(f, m, p.b);
    evals += 30;
    value += l.value + r.value - p.value;
    err += l.err + r.err - p.err;
    heap.push(l);
    heap.push(r);
    ++panels;
  }
  // Re-sum to remove drift from the incremental updates.
  double v = 0.0, e = 0.0;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().err;
    heap.pop();
  }
  return {v, e, evals};
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt) {
  return integrate(f, std::vector<double>{a, b}, opt);
}

GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // final derivative at converged x
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

}  // namespace compton
