#pragma once

#include <functional>
#include <vector>

namespace compton {

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
};

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_panels = 2000;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a,b].
/// The panel with the largest error estimate is bisected until the total
/// estimate drops below max(abs_tol, rel_tol*|value|).
/// Throws NonConvergence when the panel budget runs out.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt = {});

/// Same, over consecutive breakpoints pts[0] < pts[1] < ... (the panels
/// share one error budget).
QuadResult integrate(const std::function<double(double)>& f,
                     const std::vector<double>& pts, const QuadOptions& opt = {});

/// Gauss-Legendre nodes and weights on [-1,1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

}  // namespace compton
