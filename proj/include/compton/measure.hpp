#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "compton/truncation.hpp"

namespace compton {

/// Log-spaced nodes with trapezoid weights in log x (w_i = x_i h, halved at the ends).
struct Grid {
  double xmin = 0.0;
  double xmax = 0.0;
  int n = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  static Grid log_spaced(double xmin, double xmax, int n);
  bool empty() const { return n == 0; }
  bool operator==(const Grid& o) const { return xmin == o.xmin && xmax == o.xmax && n == o.n; }
};

struct Atom {
  double x = 0.0;
  double mass = 0.0;
};

/// Atoms plus a density sampled on a grid. An atom at x = 0 carries the origin mass.
struct HybridMeasure {
  std::vector<Atom> atoms;
  Grid grid;
  std::vector<double> density;

  static HybridMeasure from_atoms(std::vector<Atom> atoms);
  static HybridMeasure from_density(Grid grid, std::vector<double> density);

  /// Sort atoms, merge those closer than location_eps*max(1,x), drop empty ones.
  void normalize(double location_eps = 1e-12);
  double origin_mass() const;
  /// Throws DomainError when an invariant (nonnegative, finite, sizes) fails.
  void check() const;
};

double moment(const HybridMeasure& u, double rho);
double exp_moment(const HybridMeasure& u, double eta);

/// h(x,s) = (x^2+s)log(x^2+s) - s log s - x^2 log x^2 - s x.
double entropy_density(double x, double s);
double entropy(const HybridMeasure& u);

/// sup of int phi d(u - v) over 1-Lipschitz phi with |phi| <= 1, solved exactly
/// on the merged support (grid nodes count as point masses w_i g_i).
double bl_distance(const HybridMeasure& u, const HybridMeasure& v);

/// a and c cannot be coupled by the truncated kernel.
bool gamma_disjoint(const TruncationParams& tp, double a, double c);

struct Component {
  std::vector<std::size_t> atom_indices;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;  // inclusive grid index ranges
  double lo = 0.0;
  double hi = 0.0;
  double mass = 0.0;
};

struct ComponentPartition {
  std::vector<Component> components;
  std::vector<double> masses() const;
  std::vector<double> min_points() const;
};

/// Splits the support at every gap (a,b) with gamma1(b) >= a.
/// A grid node belongs to the support when w_i g_i > mass_eps * M0.
ComponentPartition components(const HybridMeasure& u, const TruncationParams& tp,
                              double mass_eps = 1e-14);

struct MomentReport {
  double M0 = 0.0;
  std::map<double, double> M_alpha;
  double eta = 0.0;
  double X_eta = 0.0;
  double H = 0.0;
  double alpha0 = 0.0;
  std::vector<double> component_masses;
};

MomentReport make_report(const HybridMeasure& u, const std::vector<double>& alphas, double eta,
                         const TruncationParams* tp = nullptr);

std::string to_json(const HybridMeasure& u, int indent = -1);
HybridMeasure measure_from_json(const std::string& text);

}  // namespace compton
