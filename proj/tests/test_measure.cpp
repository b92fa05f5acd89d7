#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "compton/errors.hpp"
#include "compton/full_solver.hpp"
#include "compton/measure.hpp"

using namespace compton;

namespace {

// Lattice DP for the bounded-Lipschitz dual on atoms at multiples of 1/8:
// phi takes values k/8 in [-1,1], neighbouring values differ by at most the gap.
// With lattice data the LP optimum sits on the lattice, so this is exact.
double bl_lattice(const std::vector<std::pair<int, double>>& pts) {  // (position*8, signed mass)
  const int L = 8;
  std::vector<double> best(2 * L + 1, 0.0), next(2 * L + 1);
  for (int k = 0; k <= 2 * L; ++k) best[k] = pts[0].second * (k - L) / double(L);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const int gap = pts[i].first - pts[i - 1].first;
    for (int k = 0; k <= 2 * L; ++k) {
      double b = -INFINITY;
      for (int q = std::max(0, k - gap); q <= std::min(2 * L, k + gap); ++q) b = std::max(b, best[q]);
      next[k] = b + pts[i].second * (k - L) / double(L);
    }
    best.swap(next);
  }
  return *std::max_element(best.begin(), best.end());
}

}  // namespace

TEST_CASE("log grid trapezoid weights") {
  const Grid g = Grid::log_spaced(0.1, 10.0, 201);
  CHECK(g.nodes.front() == 0.1);
  CHECK(g.nodes.back() == 10.0);
  double s = 0.0;
  for (double w : g.weights) s += w;
  CHECK(s == doctest::Approx(9.9).epsilon(1e-4));
  CHECK_THROWS_AS(Grid::log_spaced(0.0, 1.0, 10), DomainError);
}

TEST_CASE("Planck moment equals 2 zeta(3)") {
  const Grid g = Grid::log_spaced(1e-4, 80.0, 6000);
  const HybridMeasure u = HybridMeasure::from_density(g, planck_density(g, 0.0));
  CHECK(moment(u, 0.0) == doctest::Approx(2.0 * 1.2020569031595942).epsilon(1e-6));
  // int x^3/(e^x-1) = pi^4/15
  CHECK(moment(u, 1.0) == doctest::Approx(std::pow(M_PI, 4) / 15).epsilon(1e-6));
}

TEST_CASE("atoms: moments, normalization, origin mass") {
  HybridMeasure u = HybridMeasure::from_atoms({{2.0, 0.5}, {0.0, 0.25}, {1.0, 0.0}, {2.0 + 1e-15, 0.5}});
  REQUIRE(u.atoms.size() == 2);
  CHECK(u.origin_mass() == 0.25);
  CHECK(moment(u, 0.0) == doctest::Approx(1.25));
  CHECK(moment(u, 2.0) == doctest::Approx(4.0));
  CHECK(exp_moment(u, 0.5) == doctest::Approx(0.25 + std::exp(1.0)));
  CHECK_NOTHROW(u.check());
}

TEST_CASE("exp moment overflow") {
  const HybridMeasure u = HybridMeasure::from_atoms({{2000.0, 1.0}});
  CHECK_THROWS_AS(exp_moment(u, 0.45), Overflow);
}

TEST_CASE("entropy density") {
  CHECK(entropy_density(1.0, 0.0) == 0.0);
  const double x = 1.3, s = 0.7;
  const double t = x * x + s;
  CHECK(entropy_density(x, s) ==
        doctest::Approx(t * std::log(t) - s * std::log(s) - x * x * std::log(x * x) - s * x));
  CHECK(entropy(HybridMeasure::from_atoms({{2.0, 0.5}})) == doctest::Approx(-1.0));
}

TEST_CASE("bl distance: simple cases") {
  const auto a = HybridMeasure::from_atoms({{1.0, 1.0}});
  CHECK(bl_distance(a, a) == 0.0);
  CHECK(bl_distance(a, HybridMeasure::from_atoms({{1.5, 1.0}})) == doctest::Approx(0.5));
  CHECK(bl_distance(a, HybridMeasure::from_atoms({{5.0, 1.0}})) == doctest::Approx(2.0));
  CHECK(bl_distance(a, HybridMeasure::from_atoms({{1.0, 0.25}})) == doctest::Approx(0.75));
}

TEST_CASE("bl distance matches the lattice oracle") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> pos(0, 40);
  std::uniform_real_distribution<double> mass(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Atom> ua, va;
    std::vector<int> ps;
    for (int k = 0; k < 6; ++k) ps.push_back(pos(rng));
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    std::vector<std::pair<int, double>> pts;
    for (int p : ps) {
      const double a = mass(rng), b = mass(rng);
      ua.push_back({p / 8.0, a});
      va.push_back({p / 8.0, b});
      pts.push_back({p, a - b});
    }
    const double d = bl_distance(HybridMeasure::from_atoms(ua), HybridMeasure::from_atoms(va));
    CHECK(d == doctest::Approx(bl_lattice(pts)).epsilon(1e-12));
  }
}

TEST_CASE("bl distance with grid densities") {
  const Grid g = Grid::log_spaced(0.5, 4.0, 50);
  const auto d = planck_density(g, -1.0);
  const HybridMeasure u = HybridMeasure::from_density(g, d);
  std::vector<double> d2 = d;
  for (double& v : d2) v *= 1.1;
  const HybridMeasure v = HybridMeasure::from_density(g, d2);
  // scaling by 1.1: optimal phi = 1 everywhere
  CHECK(bl_distance(u, v) == doctest::Approx(0.1 * moment(u, 0.0)).epsilon(1e-12));
  CHECK(bl_distance(u, v) == doctest::Approx(bl_distance(v, u)).epsilon(1e-14));
}

TEST_CASE("components split at Gamma gaps") {
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  const auto u = HybridMeasure::from_atoms({{2.0, 1.0}, {2.5, 1.0}, {10.0, 2.0}, {11.0, 0.5}});
  CHECK_FALSE(gamma_disjoint(tp, 2.0, 2.5));
  CHECK(gamma_disjoint(tp, 2.5, 10.0));
  const ComponentPartition p = components(u, tp);
  REQUIRE(p.components.size() == 2);
  CHECK(p.masses()[0] == doctest::Approx(2.0));
  CHECK(p.masses()[1] == doctest::Approx(2.5));
  CHECK(p.min_points()[0] == 2.0);
  CHECK(p.min_points()[1] == 10.0);
}

TEST_CASE("report") {
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  const auto u = HybridMeasure::from_atoms({{0.0, 0.1}, {2.0, 1.0}});
  const MomentReport r = make_report(u, {1.0, 2.0}, 0.4, &tp);
  CHECK(r.M0 == doctest::Approx(1.1));
  CHECK(r.M_alpha.at(2.0) == doctest::Approx(4.0));
  CHECK(r.alpha0 == doctest::Approx(0.1));
  CHECK(r.X_eta == doctest::Approx(0.1 + std::exp(0.8)));
}

TEST_CASE("json round trip is bit exact") {
  const Grid g = Grid::log_spaced(0.04, 40.0, 33);
  HybridMeasure u = HybridMeasure::from_density(g, planck_density(g, -0.3));
  u.atoms = {{0.0, 0.1}, {1.0 / 3.0, 1e-300}};
  const HybridMeasure v = measure_from_json(to_json(u));
  REQUIRE(v.atoms.size() == 2);
  CHECK(v.atoms[1].x == u.atoms[1].x);
  CHECK(v.atoms[1].mass == u.atoms[1].mass);
  CHECK(v.grid == u.grid);
  CHECK(v.grid.nodes == u.grid.nodes);
  CHECK(v.density == u.density);
  CHECK(to_json(v) == to_json(u));
}

TEST_CASE("json errors") {
  CHECK_THROWS_AS(measure_from_json("{"), ParseError);
  CHECK_THROWS_AS(measure_from_json(R"({"atoms":[[1]],"grid":null,"density":[]})"), ParseError);
  CHECK_THROWS_AS(measure_from_json(R"({"atoms":[[1,-2]],"grid":null,"density":[]})"), Error);
}
