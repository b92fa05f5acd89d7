#include <doctest.h>

#include <cmath>

#include "compton/errors.hpp"
#include "compton/full_solver.hpp"

using namespace compton;

namespace {
const PhysicalParams kP{1, 1};
const TruncationParams kT = TruncationParams::make(0.5, 1.0, 0.7);

std::vector<double> bumped(const Grid& g) {
  auto d = planck_density(g, -1.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double z = g.nodes[i] - 3.0;
    if (std::abs(z) < 1) d[i] += 0.5 * std::exp(-1 / (1 - z * z));
  }
  return d;
}
}  // namespace

TEST_CASE("phi_n cutoff") {
  CHECK(phi_n(5, 1.0) == 1.0);
  CHECK(phi_n(5, 0.2) == doctest::Approx(5.0));
  CHECK(phi_n(5, 5.0) == doctest::Approx(0.2));
  CHECK(phi_n(5, 6.0) == 0.0);
  CHECK(phi_n(5, 1.0 / 6.0) == 0.0);
  CHECK(phi_n(5, 5.5) == doctest::Approx(0.1));
}

TEST_CASE("kernel table: OpenMP equals serial, symmetric, banded") {
  const Grid g = Grid::log_spaced(0.04, 40.0, 96);
  const RegularizedKernel a = build_regularized_kernel(kP, kT, 20, g);
  const RegularizedKernel b = build_regularized_kernel_serial(kP, kT, 20, g);
  CHECK(a.table == b.table);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  CHECK(a.c_star == b.c_star);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) {
      CHECK(a.at(i, j) == a.at(j, i));
      if (static_cast<int>(j) < a.lo[i] || static_cast<int>(j) > a.hi[i]) CHECK(a.at(i, j) == 0.0);
    }
  CHECK(a.eval(2.0, 2.1) ==
        doctest::Approx(truncated_kernel(kP, kT, 2.0, 2.1) * phi_n(20, 2.0) * phi_n(20, 2.1) * 2.0 * 2.1)
            .epsilon(1e-12));
}

TEST_CASE("collision operator conserves mass; parallel equals serial") {
  const Grid g = Grid::log_spaced(0.04, 40.0, 128);
  const RegularizedKernel k = build_regularized_kernel(kP, kT, 20, g);
  const auto d = bumped(g);
  const auto r = collision_rhs(k, d);
  const auto s = collision_rhs_serial(k, d);
  const auto p = collision_rhs_pairwise(k, d);
  CHECK(r == s);
  double net = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    net += g.weights[i] * r[i];
    scale += g.weights[i] * std::abs(r[i]);
    CHECK(p[i] == doctest::Approx(r[i]).epsilon(1e-10).scale(scale + 1e-300));
  }
  CHECK(std::abs(net) <= 1e-13 * scale);
}

TEST_CASE("Planck densities are equilibria") {
  const Grid g = Grid::log_spaced(0.04, 40.0, 128);
  const RegularizedKernel k = build_regularized_kernel(kP, kT, 20, g);
  for (double mu : {0.0, -0.5, -2.0}) {
    const auto d = planck_density(g, mu);
    const auto r = collision_rhs(k, d);
    double mx = 0.0, dm = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      mx = std::max(mx, std::abs(r[i]));
      dm = std::max(dm, d[i]);
    }
    CHECK(mx <= 1e-12 * dm);
  }
}

TEST_CASE("j function") {
  CHECK(j_function(1.0, 1.0) == 0.0);
  CHECK(j_function(2.0, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(j_function(1.0, 3.0) > 0.0);
  CHECK(j_function(0.0, 0.0) == 0.0);
}

TEST_CASE("dissipation is nonnegative and vanishes at equilibrium") {
  const Grid g = Grid::log_spaced(0.04, 40.0, 96);
  const RegularizedKernel k = build_regularized_kernel(kP, kT, 20, g);
  const DissipationParts d = entropy_dissipation(HybridMeasure::from_density(g, bumped(g)), k);
  CHECK(d.total > 0.0);
  CHECK(d.total == doctest::Approx(0.5 * d.d1 + d.d2 + 0.5 * d.d3));
  const DissipationParts e = entropy_dissipation(HybridMeasure::from_density(g, planck_density(g, -1)), k);
  CHECK(std::abs(e.total) <= 1e-10 * d.total);
}

TEST_CASE("C_eta formula") {
  const double c = c_eta(2.0, 0.5, 0.4);
  CHECK(c == doctest::Approx(2.0 / (2 * 0.25) * (0.5 / 1.5) * 0.4 / 0.1));
}

TEST_CASE("run_full: conservation, moment bound and entropy balance") {
  const Grid g = Grid::log_spaced(0.04, 40.0, 96);
  SolverConfig cfg;
  cfg.t_end = 0.2;
  cfg.record_interval = 0.05;
  cfg.keep_snapshots = true;
  const TrajectoryRecord tr = run_full(HybridMeasure::from_density(g, bumped(g)), kP, kT, 20, cfg);
  CHECK(tr.steps == 200);
  CHECK(tr.times.size() == 5);
  CHECK(tr.snapshots.size() == 5);
  CHECK(tr.max_mass_drift <= 1e-12);
  CHECK(tr.x_eta_violations == 0);
  CHECK(tr.negative_dissipation_steps == 0);
  const EntropyBalance b = entropy_balance_check(tr);
  CHECK(b.H_nondecreasing);
  CHECK(b.relative <= 1e-4);
  CHECK(b.H_end > b.H_start);
}

TEST_CASE("Euler and RK4 agree at small dt") {
  const Grid g = Grid::log_spaced(0.04, 40.0, 64);
  const RegularizedKernel k = build_regularized_kernel(kP, kT, 20, g);
  SolverConfig a, e;
  e.scheme = Scheme::Euler;
  const auto d = bumped(g);
  const auto ra = step(d, k, a, 1e-3).g;
  const auto re = step(d, k, e, 1e-3).g;
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(ra[i] == doctest::Approx(re[i]).epsilon(1e-5).scale(1.0));
}

TEST_CASE("run_full rejects bad eta and stray atoms") {
  const Grid g = Grid::log_spaced(0.04, 40.0, 32);
  SolverConfig cfg;
  cfg.t_end = 0.01;
  cfg.eta = 0.5;
  const auto u = HybridMeasure::from_density(g, planck_density(g, -1));
  CHECK_THROWS_AS(run_full(u, kP, kT, 20, cfg), ValidationError);
  cfg.eta = 0.2;
  CHECK_THROWS_AS(run_full(u, kP, kT, 20, cfg), ValidationError);
  cfg.eta = 0.4;
  HybridMeasure w = u;
  w.atoms = {{1.0, 0.1}};
  CHECK_THROWS(run_full(w, kP, kT, 20, cfg));
}

TEST_CASE("origin mass estimate") {
  const Grid g = Grid::log_spaced(0.01, 40.0, 200);
  const RegularizedKernel k = build_regularized_kernel(kP, kT, 20, g);
  HybridMeasure u = HybridMeasure::from_density(g, planck_density(g, -1));
  u.atoms = {{0.0, 0.3}};
  const auto s = origin_mass_estimate(u, k, {0.4, 0.1, 0.02});
  REQUIRE(s.size() == 3);
  for (const auto& o : s) {
    CHECK(o.mass >= 0.3);
    CHECK(o.flux >= 0.0);
  }
  CHECK(s[0].mass >= s[1].mass);
  CHECK(s[1].mass >= s[2].mass);
}
