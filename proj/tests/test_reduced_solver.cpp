#include <doctest.h>

#include <cmath>

#include "compton/errors.hpp"
#include "compton/full_solver.hpp"
#include "compton/reduced_solver.hpp"

using namespace compton;

namespace {
const PhysicalParams kP{1, 1};
const TruncationParams kT = TruncationParams::make(0.5, 1.0, 0.7);

AtomSystemState three_atoms() {
  const std::vector<double> x{1, 2, 3};
  return AtomSystemState::make(x, {0.6, 0.2, 0.2}, RateKernel::synthetic(x, {0, 1, 0, -1, 0, 1, 0, -1, 0}));
}
}  // namespace

TEST_CASE("synthetic rates must be antisymmetric") {
  CHECK_THROWS_AS(RateKernel::synthetic({1, 2}, {0, 1, 1, 0}), ValidationError);
  CHECK_NOTHROW(RateKernel::synthetic({1, 2}, {0, 1, -1, 0}));
}

TEST_CASE("physical rate matrix: antisymmetric, parallel equals serial") {
  const RateKernel k = RateKernel::physical(kP, kT);
  std::vector<double> x;
  for (int i = 0; i < 20; ++i) x.push_back(0.3 * std::pow(1.2, i));
  const auto a = rate_matrix(k, x);
  CHECK(a == rate_matrix_serial(k, x));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) CHECK(a[i * x.size() + j] == -a[j * x.size() + i]);
  // mass flows to lower energies: R(x,y) > 0 for x < y when coupled
  CHECK(k.eval(1.0, 1.2) > 0.0);
  CHECK(k.eval(1.0, 10.0) == 0.0);
}

TEST_CASE("atom system right-hand side") {
  const auto r = atom_ode_rhs(three_atoms());
  CHECK(r[0] == doctest::Approx(0.12));
  CHECK(r[1] == doctest::Approx(-0.08));
  CHECK(r[2] == doctest::Approx(-0.04));
  CHECK(r[0] + r[1] + r[2] == doctest::Approx(0.0).scale(1e-16));
}

TEST_CASE("coupling components") {
  const auto c = coupling_components({0, 1, 0, -1, 0, 0, 0, 0, 0}, {1, 1, 1});
  CHECK(c.size() == 2);
}

TEST_CASE("three-atom chain reaches the predicted limit") {
  const AtomRun run = run_atoms(three_atoms(), 200.0, 1e-12, 200);
  REQUIRE(run.converged);
  const auto& m = run.traj.masses.back();
  CHECK(m[1] <= 1e-16);
  CHECK(m[2] >= 0.2 * std::exp(-1.0) - 1e-9);
  CHECK(m[0] + m[1] + m[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(run.limit.ok());
  REQUIRE(run.limit.atoms.size() == 2);
  CHECK(run.limit.atoms[0].x == 1.0);
  CHECK(run.limit.atoms[1].x == 3.0);
  CHECK(run.limit.queue_monotone);
}

TEST_CASE("classification refuses unsettled trajectories") {
  const PointTrajectory tr = integrate_atoms(three_atoms(), {0.0, 0.5, 1.0, 1.5, 2.0}, 1e-10);
  CHECK_THROWS_AS(classify_limit(tr), NotConverged);
}

TEST_CASE("Lyapunov structure of the atom system") {
  std::vector<double> ts;
  for (int k = 0; k <= 500; ++k) ts.push_back(2e-3 * k);
  const LyapunovReport r = lyapunov_check(integrate_atoms(three_atoms(), ts, 1e-11), {1, 2, 3});
  CHECK(r.ok(1e-4));
}

TEST_CASE("Picard rates: parallel equals serial") {
  std::vector<double> RW(50 * 50), u(50);
  for (int i = 0; i < 50; ++i) {
    u[i] = 1.0 / (1 + i);
    for (int j = 0; j < 50; ++j) RW[i * 50 + j] = std::sin(0.3 * i - 0.7 * j);
  }
  CHECK(picard_rates(RW, u) == picard_rates_serial(RW, u));
}

TEST_CASE("Picard solver on flat data") {
  const Grid g = Grid::log_spaced(0.5, 30.0, 80);
  const auto u0 = HybridMeasure::from_density(g, planck_density(g, 0.0));
  PicardConfig pc;
  pc.t_end = 0.5;
  for (int k = 1; k < 10; ++k) pc.output_times.push_back(0.05 * k);
  const PicardTrajectory tr = picard_solve(u0, RateKernel::physical(kP, kT), pc);
  REQUIRE(tr.times.size() == 11);
  CHECK(tr.times.back() == 0.5);
  double M0 = 0, M1 = 0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    M0 += g.weights[i] * tr.densities.front()[i];
    M1 += g.weights[i] * tr.densities.back()[i];
  }
  CHECK(M1 == doctest::Approx(M0).epsilon(1e-12));
  CHECK(flatness_bound_ratio(tr) <= 1.0 + 1e-9);
  CHECK(lyapunov_check(tr.to_points(), {1, 2, 3}).ok(1e-2));
}

TEST_CASE("flatness integral") {
  const Grid g = Grid::log_spaced(0.5, 30.0, 80);
  const auto u0 = HybridMeasure::from_density(g, planck_density(g, 0.0));
  const double f = flatness_integral(u0, 1.0, 0.4);
  CHECK(std::isfinite(f));
  CHECK(f > moment(u0, 0.0));
  HybridMeasure bad = u0;
  bad.atoms = {{0.0, 1.0}};
  CHECK_THROWS_AS(flatness_integral(bad, 1.0, 0.4), FlatnessViolation);
}
