#include <doctest.h>

#include <cmath>
#include <random>

#include "compton/errors.hpp"
#include "compton/truncation.hpp"

using namespace compton;

namespace {
// The curved lower branch meets theta*x at x = delta_star exactly when
// (1 - theta) delta = rho sqrt(theta (1 + theta)) delta^{3/2}.
double rho_closed_form(double theta, double delta) {
  return (1 - theta) / std::sqrt(theta * (1 + theta) * delta);
}
}  // namespace

TEST_CASE("solve_rho agrees with the closed form") {
  for (auto [theta, d] : {std::pair{0.3, 1.0}, {0.5, 1.0}, {0.5, 0.1}, {0.8, 5.0}, {0.05, 20.0}, {0.95, 0.01}}) {
    CAPTURE(theta);
    CAPTURE(d);
    CHECK(solve_rho(theta, d) == doctest::Approx(rho_closed_form(theta, d)).epsilon(1e-12));
  }
  CHECK(solve_rho(0.5, 1.0) == doctest::Approx(0.5773502692).epsilon(1e-10));
  CHECK(solve_rho(0.7, 1.0) == doctest::Approx(0.2750095491).epsilon(1e-9));
}

TEST_CASE("solve_rho errors") {
  CHECK_THROWS_AS(solve_rho(0.0, 1.0), NoRoot);
  CHECK_THROWS_AS(solve_rho(1.0, 1.0), NoRoot);
  CHECK_THROWS_AS(solve_rho(0.5, -1.0), NoRoot);
}

TEST_CASE("boundary curves are continuous at the junctions") {
  for (auto [theta, d] : {std::pair{0.3, 1.0}, {0.5, 1.0}, {0.5, 0.1}, {0.8, 5.0}}) {
    const TruncationParams tp = TruncationParams::make(theta, d, 0.5 * (1 + theta));
    CHECK(std::abs(gamma1(tp, d) - theta * d) <= 1e-12 * d);
    CHECK(std::abs(gamma1(tp, d * (1 + 1e-14)) - theta * d) <= 1e-12 * d);
    CHECK(std::abs(gamma2(tp, theta * d) - d) <= 1e-10);
  }
}

TEST_CASE("gamma1 < x < gamma2") {
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  for (double x : {0.01, 0.2, 0.49, 0.5, 0.9, 1.0, 3.0, 40.0}) {
    CHECK(gamma1(tp, x) < x);
    CHECK(gamma2(tp, x) > x);
    CHECK(separation_scale(tp, x) == doctest::Approx(x - gamma1(tp, x)));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(TruncationParams::make(0.5, 1.0, 0.5), ValidationError);
  CHECK_THROWS_AS(TruncationParams::make(0.5, 1.0, 0.4), ValidationError);
  CHECK_THROWS_AS(TruncationParams::make(1.2, 1.0, 0.9), ValidationError);
  CHECK_NOTHROW(TruncationParams::make(0.5, 1.0, 0.7));
}

TEST_CASE("regions and cutoff") {
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  CHECK(in_support(tp, 2.0, 2.1) == Region::InsideD1);
  CHECK(eval_Phi(tp, 2.0, 2.1) == 1.0);
  CHECK(in_support(tp, 2.0, 5.0) == Region::Outside);
  CHECK(eval_Phi(tp, 2.0, 5.0) == 0.0);
  CHECK(in_support(tp, 2.0, 3.4) == Region::Transition);
  const double phi = eval_Phi(tp, 2.0, 3.4);
  CHECK(phi > 0.0);
  CHECK(phi < 1.0);
  // above delta_star the ramp is linear in lo/hi
  CHECK(phi == doctest::Approx((2.0 / 3.4 - 0.5) / 0.2).epsilon(1e-14));
  CHECK(eval_Phi(tp, 0.0, 0.3) == 0.0);
  CHECK_THROWS_AS(eval_Phi(tp, 0.0, 0.0), DomainError);
}

TEST_CASE("cutoff is symmetric, continuous and nested") {
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-4.0, 2.0);
  for (int k = 0; k < 2000; ++k) {
    const double x = std::exp(U(rng)), y = std::exp(U(rng));
    const double p = eval_Phi(tp, x, y);
    CHECK(p == eval_Phi(tp, y, x));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    // support of Phi lies between the curves
    if (p > 0) {
      CHECK(std::min(x, y) >= gamma1(tp, std::max(x, y)) * (1 - 1e-12));
    }
    const double h = 1e-9 * x;
    CHECK(std::abs(eval_Phi(tp, x + h, y) - p) < 1e-5);
  }
}

TEST_CASE("continuity across delta_star") {
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  const double lo = 0.6;
  const double a = eval_Phi(tp, lo, 1.0 - 1e-12);
  const double b = eval_Phi(tp, lo, 1.0 + 1e-12);
  CHECK(std::abs(a - b) < 1e-9);
}

TEST_CASE("truncated kernel vanishes outside the support") {
  const PhysicalParams pp{1, 1};
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  CHECK(truncated_kernel(pp, tp, 1.0, 5.0) == 0.0);
  const double v = truncated_kernel(pp, tp, 2.0, 2.1);
  CHECK(v == doctest::Approx(eval_B(pp, 2.0, 2.1).value / 4.2).epsilon(1e-14));
}

TEST_CASE("C_* calibration") {
  const PhysicalParams pp{1, 1};
  const TruncationParams tp = TruncationParams::make(0.5, 1.0, 0.7);
  std::vector<double> nodes;
  for (int i = 0; i < 30; ++i) nodes.push_back(0.05 * std::pow(1.25, i));
  const double c = calibrate_c_star(pp, tp, nodes);
  double best = 0.0;
  for (double x : nodes)
    for (double y : nodes)
      best = std::max(best, eval_Phi(tp, x, y) * eval_B(pp, x, y).value * (x + y) * std::exp(-0.5 * (x + y)));
  CHECK(c == best);
}
