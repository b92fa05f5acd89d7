#include <doctest.h>

#include <cmath>
#include <random>

#include "compton/errors.hpp"
#include "compton/kernel.hpp"

using namespace compton;

namespace {
// Values of the angular integral computed at 40 digits with an
// independent tanh-sinh quadrature in the original cos(angle) variable.
struct Oracle {
  double beta, m, x, y, value;
};
const Oracle kOracle[] = {
    {1, 1, 1, 2, 3.0857246312432623},       {1, 1, 0.5, 0.7, 6.1936942577092231},
    {1, 1, 3, 3, 9.4829345402861291},       {1, 1, 0.1, 5, 0.18599191238652435},
    {2, 0.5, 1.5, 2.5, 4.8298110541015385}, {100, 1, 1, 2, 0.029743594822592717},
    {1, 1, 0.01, 0.01, 296.27695743194399}, {10, 2, 4, 4.5, 82.437581935844869},
};
}  // namespace

TEST_CASE("eval_B matches high-precision oracle") {
  for (const auto& o : kOracle) {
    CAPTURE(o.x);
    CAPTURE(o.y);
    const KernelSample s = eval_B({o.beta, o.m}, o.x, o.y);
    CHECK(std::abs(s.value - o.value) <= 1e-9 * o.value);
    CHECK(s.abs_error_estimate <= 1e-10 * s.value);
  }
}

TEST_CASE("symmetry is exact") {
  const PhysicalParams p{1, 1};
  CHECK(eval_B(p, 2, 3).value == eval_B(p, 3, 2).value);
  CHECK(eval_B(p, 0.2, 7).value == eval_B(p, 7, 0.2).value);
}

TEST_CASE("diagonal closed form") {
  const PhysicalParams p{1, 1};
  for (double x : {0.1, 1.0, 10.0}) {
    const double q = eval_B(p, x, x).value;
    CHECK(std::abs(eval_B_diagonal_closed_form(p, x) - q) <= 1e-8 * q);
  }
  // continuity across the series/erf switch at x^2 = 2 beta m
  const double xs = std::sqrt(2.0);
  const double a = eval_B_diagonal_closed_form(p, xs * (1 - 1e-9));
  const double b = eval_B_diagonal_closed_form(p, xs * (1 + 1e-9));
  CHECK(std::abs(a - b) <= 1e-8 * a);
  CHECK(eval_B_diagonal_closed_form(p, 3.0) == doctest::Approx(9.4829345402861291).epsilon(1e-12));
}

TEST_CASE("large and small x asymptotics") {
  const PhysicalParams p{1, 1};
  const double big = eval_B(p, 100, 100).value * 1e4 * std::exp(-100.0);
  CHECK(std::abs(big / (2 * std::sqrt(2 * M_PI)) - 1) < 0.01);
  auto rem = [&](double x) { return eval_B(p, x, x).value - 44.0 / 15.0 * (1 / x + 1); };
  const double order = std::log10(rem(1e-2) / rem(1e-3));
  CHECK(order == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("values decrease in beta") {
  double prev = INFINITY;
  for (double beta : {1e2, 1e3, 1e4}) {
    const double v = eval_B({beta, 1}, 1, 2).value;
    CHECK(v < prev);
    CHECK(v >= 0);
    prev = v;
  }
}

TEST_CASE("majorant and crude bound") {
  const PhysicalParams p{1, 1};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.01, 10.0);
  for (int k = 0; k < 40; ++k) {
    const double x = U(rng), y = U(rng);
    const KernelSample s = eval_B(p, x, y);
    CHECK(s.value <= eval_majorant(p, x, y) + s.abs_error_estimate);
    const double mx = std::max(x, y), mn = std::min(x, y);
    const double crude = std::exp(0.5 * (x + y)) * 4 * (10 * mx * mx + mn * mn) / (15 * mx * mx * mx);
    CHECK(eval_crude_bound(p, x, y) == doctest::Approx(crude).epsilon(1e-14));
    CHECK(s.value <= crude + s.abs_error_estimate);
  }
  // q = 0 reduces to (44/15) e^x / x
  const double x = 1.7;
  CHECK(eval_majorant(p, x, x) == doctest::Approx(44.0 / 15.0 * std::exp(x) / x).epsilon(1e-14));
}

TEST_CASE("antidiagonal monotonicity") {
  const PhysicalParams p{1, 1};
  const MonotonicityReport r = verify_antidiagonal_monotonicity(p, {{1, 2}, {2, 1}, {0.3, 4}, {6, 5.5}});
  CHECK(r.samples == 4);
  CHECK(r.ok());
  CHECK_THROWS_AS(verify_antidiagonal_monotonicity(p, {{1, 2}}, 1e-10, 0.5), StepTooLarge);
}

TEST_CASE("scaling round trip") {
  const PhysicalParams p{7.5, 1};
  const ScaledPoint s = scale_to_dimensionless(p, 0.3, 0.2, 1.1);
  CHECK(s.tau == doctest::Approx(0.3 * 7.5 * 7.5 * 7.5));
  CHECK(s.x == doctest::Approx(1.5));
  CHECK(s.u == doctest::Approx(1.5 * 1.5 * 1.1));
  const PhysicalPoint b = scale_to_physical(p, s.tau, s.x, s.u);
  CHECK(b.t == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(b.k == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(b.f == doctest::Approx(1.1).epsilon(1e-15));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(eval_B({-1, 1}, 1, 2), ValidationError);
  CHECK_THROWS_AS(eval_B({1, 1}, 0, 2), DomainError);
  CHECK_THROWS_AS(eval_B({1, 1}, 1, 2, 1e-2), DomainError);
}

TEST_CASE("kernel table: OpenMP equals serial bitwise") {
  const PhysicalParams p{1, 1};
  std::vector<double> nodes;
  for (int i = 0; i < 24; ++i) nodes.push_back(0.05 * std::pow(1.3, i));
  const auto a = kernel_table(p, nodes, 1e-10);
  const auto b = kernel_table_serial(p, nodes, 1e-10);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].value == b[k].value);
    CHECK(a[k].abs_error_estimate == b[k].abs_error_estimate);
  }
}

TEST_CASE("Dirac concentration ratio approaches one") {
  const auto rows = diagonal_concentration_check({1, 1}, bump_test_function(), {1e2, 1e3});
  REQUIRE(rows.size() == 2);
  CHECK(std::abs(rows[1].ratio - 1) < std::abs(rows[0].ratio - 1));
}
