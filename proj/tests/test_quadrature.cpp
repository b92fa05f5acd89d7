#include <doctest.h>

#include <cmath>

#include "compton/errors.hpp"
#include "compton/quadrature.hpp"

using namespace compton;

TEST_CASE("smooth integrand") {
  const QuadResult r = integrate([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(r.abs_error <= 1e-10 * 2.0);
}

TEST_CASE("integrable endpoint singularity") {
  QuadOptions o;
  o.rel_tol = 1e-10;
  const QuadResult r = integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, o);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("breakpoints share one budget") {
  auto f = [](double x) { return std::abs(x - 0.3); };
  const QuadResult r = integrate(f, std::vector<double>{0.0, 0.3, 1.0});
  CHECK(r.value == doctest::Approx(0.045 + 0.245).epsilon(1e-14));
}

TEST_CASE("budget exhaustion raises NonConvergence") {
  QuadOptions o;
  o.max_panels = 3;
  o.rel_tol = 1e-14;
  CHECK_THROWS_AS(integrate([](double x) { return std::sin(1.0 / x); }, 1e-6, 1.0, o), NonConvergence);
}

TEST_CASE("Gauss-Legendre exactness") {
  for (int n : {1, 2, 5, 8, 12}) {
    const GaussRule g = gauss_legendre(n);
    REQUIRE(g.nodes.size() == static_cast<std::size_t>(n));
    const int deg = 2 * n - 1;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += g.weights[i] * std::pow(g.nodes[i], deg - 1);
    // Even power deg-1: integral over [-1,1] is 2/deg.
    CHECK(s == doctest::Approx(2.0 / deg).epsilon(1e-13));
  }
}
