#include "addreg/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

using namespace addreg;

TEST_CASE("one-node rule is the midpoint rule")
{
  const QuadratureRule r = gauss_legendre(-1.0, 1.0, 1);
  REQUIRE(r.size() == 1);
  CHECK(r.nodes()[0] == doctest::Approx(0.0));
  CHECK(r.weights()[0] == doctest::Approx(2.0));
}

TEST_CASE("analytic antiderivatives")
{
  const double a = integrate_1d(gauss_legendre(-1, 1, 2), [](double u) { return u * u; });
  CHECK(std::abs(a - 2.0 / 3.0) < 1e-15);
  const double b = integrate_1d(gauss_legendre(0, 1, 3), [](double u) { return std::pow(u, 5); });
  CHECK(std::abs(b - 1.0 / 6.0) < 1e-15);
  CHECK(integrate_1d(gauss_legendre(0, 2, 4), [](double) { return 1.0; }) ==
        doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("rule invariants")
{
  for (int n : { 1, 2, 5, 16, 32, 64 }) {
    const QuadratureRule r = gauss_legendre(0.3, 2.1, n);
    double total = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(r.weights()[i] > 0.0);
      CHECK(r.nodes()[i] > 0.3);
      CHECK(r.nodes()[i] < 2.1);
      if (i > 0)
        CHECK(r.nodes()[i] > r.nodes()[i - 1]);
      total += r.weights()[i];
    }
    CHECK(std::abs(total - 1.8) < 1e-12 * 1.8);
  }
}

TEST_CASE("degenerate intervals are rejected")
{
  CHECK_THROWS_AS(gauss_legendre(1.0, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre(2.0, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(gauss_legendre(0.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("exactness degree over random polynomials")
{
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int n = 1; n <= 12; ++n) {
    const int degree = 2 * n - 1;
    std::vector<double> c(static_cast<std::size_t>(degree) + 1);
    for (auto& v : c)
      v = coef(gen);
    auto p = [&](double x) {
      double r = 0.0;
      for (std::size_t j = c.size(); j-- > 0;)
        r = r * x + c[j];
      return r;
    };
    double exact = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
      exact += c[j] * (std::pow(1.5, j + 1) - std::pow(-0.5, j + 1)) / static_cast<double>(j + 1);
    CHECK(integrate_1d(gauss_legendre(-0.5, 1.5, n), p) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("odd integrands vanish on symmetric intervals")
{
  const QuadratureRule r = gauss_legendre(-2.0, 2.0, 17);
  CHECK(std::abs(integrate_1d(r, [](double u) { return std::sin(u) * std::exp(u * u / 4); })) <
        1e-12);
  CHECK(integrate_1d(r, [](double u) { return u * u * u; }) == 0.0);
}

TEST_CASE("Epanechnikov mass")
{
  const double v =
    integrate_1d(gauss_legendre(-1, 1, 8), [](double u) { return 0.75 * (1 - u * u); });
  CHECK(std::abs(v - 1.0) < 1e-10);
}

TEST_CASE("non-finite values carry the node")
{
  const QuadratureRule r = gauss_legendre(0.0, 1.0, 4);
  try {
    integrate_1d(r, [](double u) {
      return u > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    });
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    REQUIRE(e.node().size() == 1);
    CHECK(e.node()[0] > 0.5);
    CHECK(std::isnan(e.value()));
  }
}

TEST_CASE("mapped integration matches a fresh rule")
{
  const QuadratureRule& ref = gauss_legendre_reference(12);
  auto f = [](double x) { return std::exp(-x) * std::cos(3 * x); };
  const double a = integrate_mapped(ref, 0.2, 1.7, f);
  const double b = integrate_1d(gauss_legendre(0.2, 1.7, 12), f);
  CHECK(a == doctest::Approx(b).epsilon(1e-14));
}

TEST_CASE("composite rule splits at breakpoints")
{
  const std::vector<double> breaks{ 0.0, 0.5, 0.25, 1.0 };
  const QuadratureRule r = composite_gauss_legendre(breaks, 3);
  CHECK(r.size() == 9);
  CHECK(r.lo() == 0.0);
  CHECK(r.hi() == 1.0);
  // |x - 0.25| has a kink; a split rule integrates it exactly.
  const double v = integrate_1d(r, [](double x) { return std::abs(x - 0.25); });
  CHECK(v == doctest::Approx(0.25 * 0.25 / 2 + 0.75 * 0.75 / 2).epsilon(1e-14));
}

TEST_CASE("tensor rule")
{
  SUBCASE("separable product")
  {
    const TensorRule t({ gauss_legendre(0, 1, 4), gauss_legendre(0, 1, 4) });
    CHECK(t.size() == 16);
    CHECK(integrate_tensor(t, [](std::span<const double> x) { return x[0] * x[1]; }) ==
          doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("box volume")
  {
    const TensorRule t({ gauss_legendre(0, 1, 3), gauss_legendre(0, 2, 5) });
    CHECK(integrate_tensor(t, [](std::span<const double>) { return 1.0; }) ==
          doctest::Approx(2.0).epsilon(1e-14));
  }
  SUBCASE("factorization to 1e-12")
  {
    auto f = [](double x) { return std::exp(x); };
    auto g = [](double y) { return 1.0 / (1.0 + y * y); };
    auto h = [](double z) { return std::cos(z); };
    const QuadratureRule a = gauss_legendre(0, 1, 10), b = gauss_legendre(-1, 2, 12),
                         c = gauss_legendre(0.5, 1.5, 9);
    const TensorRule t({ a, b, c });
    const double full = integrate_tensor(
      t, [&](std::span<const double> x) { return f(x[0]) * g(x[1]) * h(x[2]); });
    const double prod = integrate_1d(a, f) * integrate_1d(b, g) * integrate_1d(c, h);
    CHECK(std::abs(full - prod) < 1e-12 * std::abs(prod));
  }
  SUBCASE("linearity")
  {
    const TensorRule t({ gauss_legendre(0, 1, 6), gauss_legendre(0, 1, 6) });
    auto f = [](std::span<const double> x) { return std::sin(x[0] + x[1]); };
    auto g = [](std::span<const double> x) { return x[0] * x[0] * x[1]; };
    const double lhs =
      integrate_tensor(t, [&](std::span<const double> x) { return 2.0 * f(x) - 3.0 * g(x); });
    CHECK(lhs == doctest::Approx(2.0 * integrate_tensor(t, f) - 3.0 * integrate_tensor(t, g))
                   .epsilon(1e-14));
  }
}
