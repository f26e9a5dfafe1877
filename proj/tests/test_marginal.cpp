#include "addreg/design.hpp"
#include "addreg/marginal.hpp"
#include "addreg/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace addreg;

namespace {

struct Setup
{
  Sample sample;
  IntegrationDensity q;
  EvaluationDomain domain;
  ProductKernel kernels;
  BandwidthPlan plan;
};

Setup
random_setup(std::size_t n, std::size_t d, std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n * d), y(n);
  for (auto& v : x)
    v = u(gen);
  for (auto& v : y)
    v = 4.0 * u(gen) - 2.0;
  std::vector<AxisDensity> axes;
  for (std::size_t l = 0; l < d; ++l)
    axes.push_back(polynomial_bump({ 0.15, 0.85 }, 2));
  BandwidthPlan plan;
  plan.h_axes.assign(d, 0.2);
  plan.ell = 0.2;
  plan.h_single = 0.1;
  plan.n = n;
  plan.rate = {};
  return { Sample(d, std::move(x), std::move(y)), IntegrationDensity(std::move(axes)),
           EvaluationDomain::cube(d, { 0.1, 0.9 }, { 0.0, 1.0 }),
           ProductKernel::uniform(epanechnikov(), d), plan };
}

DensityField
uniform_density(std::size_t d)
{
  return analytic_density(d, [](std::span<const double>) { return 1.0; });
}

} // namespace

TEST_CASE("bump densities")
{
  for (int s : { 0, 1, 2, 4 }) {
    const AxisDensity q = polynomial_bump({ 0.2, 0.7 }, s);
    CHECK(q.name() == "bump" + std::to_string(s));
    const double mass =
      integrate_1d(gauss_legendre(0.2, 0.7, 32), [&](double x) { return q(x); });
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q(0.1) == 0.0);
    CHECK(q(0.2) < 1e-12);
    CHECK(q(0.45) > 0.0);
  }
  CHECK_THROWS_AS(polynomial_bump({ 0.2, 0.7 }, -1), std::invalid_argument);
  CHECK_THROWS_AS(AxisDensity("half", [](double) { return 0.5; }, { 0.0, 1.0 }),
                  std::invalid_argument);
  CHECK_THROWS_AS(AxisDensity("neg", [](double x) { return 4.0 * x - 1.0; }, { 0.0, 1.0 }),
                  std::invalid_argument);
}

TEST_CASE("integration support must sit inside I")
{
  const IntegrationDensity q({ polynomial_bump({ 0.05, 0.85 }, 2), polynomial_bump({ 0.2, 0.8 }, 2) });
  CHECK_THROWS_AS(q.check_inside(EvaluationDomain::cube(2, { 0.1, 0.9 }, { 0.0, 1.0 })),
                  std::invalid_argument);
  const IntegrationDensity ok({ polynomial_bump({ 0.15, 0.85 }, 2), polynomial_bump({ 0.2, 0.8 }, 2) });
  CHECK_NOTHROW(ok.check_inside(EvaluationDomain::cube(2, { 0.1, 0.9 }, { 0.0, 1.0 })));
  CHECK_THROWS(ok.check_inside(EvaluationDomain::cube(3, { 0.1, 0.9 }, { 0.0, 1.0 })));
}

TEST_CASE("component integrates to zero against q_l")
{
  for (std::size_t d : { 2u, 3u }) {
    Setup s = random_setup(40, d, 11 + d);
    const RegressionField field = fit_oracle(s.sample, uniform_density(d), s.kernels, s.plan);
    const FactorizedMarginal marginal(field, s.q, 32);
    for (std::size_t l = 0; l < d; ++l) {
      std::vector<double> breaks{ 0.15, 0.85 };
      for (std::size_t i = 0; i < s.sample.n(); ++i)
        for (double b : { s.sample.x(i, l) - 0.2, s.sample.x(i, l), s.sample.x(i, l) + 0.2 })
          if (b > 0.15 && b < 0.85)
            breaks.push_back(b);
      const QuadratureRule rule = composite_gauss_legendre(breaks, 8);
      const std::vector<double> nodes(rule.nodes().begin(), rule.nodes().end());
      const ComponentCurve c = marginal.component(l, nodes);
      double total = 0.0;
      for (std::size_t g = 0; g < nodes.size(); ++g)
        total += rule.weights()[g] * c.values[g] * s.q.axis(l)(nodes[g]);
      CHECK(std::abs(total) < 1e-10);
    }
  }
}

TEST_CASE("factorized and tensor integration agree")
{
  for (std::size_t d : { 2u, 3u }) {
    Setup s = random_setup(d == 2 ? 30 : 12, d, 21 + d);
    const RegressionField field = fit_oracle(s.sample, uniform_density(d), s.kernels, s.plan);
    const std::vector<double> grid = linear_grid({ 0.1, 0.9 }, 9);
    MarginalOptions tensor;
    tensor.method = IntegrationMethod::tensor;
    for (std::size_t l = 0; l < d; ++l) {
      const ComponentCurve a = component_estimate(l, grid, field, s.q, s.domain);
      const ComponentCurve b = component_estimate(l, grid, field, s.q, s.domain, tensor);
      CHECK(a.centering == doctest::Approx(b.centering).epsilon(1e-9));
      for (std::size_t g = 0; g < grid.size(); ++g)
        CHECK(std::abs(a.values[g] - b.values[g]) < 1e-6);
    }
    CHECK(additive_constant(field, s.q) ==
          doctest::Approx(additive_constant(field, s.q, tensor)).epsilon(1e-9));
  }
}

TEST_CASE("internal constant equals the plug-in constant")
{
  Setup s = random_setup(60, 2, 31);
  const DensityField f = uniform_density(2);
  const std::vector<std::vector<double>> grids(2, linear_grid({ 0.1, 0.9 }, 5));
  const ProductKernel K = ProductKernel::uniform(epanechnikov(), 2);
  const AdditiveFit fit =
    additive_fit(s.sample, f, s.q, s.kernels, K, s.plan, s.domain, grids, ConstantSource::plug_in);
  const RegressionField plug = fit_plug_in(s.sample, f, s.kernels, s.plan);
  CHECK(std::abs(fit.mu_n - additive_constant(plug, s.q)) < 1e-10);
  CHECK(fit.constant_source == ConstantSource::plug_in);

  const AdditiveFit single = additive_fit(s.sample, f, s.q, s.kernels, K, s.plan, s.domain, grids);
  const RegressionField sb = fit_single_bandwidth(s.sample, f, K, s.plan);
  CHECK(std::abs(single.mu_n - additive_constant(sb, s.q)) < 1e-10);
  // components do not depend on the constant source
  CHECK(single.components[1].values == fit.components[1].values);
  const std::vector<double> x{ 0.3, 0.7 };
  CHECK(single.evaluate(x) ==
        doctest::Approx(single.components[0].interpolate(0.3) +
                        single.components[1].interpolate(0.7) + single.mu_n));
}

TEST_CASE("shifting responses moves only the constant")
{
  Setup s = random_setup(50, 2, 41);
  // the field is linear in Y, so a shift adds 3x the all-ones fit
  const DensityField f = uniform_density(2);
  std::vector<double> y(s.sample.y().begin(), s.sample.y().end());
  for (auto& v : y)
    v += 3.0;
  const Sample shifted = s.sample.with_responses(y);
  const std::vector<double> grid = linear_grid({ 0.1, 0.9 }, 7);
  const RegressionField a = fit_oracle(s.sample, f, s.kernels, s.plan);
  const RegressionField b = fit_oracle(shifted, f, s.kernels, s.plan);
  const Sample ones = s.sample.with_responses(std::vector<double>(50, 1.0));
  const RegressionField c = fit_oracle(ones, f, s.kernels, s.plan);
  for (std::size_t l = 0; l < 2; ++l) {
    const ComponentCurve ea = component_estimate(l, grid, a, s.q, s.domain);
    const ComponentCurve eb = component_estimate(l, grid, b, s.q, s.domain);
    const ComponentCurve ec = component_estimate(l, grid, c, s.q, s.domain);
    CHECK(eb.centering == doctest::Approx(ea.centering + 3.0 * ec.centering));
    for (std::size_t g = 0; g < grid.size(); ++g)
      CHECK(eb.values[g] == doctest::Approx(ea.values[g] + 3.0 * ec.values[g]).epsilon(1e-10));
  }
}

TEST_CASE("zero responses give zero components")
{
  Setup s = random_setup(30, 3, 51);
  const Sample z = s.sample.with_responses(std::vector<double>(30, 0.0));
  const RegressionField field = fit_oracle(z, uniform_density(3), s.kernels, s.plan);
  const std::vector<double> grid = linear_grid({ 0.1, 0.9 }, 5);
  for (std::size_t l = 0; l < 3; ++l) {
    const ComponentCurve c = component_estimate(l, grid, field, s.q, s.domain);
    for (double v : c.values)
      CHECK(v == 0.0);
    CHECK(c.centering == 0.0);
  }
}

TEST_CASE("estimate for a purely additive truth tracks the true components")
{
  const SimDesign design = make_design("reference_zero_noise");
  const Sample s = design.generate(20000, 77);
  const IntegrationDensity q = design.integration_density();
  const DensityField truth =
    analytic_density(2, [&](std::span<const double> p) { return design.f(p); });
  BandwidthPlan plan = make_default_plan(20000, 2, 2, {}, false);
  const RegressionField field =
    fit_oracle(s, truth, ProductKernel::uniform(epanechnikov(), 2), plan);
  const std::vector<double> grid = linear_grid({ 0.2, 0.8 }, 13);
  for (std::size_t l = 0; l < 2; ++l) {
    const ComponentCurve est = component_estimate(l, grid, field, q, design.domain());
    const ComponentCurve tru = true_component(l, grid, design.component(l), q.axis(l));
    double worst = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g)
      worst = std::max(worst, std::abs(est.values[g] - tru.values[g]));
    CHECK(worst < 0.15);
  }
}

TEST_CASE("true component centering")
{
  const AxisDensity q = polynomial_bump({ 0.15, 0.85 }, 2);
  const std::vector<double> grid{ 0.2, 0.5, 0.8 };
  const ComponentCurve c =
    true_component(0, grid, [](double x) { return std::sin(2 * std::numbers::pi * x); }, q);
  CHECK(std::abs(c.centering) < 1e-10);
  CHECK(c.values[1] == doctest::Approx(0.0).scale(1.0));

  // when q_l is the covariate density the centering is E m_l(X_l)
  const AxisDensity uniform("uniform", [](double) { return 1.0; }, { 0.0, 1.0 });
  const ComponentCurve sq = true_component(1, grid, [](double x) { return x * x - 1.0 / 3.0; },
                                           uniform);
  CHECK(std::abs(sq.centering) < 1e-12);
  CHECK(sq.values[0] == doctest::Approx(0.04 - 1.0 / 3.0));
}

TEST_CASE("component grids and interpolation")
{
  Setup s = random_setup(20, 2, 61);
  const RegressionField field = fit_oracle(s.sample, uniform_density(2), s.kernels, s.plan);
  const std::vector<double> outside{ 0.05, 0.5 };
  CHECK_THROWS_AS(component_estimate(0, outside, field, s.q, s.domain), std::invalid_argument);
  CHECK_THROWS_AS(component_estimate(2, std::vector<double>{ 0.5 }, field, s.q, s.domain),
                  std::invalid_argument);
  const RegressionField single =
    fit_single_bandwidth(s.sample, uniform_density(2), s.kernels, s.plan);
  CHECK_THROWS_AS(component_estimate(0, std::vector<double>{ 0.5 }, single, s.q, s.domain),
                  std::invalid_argument);

  ComponentCurve c;
  c.grid = { 0.0, 1.0, 2.0 };
  c.values = { 0.0, 2.0, 0.0 };
  CHECK(c.interpolate(0.5) == 1.0);
  CHECK(c.interpolate(2.0) == 0.0);
  CHECK_THROWS_AS(c.interpolate(2.5), std::out_of_range);
}
