#include "addreg/design.hpp"

#include "addreg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace addreg {

double
AxisLaw::quantile(double u) const noexcept
{
  // F(x) = (1 - t) x + t x^2
  if (tilt == 0.0)
    return u;
  const double a = tilt, b = 1.0 - tilt;
  return 2.0 * u / (b + std::sqrt(b * b + 4.0 * a * u));
}

SimDesign::SimDesign(std::string name,
                     double mu,
                     std::vector<std::function<double(double)>> components,
                     std::vector<AxisLaw> laws,
                     double noise_halfwidth,
                     Interval inner,
                     Interval q_support)
  : name_(std::move(name))
  , mu_(mu)
  , components_(std::move(components))
  , laws_(std::move(laws))
  , noise_halfwidth_(noise_halfwidth)
  , inner_(inner)
  , q_support_(q_support)
{
  if (components_.size() < 2)
    throw std::invalid_argument("design dimension must be at least 2");
  if (laws_.size() != components_.size())
    throw std::invalid_argument("one covariate law per component required");
  if (noise_halfwidth_ < 0.0)
    throw std::invalid_argument("noise half-width must be non-negative");
  if (!(0.0 < inner_.lo && inner_.lo < q_support_.lo && q_support_.hi < inner_.hi &&
        inner_.hi < 1.0))
    throw std::invalid_argument("design requires 0 < a < C < c < 1");

  const QuadratureRule rule = gauss_legendre(0.0, 1.0, 32);
  double sup_m = std::abs(mu_);
  for (std::size_t l = 0; l < laws_.size(); ++l) {
    const AxisLaw& law = laws_[l];
    if (!(std::abs(law.tilt) < 1.0))
      throw std::invalid_argument("covariate tilt must lie in (-1, 1)");
    const double mass = integrate_1d(rule, [&](double x) { return law.pdf(x); });
    if (std::abs(mass - 1.0) > 1e-12)
      throw std::invalid_argument("covariate law does not integrate to one");
    double sup_l = 0.0;
    for (int i = 0; i <= 2048; ++i) {
      const double x = i / 2048.0;
      if (law.pdf(x) < law.lower_bound() - 1e-15)
        throw std::invalid_argument("covariate density below its bound");
      sup_l = std::max(sup_l, std::abs(components_[l](x)));
    }
    sup_m += sup_l;
  }
  response_bound_ = sup_m + noise_halfwidth_;
}

double
SimDesign::m(std::span<const double> x) const
{
  double r = mu_;
  for (std::size_t l = 0; l < components_.size(); ++l)
    r += components_[l](x[l]);
  return r;
}

double
SimDesign::f(std::span<const double> x) const
{
  double r = 1.0;
  for (std::size_t l = 0; l < laws_.size(); ++l)
    r *= laws_[l].pdf(x[l]);
  return r;
}

double
SimDesign::f_conditional(std::span<const double> u, std::size_t l) const
{
  double r = 1.0;
  for (std::size_t j = 0; j < laws_.size(); ++j)
    if (j != l)
      r *= laws_[j].pdf(u[j]);
  return r;
}

double
SimDesign::lower_bound() const noexcept
{
  double b = 1.0;
  for (const auto& law : laws_)
    b *= law.lower_bound();
  return b;
}

EvaluationDomain
SimDesign::domain() const
{
  return EvaluationDomain::cube(d(), inner_, Interval{ 0.0, 1.0 });
}

IntegrationDensity
SimDesign::integration_density(int smoothness) const
{
  std::vector<AxisDensity> axes;
  for (std::size_t l = 0; l < d(); ++l)
    axes.push_back(polynomial_bump(q_support_, smoothness));
  return IntegrationDensity(std::move(axes));
}

Sample
SimDesign::generate(std::size_t n, Philox4x32& covariates, Philox4x32& noise) const
{
  if (n == 0)
    throw std::invalid_argument("sample size must be positive");
  const std::size_t dd = d();
  std::vector<double> x(n * dd);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < dd; ++l)
      x[i * dd + l] = laws_[l].quantile(covariates.uniform());
    const double eps =
      noise_halfwidth_ == 0.0 ? 0.0 : noise.uniform(-noise_halfwidth_, noise_halfwidth_);
    y[i] = m(std::span<const double>(x.data() + i * dd, dd)) + eps;
  }
  return Sample(dd, std::move(x), std::move(y));
}

Sample
SimDesign::generate(std::size_t n, std::uint64_t seed) const
{
  Philox4x32 cov = make_stream(seed, 0, 0, StreamPurpose::covariates);
  Philox4x32 eps = make_stream(seed, 0, 0, StreamPurpose::noise);
  return generate(n, cov, eps);
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double
sine(double x)
{
  return std::sin(kTwoPi * x);
}

double
quadratic(double x)
{
  return x * x - 1.0 / 3.0;
}

double
cosine(double x)
{
  return std::cos(std::numbers::pi * x);
}

double
zero(double)
{
  return 0.0;
}

const Interval kInner{ 0.1, 0.9 };
const Interval kSupport{ 0.15, 0.85 };

} // namespace

SimDesign
make_design(const std::string& name)
{
  if (name == "reference")
    return SimDesign(name, 1.0, { sine, quadratic }, { {}, {} }, 0.5, kInner, kSupport);
  if (name == "reference_zero_noise")
    return SimDesign(name, 1.0, { sine, quadratic }, { {}, {} }, 0.0, kInner, kSupport);
  if (name == "constant")
    return SimDesign(name, 1.0, { zero, zero }, { {}, {} }, 0.0, kInner, kSupport);
  if (name == "polynomial_x")
    return SimDesign(name, 1.0, { sine, quadratic }, { { 0.3 }, { -0.2 } }, 0.5, kInner,
                     kSupport);
  if (name == "additive3")
    return SimDesign(name, 1.0, { sine, quadratic, cosine }, { {}, {}, {} }, 0.5, kInner,
                     kSupport);
  throw std::invalid_argument("unknown design '" + name + "'");
}

std::vector<std::string>
design_names()
{
  return { "reference", "reference_zero_noise", "constant", "polynomial_x", "additive3" };
}

} // namespace addreg
