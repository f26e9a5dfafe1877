#include "addreg/marginal.hpp"

#include "addreg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace addreg {

AxisDensity::AxisDensity(std::string name,
                         std::function<double(double)> pdf,
                         Interval support)
  : name_(std::move(name))
  , pdf_(std::move(pdf))
  , support_(support)
{
  if (!(support_.lo < support_.hi))
    throw std::invalid_argument("integration density support must be non-degenerate");
  const QuadratureRule rule = gauss_legendre(support_.lo, support_.hi, 64);
  const double mass = integrate_1d(rule, pdf_);
  if (std::abs(mass - 1.0) > 1e-8)
    throw std::invalid_argument("integration density '" + name_ +
                                "' does not integrate to one");
  for (int i = 0; i <= 1024; ++i) {
    const double x = support_.lo + support_.width() * i / 1024.0;
    if (pdf_(x) < 0.0)
      throw std::invalid_argument("integration density '" + name_ + "' is negative");
  }
}

AxisDensity
polynomial_bump(Interval support, int smoothness)
{
  if (smoothness < 0)
    throw std::invalid_argument("polynomial_bump: smoothness must be >= 0");
  const int p = smoothness + 1;
  // int_{-1}^{1} (1 - t^2)^p dt = 2^{2p+1} (p!)^2 / (2p+1)!
  const double mass_t = std::exp((2.0 * p + 1.0) * std::log(2.0) +
                                 2.0 * std::lgamma(p + 1.0) - std::lgamma(2.0 * p + 2.0));
  const double mid = 0.5 * (support.lo + support.hi);
  const double half = 0.5 * support.width();
  const double c = 1.0 / (mass_t * half);
  auto pdf = [=](double x) {
    const double t = (x - mid) / half;
    const double s = 1.0 - t * t;
    if (s <= 0.0)
      return 0.0;
    double r = c;
    for (int e = 0; e < p; ++e)
      r *= s;
    return r;
  };
  return AxisDensity("bump" + std::to_string(smoothness), pdf, support);
}

IntegrationDensity::IntegrationDensity(std::vector<AxisDensity> axes)
  : axes_(std::move(axes))
{
  if (axes_.empty())
    throw std::invalid_argument("integration density needs at least one axis");
}

double
IntegrationDensity::product(std::span<const double> x) const
{
  double r = 1.0;
  for (std::size_t l = 0; l < axes_.size() && r != 0.0; ++l)
    r *= axes_[l](x[l]);
  return r;
}

double
IntegrationDensity::product_except(std::span<const double> x, std::size_t l) const
{
  double r = 1.0;
  for (std::size_t j = 0; j < axes_.size() && r != 0.0; ++j)
    if (j != l)
      r *= axes_[j](x[j]);
  return r;
}

void
IntegrationDensity::check_inside(const EvaluationDomain& domain) const
{
  if (domain.dim() != axes_.size())
    throw std::invalid_argument("integration density dimension does not match domain");
  for (std::size_t l = 0; l < axes_.size(); ++l) {
    const auto& c = axes_[l].support();
    const auto& i = domain.inner(l);
    if (!(i.lo < c.lo && c.hi < i.hi))
      throw std::invalid_argument("support of q_" + std::to_string(l + 1) +
                                  " must lie strictly inside I_" + std::to_string(l + 1));
  }
}

double
ComponentCurve::interpolate(double x) const
{
  if (grid.empty() || x < grid.front() || x > grid.back())
    throw std::out_of_range("component curve evaluated outside its grid");
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  if (it == grid.end())
    return values.back();
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  const std::size_t lo = hi - 1;
  const double t = (x - grid[lo]) / (grid[hi] - grid[lo]);
  return values[lo] + t * (values[hi] - values[lo]);
}

std::string
to_string(ConstantSource source)
{
  return source == ConstantSource::plug_in ? "plug_in" : "single_bandwidth";
}

double
AdditiveFit::evaluate(std::span<const double> x) const
{
  if (x.size() != components.size())
    throw std::invalid_argument("additive fit evaluated with wrong dimension");
  double r = mu_n;
  for (std::size_t l = 0; l < components.size(); ++l)
    r += components[l].interpolate(x[l]);
  return r;
}

FactorizedMarginal::FactorizedMarginal(const RegressionField& field,
                                       const IntegrationDensity& q,
                                       int quadrature_nodes)
  : field_(&field)
  , d_(field.d())
{
  if (q.dim() != d_)
    throw std::invalid_argument("integration density dimension does not match field");
  const QuadratureRule& ref = gauss_legendre_reference(quadrature_nodes);
  const std::size_t n = field.n();
  const auto h = field.bandwidths();
  weights_.resize(n * d_);
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = field.point(i);
    for (std::size_t j = 0; j < d_; ++j) {
      const KernelSpec& k = field.kernel().factor(j);
      const Interval& c = q.axis(j).support();
      const double lo = std::max(c.lo, xi[j] - h[j] * k.half_support());
      const double hi = std::min(c.hi, xi[j] + h[j] * k.half_support());
      double w = 0.0;
      if (lo < hi) {
        const AxisDensity& qj = q.axis(j);
        w = integrate_mapped(ref, lo, hi, [&](double x) {
          return k.evaluate((x - xi[j]) / h[j]) / h[j] * qj(x);
        });
      }
      weights_[i * d_ + j] = w;
    }
  }
  constant_ = 0.0;
  const auto c = field.coefficients();
  for (std::size_t i = 0; i < n; ++i) {
    double p = c[i];
    for (std::size_t j = 0; j < d_; ++j)
      p *= weights_[i * d_ + j];
    constant_ += p;
  }
}

ComponentCurve
FactorizedMarginal::component(std::size_t l, std::span<const double> grid) const
{
  if (l >= d_)
    throw std::invalid_argument("component axis out of range");
  const RegressionField& field = *field_;
  const std::size_t n = field.n();
  const auto c = field.coefficients();
  const double h = field.bandwidths()[l];
  const KernelSpec& k = field.kernel().factor(l);

  // c_i prod_{j != l} w_ij, with the samples ordered by their l-th coordinate
  std::vector<std::pair<double, double>> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double p = c[i];
    for (std::size_t j = 0; j < d_; ++j)
      if (j != l)
        p *= weights_[i * d_ + j];
    if (p != 0.0)
      rows.emplace_back(field.point(i)[l], p);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  ComponentCurve curve;
  curve.axis = l;
  curve.grid.assign(grid.begin(), grid.end());
  curve.values.resize(grid.size());
  curve.centering = constant_;
  const double reach = h * k.half_support();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    auto it = std::upper_bound(rows.begin(), rows.end(), x - reach,
                               [](double v, const auto& r) { return v < r.first; });
    double sum = 0.0;
    for (; it != rows.end() && it->first < x + reach; ++it)
      sum += it->second * k.evaluate((x - it->first) / h) / h;
    curve.values[g] = sum - constant_;
  }
  return curve;
}

namespace {

void
check_grid(std::size_t l, std::span<const double> grid, const EvaluationDomain& domain)
{
  if (l >= domain.dim())
    throw std::invalid_argument("component axis out of range");
  const Interval& iv = domain.inner(l);
  for (double x : grid)
    if (!iv.contains(x))
      throw std::invalid_argument("grid point outside I_" + std::to_string(l + 1));
}

void
check_kind(const RegressionField& regression)
{
  if (regression.kind() == RegressionKind::single_bandwidth)
    throw std::invalid_argument(
      "component estimates integrate the product-kernel field, not the single-bandwidth one");
}

// Composite rule on C_j split at every kernel-support edge of the field.
QuadratureRule
panel_rule(const RegressionField& field,
           const IntegrationDensity& q,
           std::size_t j,
           int panel_nodes)
{
  const Interval& c = q.axis(j).support();
  const double reach = field.bandwidths()[j] * field.kernel().factor(j).half_support();
  std::vector<double> breaks{ c.lo, c.hi };
  for (std::size_t i = 0; i < field.n(); ++i) {
    const double x = field.point(i)[j];
    for (double b : { x - reach, x, x + reach })
      if (b > c.lo && b < c.hi)
        breaks.push_back(b);
  }
  return composite_gauss_legendre(breaks, panel_nodes);
}

double
tensor_constant(const RegressionField& field,
                const IntegrationDensity& q,
                const MarginalOptions& options)
{
  std::vector<QuadratureRule> axes;
  for (std::size_t j = 0; j < field.d(); ++j)
    axes.push_back(panel_rule(field, q, j, options.panel_nodes));
  const TensorRule rule(std::move(axes));
  return integrate_tensor(rule, [&](std::span<const double> z) {
    const double qz = q.product(z);
    return qz == 0.0 ? 0.0 : field.evaluate(z) * qz;
  });
}

} // namespace

ComponentCurve
component_estimate(std::size_t l,
                   std::span<const double> grid,
                   const RegressionField& regression,
                   const IntegrationDensity& q,
                   const EvaluationDomain& domain,
                   const MarginalOptions& options)
{
  check_kind(regression);
  check_grid(l, grid, domain);
  if (q.dim() != regression.d())
    throw std::invalid_argument("integration density dimension does not match field");

  if (options.method == IntegrationMethod::factorized) {
    const FactorizedMarginal marginal(regression, q, options.quadrature_nodes);
    return marginal.component(l, grid);
  }

  const std::size_t d = regression.d();
  if (d > 4)
    throw std::invalid_argument("tensor integration is limited to d <= 4");
  const double mu = tensor_constant(regression, q, options);

  std::vector<QuadratureRule> axes;
  std::vector<std::size_t> map;
  for (std::size_t j = 0; j < d; ++j)
    if (j != l) {
      axes.push_back(panel_rule(regression, q, j, options.panel_nodes));
      map.push_back(j);
    }
  const TensorRule rule(std::move(axes));

  ComponentCurve curve;
  curve.axis = l;
  curve.grid.assign(grid.begin(), grid.end());
  curve.values.resize(grid.size());
  curve.centering = mu;
  std::vector<double> x(d);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    x[l] = grid[g];
    const double inner = integrate_tensor(rule, [&](std::span<const double> z) {
      for (std::size_t a = 0; a < map.size(); ++a)
        x[map[a]] = z[a];
      const double qz = q.product_except(x, l);
      return qz == 0.0 ? 0.0 : regression.evaluate(x) * qz;
    });
    curve.values[g] = inner - mu;
  }
  return curve;
}

double
additive_constant(const RegressionField& regression,
                  const IntegrationDensity& q,
                  const MarginalOptions& options)
{
  if (q.dim() != regression.d())
    throw std::invalid_argument("integration density dimension does not match field");
  if (options.method == IntegrationMethod::tensor) {
    if (regression.d() > 4)
      throw std::invalid_argument("tensor integration is limited to d <= 4");
    return tensor_constant(regression, q, options);
  }
  return FactorizedMarginal(regression, q, options.quadrature_nodes).constant();
}

AdditiveFit
additive_fit(const Sample& sample,
             const DensityField& density,
             const IntegrationDensity& q,
             const ProductKernel& kernels,
             const ProductKernel& kernel_K,
             const BandwidthPlan& plan,
             const EvaluationDomain& domain,
             const std::vector<std::vector<double>>& grids,
             ConstantSource source,
             const MarginalOptions& options)
{
  if (grids.size() != sample.d())
    throw std::invalid_argument("additive_fit: one grid per axis required");
  const RegressionField plug_in = fit_plug_in(sample, density, kernels, plan);
  AdditiveFit fit;
  fit.constant_source = source;
  if (options.method == IntegrationMethod::factorized) {
    const FactorizedMarginal marginal(plug_in, q, options.quadrature_nodes);
    for (std::size_t l = 0; l < sample.d(); ++l) {
      check_grid(l, grids[l], domain);
      fit.components.push_back(marginal.component(l, grids[l]));
    }
  } else {
    for (std::size_t l = 0; l < sample.d(); ++l)
      fit.components.push_back(
        component_estimate(l, grids[l], plug_in, q, domain, options));
  }
  if (source == ConstantSource::plug_in) {
    fit.mu_n = fit.components.front().centering;
  } else {
    const RegressionField single = fit_single_bandwidth(sample, density, kernel_K, plan);
    fit.mu_n = additive_constant(single, q, options);
  }
  return fit;
}

ComponentCurve
true_component(std::size_t l,
               std::span<const double> grid,
               const std::function<double(double)>& m_l,
               const AxisDensity& q_l,
               int quadrature_nodes)
{
  const QuadratureRule rule =
    gauss_legendre(q_l.support().lo, q_l.support().hi, quadrature_nodes);
  const double centering = integrate_1d(rule, [&](double z) { return m_l(z) * q_l(z); });
  ComponentCurve curve;
  curve.axis = l;
  curve.grid.assign(grid.begin(), grid.end());
  curve.values.reserve(grid.size());
  for (double x : grid)
    curve.values.push_back(m_l(x) - centering);
  curve.centering = centering;
  return curve;
}

} // namespace addreg
