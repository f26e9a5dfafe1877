#include "addreg/kernels.hpp"

#include "addreg/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace addreg {

namespace {

constexpr double kValidationTol = 1e-8;

double
polynomial_moment(std::span<const double> c, double s, int j)
{
  // deg(c) + j is integrated exactly by this many nodes
  const int nodes = (static_cast<int>(c.size()) + j) / 2 + 1;
  const QuadratureRule rule = gauss_legendre(-s, s, nodes);
  return integrate_1d(rule, [&](double u) {
    double r = c.back();
    for (std::size_t i = c.size() - 1; i-- > 0;)
      r = r * u + c[i];
    double p = 1.0;
    for (int e = 0; e < j; ++e)
      p *= u;
    return p * r;
  });
}

std::vector<double>
multiply(std::span<const double> a, std::span<const double> b)
{
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      out[i + j] += a[i] * b[j];
  return out;
}

} // namespace

KernelSpec::KernelSpec(std::string name,
                       std::vector<double> coefficients,
                       double half_support,
                       int order)
  : name_(std::move(name))
  , coeffs_(std::move(coefficients))
  , half_support_(half_support)
  , order_(order)
  , l2_norm_(0.0)
{
  if (coeffs_.empty())
    throw std::invalid_argument("kernel needs at least one coefficient");
  if (!(half_support_ > 0.0) || !std::isfinite(half_support_))
    throw std::invalid_argument("kernel half support must be positive");
  if (order_ < 1)
    throw std::invalid_argument("kernel order must be at least 1");
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0)
    coeffs_.pop_back();

  for (int j = 0; j < order_; ++j) {
    const double m = moment(j);
    const double target = j == 0 ? 1.0 : 0.0;
    if (std::abs(m - target) > kValidationTol)
      throw std::invalid_argument("kernel '" + name_ + "' fails moment " +
                                  std::to_string(j) + " for declared order " +
                                  std::to_string(order_));
  }
  auto sq = multiply(coeffs_, coeffs_);
  l2_norm_ = polynomial_moment(sq, half_support_, 0);
}

bool
KernelSpec::symmetric() const noexcept
{
  for (std::size_t j = 1; j < coeffs_.size(); j += 2)
    if (coeffs_[j] != 0.0)
      return false;
  return true;
}

double
KernelSpec::moment(int j) const
{
  if (j < 0)
    throw std::invalid_argument("moment index must be non-negative");
  return polynomial_moment(coeffs_, half_support_, j);
}

double
KernelSpec::sup_abs() const
{
  // dense scan of the polynomial piece; only used for bounds in reports
  double best = 0.0;
  const int steps = 4096;
  for (int i = 0; i <= steps; ++i) {
    const double u = -half_support_ + 2.0 * half_support_ * i / steps;
    double r = coeffs_.back();
    for (std::size_t k = coeffs_.size() - 1; k-- > 0;)
      r = r * u + coeffs_[k];
    best = std::max(best, std::abs(r));
  }
  return best;
}

KernelSpec
epanechnikov()
{
  return KernelSpec("epanechnikov", { 0.75, 0.0, -0.75 }, 1.0, 2);
}

KernelSpec
biweight()
{
  const double c = 15.0 / 16.0;
  return KernelSpec("biweight", { c, 0.0, -2.0 * c, 0.0, c }, 1.0, 2);
}

KernelSpec
triweight()
{
  const double c = 35.0 / 32.0;
  return KernelSpec(
    "triweight", { c, 0.0, -3.0 * c, 0.0, 3.0 * c, 0.0, -c }, 1.0, 2);
}

KernelSpec
raise_order(const KernelSpec& base, int target_order)
{
  if (target_order % 2 != 0)
    throw std::invalid_argument("raise_order: target order must be even");
  if (target_order < base.order())
    throw std::invalid_argument(
      "raise_order: target order below the base kernel order");
  if (target_order == base.order())
    return base;

  std::vector<double> p;
  if (base.symmetric()) {
    // P(u) = sum_i c_i u^{2i}; constraints on even moments 0, 2, ..., r-2
    const int m = target_order / 2;
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int row = 0; row < m; ++row)
      for (int col = 0; col < m; ++col)
        a(row, col) = base.moment(2 * row + 2 * col);
    rhs(0) = 1.0;
    const Eigen::VectorXd c = a.fullPivLu().solve(rhs);
    p.assign(2 * m - 1, 0.0);
    for (int i = 0; i < m; ++i)
      p[2 * i] = c(i);
  } else {
    const int m = target_order;
    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int row = 0; row < m; ++row)
      for (int col = 0; col < m; ++col)
        a(row, col) = base.moment(row + col);
    rhs(0) = 1.0;
    const Eigen::VectorXd c = a.fullPivLu().solve(rhs);
    p.assign(c.data(), c.data() + m);
  }
  auto coeffs = multiply(base.coefficients(), p);
  const std::string name =
    base.name().substr(0, base.name().find("_o")) + "_o" +
    std::to_string(target_order);
  return KernelSpec(name, std::move(coeffs), base.half_support(), target_order);
}

MomentReport
verify_order(const KernelSpec& kernel, int k, double tol)
{
  if (k < 1)
    throw std::invalid_argument("verify_order: k must be at least 1");
  MomentReport report{ k, tol, {}, true, std::nullopt };
  for (int j = 0; j <= k; ++j) {
    const double value = kernel.moment(j);
    const double target = j == 0 ? 1.0 : 0.0;
    const bool checked = j < k;
    const bool ok = !checked || std::abs(value - target) <= tol;
    report.moments.push_back({ { j }, value, target, ok });
    if (!ok && report.pass) {
      report.pass = false;
      report.first_failure = report.moments.size() - 1;
    }
  }
  return report;
}

double
scaled_eval(const KernelSpec& kernel, double center, double bandwidth, double x)
{
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("scaled_eval: bandwidth must be positive");
  return kernel.evaluate((center - x) / bandwidth) / bandwidth;
}

std::vector<std::string>
kernel_names()
{
  return { "epanechnikov", "biweight", "triweight" };
}

KernelSpec
make_kernel(const std::string& name, int order)
{
  KernelSpec base = [&] {
    if (name == "epanechnikov")
      return epanechnikov();
    if (name == "biweight")
      return biweight();
    if (name == "triweight")
      return triweight();
    throw std::invalid_argument("unknown kernel '" + name + "'");
  }();
  return raise_order(base, order);
}

ProductKernel::ProductKernel(std::vector<KernelSpec> factors)
  : factors_(std::move(factors))
{
  if (factors_.empty())
    throw std::invalid_argument("product kernel needs at least one factor");
}

ProductKernel
ProductKernel::uniform(const KernelSpec& factor, std::size_t d)
{
  return ProductKernel(std::vector<KernelSpec>(d, factor));
}

int
ProductKernel::order() const noexcept
{
  int k = factors_.front().order();
  for (const auto& f : factors_)
    k = std::min(k, f.order());
  return k;
}

double
ProductKernel::l2_norm() const noexcept
{
  double r = 1.0;
  for (const auto& f : factors_)
    r *= f.l2_norm();
  return r;
}

double
ProductKernel::moment(std::span<const int> alpha) const
{
  if (alpha.size() != factors_.size())
    throw std::invalid_argument("moment index dimension mismatch");
  double r = 1.0;
  for (std::size_t l = 0; l < factors_.size(); ++l)
    r *= factors_[l].moment(alpha[l]);
  return r;
}

MomentReport
verify_order(const ProductKernel& kernel, int k, double tol)
{
  if (k < 1)
    throw std::invalid_argument("verify_order: k must be at least 1");
  MomentReport report{ k, tol, {}, true, std::nullopt };
  const std::size_t d = kernel.dim();
  std::vector<int> alpha(d, 0);
  // enumerate multi-indices by total degree, then lexicographically
  std::function<void(std::size_t, int, int)> rec = [&](std::size_t l,
                                                        int remaining,
                                                        int total) {
    if (l + 1 == d) {
      alpha[l] = remaining;
      const double value = kernel.moment(alpha);
      const double target = total == 0 ? 1.0 : 0.0;
      const bool ok = total >= k || std::abs(value - target) <= tol;
      report.moments.push_back({ alpha, value, target, ok });
      if (!ok && report.pass) {
        report.pass = false;
        report.first_failure = report.moments.size() - 1;
      }
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      alpha[l] = a;
      rec(l + 1, remaining - a, total);
    }
  };
  for (int total = 0; total <= k; ++total)
    rec(0, total, total);
  return report;
}

} // namespace addreg
