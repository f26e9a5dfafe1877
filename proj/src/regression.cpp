#include "addreg/regression.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace addreg {

bool
BandwidthPlan::equal_axes() const noexcept
{
  return std::all_of(h_axes.begin(), h_axes.end(),
                     [&](double h) { return h == h_axes.front(); });
}

void
BandwidthPlan::validate(std::size_t d) const
{
  if (h_axes.size() != d)
    throw std::invalid_argument("bandwidth plan dimension does not match sample");
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!std::all_of(h_axes.begin(), h_axes.end(), positive) || !positive(ell) ||
      !positive(h_single))
    throw std::invalid_argument("all bandwidths must be positive and finite");
}

BandwidthPlan
make_default_plan(std::size_t n,
                  std::size_t d,
                  int k,
                  const PlanConstants& c,
                  bool undersmoothed)
{
  if (n < 1 || d < 1 || k < 1)
    throw std::invalid_argument("make_default_plan: n, d, k must be positive");
  RateMeta meta{};
  meta.k = k;
  meta.undersmoothed = undersmoothed;
  meta.c_h = c.c_h;
  meta.c_ell = c.c_ell;
  meta.c_single = c.c_single;
  meta.h_exponent = std::isnan(c.h_exponent)
                      ? -1.0 / (2.0 * k + (undersmoothed ? 0.5 : 1.0))
                      : c.h_exponent;
  meta.ell_exponent =
    std::isnan(c.ell_exponent) ? -1.0 / (8.0 * static_cast<double>(d)) : c.ell_exponent;
  meta.single_exponent = std::isnan(c.single_exponent)
                           ? -2.0 * k / (2.0 * k + 1.0)
                           : c.single_exponent;

  const double nn = static_cast<double>(n);
  BandwidthPlan plan;
  plan.n = n;
  plan.h_axes.assign(d, meta.c_h * std::pow(nn, meta.h_exponent));
  plan.ell = meta.c_ell * std::pow(nn, meta.ell_exponent);
  plan.h_single = meta.c_single * std::pow(nn, meta.single_exponent);
  plan.rate = meta;
  plan.validate(d);
  return plan;
}

std::vector<std::string>
plan_surrogate_violations(const BandwidthPlan& plan, bool require_equal)
{
  std::vector<std::string> out;
  for (std::size_t l = 0; l < plan.h_axes.size(); ++l)
    if (!(plan.h_axes[l] < 1.0))
      out.push_back("h_" + std::to_string(l + 1) + " must be below 1");
  const double nh = static_cast<double>(plan.n) * plan.h_axes.front();
  if (!(nh > std::log(static_cast<double>(plan.n))))
    out.push_back("n*h_1 must exceed log n");
  if (require_equal && !plan.equal_axes())
    out.push_back("equal per-axis bandwidths are required");
  return out;
}

std::string
to_string(RegressionKind kind)
{
  switch (kind) {
    case RegressionKind::plug_in:
      return "plug_in";
    case RegressionKind::single_bandwidth:
      return "single_bandwidth";
    case RegressionKind::oracle:
      return "oracle";
  }
  return "unknown";
}

RegressionField::RegressionField(RegressionKind kind,
                                 const Sample& sample,
                                 std::vector<double> divisors,
                                 ProductKernel kernel,
                                 std::vector<double> bandwidths)
  : kind_(kind)
  , kernel_(std::move(kernel))
  , bandwidths_(std::move(bandwidths))
  , n_(sample.n())
  , d_(sample.d())
{
  if (kernel_.dim() != d_ || bandwidths_.size() != d_)
    throw std::invalid_argument("regression: kernel/bandwidth dimension mismatch");
  if (divisors.size() != n_)
    throw std::invalid_argument("regression: one density value per observation required");

  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return sample.x(a, 0) < sample.x(b, 0);
  });
  points_.reserve(n_ * d_);
  for (auto i : order) {
    const double f = divisors[i];
    if (!(f > 0.0) || !std::isfinite(f))
      throw std::invalid_argument(
        "regression: density at an observation is not positive; raise the floor");
    auto r = sample.row(i);
    points_.insert(points_.end(), r.begin(), r.end());
    lead_.push_back(r[0]);
    coeffs_.push_back(sample.y()[i] / (static_cast<double>(n_) * f));
  }
  reach_ = bandwidths_[0] * kernel_.factor(0).half_support();
}

double
RegressionField::evaluate(std::span<const double> x) const
{
  const auto first =
    std::upper_bound(lead_.begin(), lead_.end(), x[0] - reach_) - lead_.begin();
  double sum = 0.0;
  for (std::size_t i = first; i < n_ && lead_[i] < x[0] + reach_; ++i) {
    const double* p = points_.data() + i * d_;
    double v = coeffs_[i];
    for (std::size_t l = 0; l < d_ && v != 0.0; ++l)
      v *= kernel_.factor(l).evaluate((x[l] - p[l]) / bandwidths_[l]) / bandwidths_[l];
    sum += v;
  }
  return sum;
}

namespace {

std::vector<double>
density_at_points(const Sample& sample, const DensityField& density)
{
  if (density.dim() != sample.d())
    throw std::invalid_argument("density dimension does not match sample");
  std::vector<double> f(sample.n());
  for (std::size_t i = 0; i < sample.n(); ++i)
    f[i] = density.evaluate(sample.row(i));
  return f;
}

} // namespace

RegressionField
fit_plug_in(const Sample& sample,
            const DensityField& density,
            const ProductKernel& kernels,
            const BandwidthPlan& plan)
{
  plan.validate(sample.d());
  return RegressionField(RegressionKind::plug_in, sample,
                         density_at_points(sample, density), kernels, plan.h_axes);
}

RegressionField
fit_single_bandwidth(const Sample& sample,
                     const DensityField& density,
                     const ProductKernel& kernel_K,
                     const BandwidthPlan& plan)
{
  plan.validate(sample.d());
  return RegressionField(RegressionKind::single_bandwidth, sample,
                         density_at_points(sample, density), kernel_K,
                         std::vector<double>(sample.d(), plan.h_single));
}

RegressionField
fit_oracle(const Sample& sample,
           const DensityField& truth,
           const ProductKernel& kernels,
           const BandwidthPlan& plan)
{
  plan.validate(sample.d());
  return RegressionField(RegressionKind::oracle, sample,
                         density_at_points(sample, truth), kernels, plan.h_axes);
}

double
bias_bound(double kth_partial_sup,
           std::span<const double> h,
           const ProductKernel& kernels,
           int k)
{
  if (h.size() != kernels.dim())
    throw std::invalid_argument("bias_bound: bandwidth dimension mismatch");
  if (k < 1)
    throw std::invalid_argument("bias_bound: k must be positive");
  const std::size_t d = h.size();
  std::vector<int> alpha(d, 0);
  double total = 0.0;
  std::function<void(std::size_t, int)> rec = [&](std::size_t l, int remaining) {
    if (l + 1 == d) {
      alpha[l] = remaining;
      double hp = 1.0;
      for (std::size_t j = 0; j < d; ++j)
        hp *= std::pow(h[j], alpha[j]);
      total += hp * std::abs(kernels.moment(alpha));
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      alpha[l] = a;
      rec(l + 1, remaining - a);
    }
  };
  rec(0, k);
  return 2.0 / std::tgamma(k + 1.0) * kth_partial_sup * total;
}

} // namespace addreg
