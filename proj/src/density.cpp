#include "addreg/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace addreg {

namespace {

class KdeModel final : public DensityModel
{
public:
  KdeModel(const Sample& sample, ProductKernel kernel, double ell)
    : kernel_(std::move(kernel))
    , ell_(ell)
    , d_(sample.d())
    , n_(sample.n())
  {
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return sample.x(a, 0) < sample.x(b, 0);
    });
    points_.reserve(n_ * d_);
    lead_.reserve(n_);
    for (auto i : order) {
      auto r = sample.row(i);
      points_.insert(points_.end(), r.begin(), r.end());
      lead_.push_back(r[0]);
    }
    norm_ = 1.0 / (static_cast<double>(n_) * std::pow(ell_, static_cast<double>(d_)));
    reach_ = ell_ * kernel_.factor(0).half_support();
  }

  std::size_t dim() const noexcept override { return d_; }

  double raw(std::span<const double> x) const override
  {
    const auto first =
      std::upper_bound(lead_.begin(), lead_.end(), x[0] - reach_) - lead_.begin();
    double sum = 0.0;
    for (std::size_t i = first; i < n_ && lead_[i] < x[0] + reach_; ++i) {
      const double* p = points_.data() + i * d_;
      double v = 1.0;
      for (std::size_t l = 0; l < d_ && v != 0.0; ++l)
        v *= kernel_.factor(l).evaluate((x[l] - p[l]) / ell_);
      sum += v;
    }
    return sum * norm_;
  }

private:
  ProductKernel kernel_;
  double ell_;
  std::size_t d_;
  std::size_t n_;
  double norm_;
  double reach_;
  std::vector<double> points_;
  std::vector<double> lead_;
};

class AnalyticModel final : public DensityModel
{
public:
  AnalyticModel(std::size_t d, std::function<double(std::span<const double>)> f)
    : d_(d)
    , f_(std::move(f))
  {}
  std::size_t dim() const noexcept override { return d_; }
  double raw(std::span<const double> x) const override { return f_(x); }

private:
  std::size_t d_;
  std::function<double(std::span<const double>)> f_;
};

} // namespace

Sample::Sample(std::size_t d, std::vector<double> x, std::vector<double> y)
  : d_(d)
  , x_(std::move(x))
  , y_(std::move(y))
{
  if (d_ < 2)
    throw std::invalid_argument("sample dimension d must be at least 2");
  if (y_.empty())
    throw std::invalid_argument("sample must contain at least one observation");
  if (x_.size() != y_.size() * d_)
    throw std::invalid_argument("covariate matrix size does not match n x d");
  for (double v : x_)
    if (!std::isfinite(v))
      throw std::invalid_argument("covariates must be finite");
  for (double v : y_)
    if (!std::isfinite(v))
      throw std::invalid_argument("responses must be finite");
}

Sample
Sample::with_responses(std::vector<double> y) const
{
  return Sample(d_, x_, std::move(y));
}

EvaluationDomain::EvaluationDomain(std::vector<Interval> inner,
                                   std::vector<Interval> outer)
  : inner_(std::move(inner))
  , outer_(std::move(outer))
{
  if (inner_.empty() || inner_.size() != outer_.size())
    throw std::invalid_argument("domain boxes must have the same positive dimension");
  for (std::size_t l = 0; l < inner_.size(); ++l) {
    const auto& i = inner_[l];
    const auto& o = outer_[l];
    if (!(o.lo < i.lo && i.lo < i.hi && i.hi < o.hi))
      throw std::invalid_argument("axis " + std::to_string(l) +
                                  ": need a' < a < c < c' for the nested boxes");
  }
}

EvaluationDomain
EvaluationDomain::cube(std::size_t d, Interval inner, Interval outer)
{
  return EvaluationDomain(std::vector<Interval>(d, inner),
                          std::vector<Interval>(d, outer));
}

bool
EvaluationDomain::in_inner(std::span<const double> x) const noexcept
{
  for (std::size_t l = 0; l < inner_.size(); ++l)
    if (!inner_[l].contains(x[l]))
      return false;
  return true;
}

std::vector<double>
linear_grid(Interval iv, std::size_t points)
{
  if (points < 2)
    throw std::invalid_argument("grid needs at least two points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = iv.lo + (iv.hi - iv.lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  g.back() = iv.hi;
  return g;
}

DensityField::DensityField(std::shared_ptr<const DensityModel> model,
                           double floor,
                           double bandwidth,
                           std::optional<ProductKernel> kernel)
  : model_(std::move(model))
  , floor_(floor)
  , bandwidth_(bandwidth)
  , kernel_(std::move(kernel))
{
  if (!(floor_ >= 0.0))
    throw std::invalid_argument("density floor must be non-negative");
}

DensityField
DensityField::with_floor(double floor) const
{
  return DensityField(model_, floor, bandwidth_, kernel_);
}

DensityField
kde_fit(const Sample& sample, const ProductKernel& kernel, double ell, double floor)
{
  if (!(ell > 0.0))
    throw std::invalid_argument("kde_fit: bandwidth ell must be positive");
  if (kernel.dim() != sample.d())
    throw std::invalid_argument("kde_fit: kernel dimension does not match sample");
  return DensityField(std::make_shared<KdeModel>(sample, kernel, ell), floor, ell, kernel);
}

DensityField
analytic_density(std::size_t d,
                 std::function<double(std::span<const double>)> f,
                 double floor)
{
  return DensityField(std::make_shared<AnalyticModel>(d, std::move(f)), floor, 0.0,
                      std::nullopt);
}

void
for_each_grid_point(const std::vector<std::vector<double>>& grids,
                    const std::function<void(std::span<const double>)>& f)
{
  const std::size_t d = grids.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> p(d);
  for (const auto& g : grids)
    if (g.empty())
      return;
  while (true) {
    for (std::size_t l = 0; l < d; ++l)
      p[l] = grids[l][idx[l]];
    f(p);
    std::size_t l = d;
    while (true) {
      if (l == 0)
        return;
      --l;
      if (++idx[l] < grids[l].size())
        break;
      idx[l] = 0;
    }
  }
}

double
sup_density_error(const DensityField& field,
                  const DensityField& truth,
                  const EvaluationDomain& domain,
                  std::size_t grid_per_axis)
{
  if (grid_per_axis < 2)
    throw std::invalid_argument("sup_density_error: grid_per_axis must be >= 2");
  std::vector<std::vector<double>> grids;
  for (const auto& iv : domain.inner())
    grids.push_back(linear_grid(iv, grid_per_axis));
  double worst = 0.0;
  for_each_grid_point(grids, [&](std::span<const double> x) {
    worst = std::max(worst, std::abs(field.raw(x) - truth.raw(x)));
  });
  return worst;
}

double
default_density_floor(std::optional<double> lower_bound)
{
  if (lower_bound)
    return std::max(1e-3, *lower_bound / 2.0);
  return 1e-3;
}

} // namespace addreg
