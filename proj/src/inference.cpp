#include "addreg/inference.hpp"

#include "addreg/quadrature.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace addreg {

namespace {

// Multilinear interpolation table of a clamped density on a tensor grid.
class DensityTable
{
public:
  DensityTable(const DensityField& density, std::vector<Interval> box, std::size_t points)
    : box_(std::move(box))
    , points_(points)
  {
    const std::size_t d = box_.size();
    std::size_t total = 1;
    for (std::size_t l = 0; l < d; ++l)
      total *= points_;
    values_.resize(total);
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d);
    for (std::size_t flat = 0; flat < total; ++flat) {
      for (std::size_t l = 0; l < d; ++l)
        x[l] = node(l, idx[l]);
      values_[flat] = density.evaluate(x);
      for (std::size_t l = d; l-- > 0;) {
        if (++idx[l] < points_)
          break;
        idx[l] = 0;
      }
    }
  }

  double operator()(std::span<const double> x) const
  {
    const std::size_t d = box_.size();
    std::size_t base = 0;
    double frac[8];
    std::size_t stride[8];
    std::size_t s = 1;
    for (std::size_t l = d; l-- > 0;) {
      stride[l] = s;
      s *= points_;
    }
    for (std::size_t l = 0; l < d; ++l) {
      const double step = box_[l].width() / static_cast<double>(points_ - 1);
      double t = (x[l] - box_[l].lo) / step;
      t = std::clamp(t, 0.0, static_cast<double>(points_ - 1));
      std::size_t i = static_cast<std::size_t>(t);
      if (i >= points_ - 1)
        i = points_ - 2;
      frac[l] = t - static_cast<double>(i);
      base += i * stride[l];
    }
    double r = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{ 1 } << d); ++corner) {
      double w = 1.0;
      std::size_t off = base;
      for (std::size_t l = 0; l < d; ++l) {
        if (corner >> l & 1u) {
          w *= frac[l];
          off += stride[l];
        } else {
          w *= 1.0 - frac[l];
        }
      }
      if (w != 0.0)
        r += w * values_[off];
    }
    return r;
  }

private:
  double node(std::size_t l, std::size_t i) const
  {
    return box_[l].lo + box_[l].width() * static_cast<double>(i) /
                          static_cast<double>(points_ - 1);
  }

  std::vector<Interval> box_;
  std::size_t points_;
  std::vector<double> values_;
};

} // namespace

VarianceField
variance_field(const Sample& sample,
               const DensityField& density,
               const ProductKernel& kernels,
               const BandwidthPlan& plan,
               const IntegrationDensity& q,
               std::span<const double> grid,
               const VarianceOptions& options,
               std::size_t axis)
{
  const std::size_t d = sample.d();
  const std::size_t n = sample.n();
  plan.validate(d);
  if (kernels.dim() != d || q.dim() != d || density.dim() != d)
    throw std::invalid_argument("variance_field: dimension mismatch");
  if (axis >= d)
    throw std::invalid_argument("variance_field: axis out of range");
  if (options.density_table == 1 || d > 8)
    throw std::invalid_argument("variance_field: density table needs at least 2 points");

  const double ha = plan.h_axes[axis];
  const KernelSpec& ka = kernels.factor(axis);
  const double reach = ha * ka.half_support();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sample.x(a, axis) < sample.x(b, axis);
  });
  std::vector<double> keys(n);
  for (std::size_t r = 0; r < n; ++r)
    keys[r] = sample.x(order[r], axis);

  std::optional<DensityTable> table;
  if (options.density_table > 0 && !grid.empty()) {
    std::vector<Interval> box(d);
    for (std::size_t l = 0; l < d; ++l)
      box[l] = q.axis(l).support();
    const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
    box[axis] = Interval{ *lo, *hi > *lo ? *hi : *lo + 1e-9 };
    table.emplace(density, std::move(box), options.density_table);
  }
  auto fhat = [&](std::span<const double> x) {
    return table ? (*table)(x) : density.evaluate(x);
  };

  std::vector<std::size_t> others;
  for (std::size_t l = 0; l < d; ++l)
    if (l != axis)
      others.push_back(l);
  const std::size_t m = others.size();
  const bool use_gauss = m <= 2;
  const QuadratureRule& ref = gauss_legendre_reference(options.quadrature_nodes);
  const std::size_t per_axis = use_gauss ? ref.size() : 0;

  VarianceField out;
  out.grid.assign(grid.begin(), grid.end());
  out.sigma_sq.assign(grid.size(), 0.0);

  std::vector<double> x(d);
  std::vector<std::vector<double>> nodes(m), weights(m);
  std::vector<std::size_t> idx(m);
  std::vector<Interval> region(m);

  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double xa = grid[g];
    x[axis] = xa;
    const auto first = std::upper_bound(keys.begin(), keys.end(), xa - reach);
    double raw = 0.0;
    for (auto it = first; it != keys.end() && *it < xa + reach; ++it) {
      const std::size_t i = order[static_cast<std::size_t>(it - keys.begin())];
      const double yi = sample.y()[i];
      const double kv = ka.evaluate((xa - sample.x(i, axis)) / ha);
      if (yi == 0.0 || kv == 0.0)
        continue;

      bool empty = false;
      for (std::size_t a = 0; a < m; ++a) {
        const std::size_t j = others[a];
        const Interval& c = q.axis(j).support();
        const double r = plan.h_axes[j] * kernels.factor(j).half_support();
        region[a] = Interval{ std::max(c.lo, sample.x(i, j) - r),
                              std::min(c.hi, sample.x(i, j) + r) };
        if (!(region[a].lo < region[a].hi))
          empty = true;
      }
      if (empty)
        continue;

      auto integrand_factor = [&](std::size_t a, double z) {
        const std::size_t j = others[a];
        const double hj = plan.h_axes[j];
        return kernels.factor(j).evaluate((z - sample.x(i, j)) / hj) / hj * q.axis(j)(z);
      };

      double integral = 0.0;
      if (use_gauss) {
        for (std::size_t a = 0; a < m; ++a) {
          const QuadratureRule mapped = ref.mapped(region[a].lo, region[a].hi);
          nodes[a].assign(mapped.nodes().begin(), mapped.nodes().end());
          weights[a].resize(per_axis);
          for (std::size_t p = 0; p < per_axis; ++p)
            weights[a][p] = mapped.weights()[p] * integrand_factor(a, nodes[a][p]);
        }
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
          double w = 1.0;
          for (std::size_t a = 0; a < m; ++a) {
            w *= weights[a][idx[a]];
            x[others[a]] = nodes[a][idx[a]];
          }
          if (w != 0.0) {
            const double fv = fhat(x);
            integral += w / (fv * fv);
          }
          bool done = true;
          for (std::size_t a = m; a-- > 0;) {
            if (++idx[a] < per_axis) {
              done = false;
              break;
            }
            idx[a] = 0;
          }
          if (done)
            break;
        }
      } else {
        boost::random::sobol qrng(m);
        const double scale = 1.0 / (static_cast<double>(qrng.max()) + 1.0);
        double volume = 1.0;
        for (std::size_t a = 0; a < m; ++a)
          volume *= region[a].width();
        double sum = 0.0;
        for (std::size_t p = 0; p < options.qmc_points; ++p) {
          double w = 1.0;
          for (std::size_t a = 0; a < m; ++a) {
            const double u = (static_cast<double>(qrng()) + 0.5) * scale;
            const double z = region[a].lo + region[a].width() * u;
            x[others[a]] = z;
            w *= integrand_factor(a, z);
          }
          if (w != 0.0) {
            const double fv = fhat(x);
            sum += w / (fv * fv);
          }
        }
        integral = volume * sum / static_cast<double>(options.qmc_points);
      }
      raw += yi * yi * kv * integral;
    }
    raw /= static_cast<double>(n) * ha;
    if (!std::isfinite(raw))
      throw std::runtime_error("variance_field: non-finite value");
    if (raw < 0.0) {
      ++out.clipped;
      raw = 0.0;
    }
    out.sigma_sq[g] = raw;
  }
  return out;
}

std::vector<double>
band_halfwidth(std::span<const double> sigma_sq, double h, double kernel_l2, std::size_t n)
{
  if (!(h > 0.0 && h < 1.0))
    throw std::invalid_argument("band_halfwidth: bandwidth must lie in (0, 1)");
  if (n == 0)
    throw std::invalid_argument("band_halfwidth: n must be positive");
  const double rate = std::sqrt(2.0 * std::log(1.0 / h) / (static_cast<double>(n) * h));
  const double root_l2 = std::sqrt(kernel_l2);
  std::vector<double> out;
  out.reserve(sigma_sq.size());
  for (double s2 : sigma_sq) {
    if (s2 < 0.0)
      throw std::invalid_argument("band_halfwidth: negative variance");
    out.push_back(rate * std::sqrt(s2) * root_l2);
  }
  return out;
}

bool
BandCurve::contains(std::span<const double> truth) const
{
  if (truth.size() != center.size())
    throw std::invalid_argument("band and truth grids differ");
  for (std::size_t g = 0; g < truth.size(); ++g)
    if (truth[g] < lower[g] || truth[g] > upper[g])
      return false;
  return true;
}

BandCurve
component_band(const ComponentCurve& fit, std::span<const double> halfwidths, double factor)
{
  if (halfwidths.size() != fit.values.size())
    throw std::invalid_argument("component_band: grids not aligned");
  BandCurve band;
  band.grid = fit.grid;
  band.center = fit.values;
  band.halfwidth.assign(halfwidths.begin(), halfwidths.end());
  band.epsilon_factor = factor;
  band.lower.resize(fit.values.size());
  band.upper.resize(fit.values.size());
  for (std::size_t g = 0; g < fit.values.size(); ++g) {
    band.lower[g] = fit.values[g] - factor * halfwidths[g];
    band.upper[g] = fit.values[g] + factor * halfwidths[g];
  }
  return band;
}

bool
AdditiveBand::contains(std::span<const double> truth) const
{
  if (truth.size() != center.size())
    throw std::invalid_argument("band and truth grids differ");
  for (std::size_t g = 0; g < truth.size(); ++g)
    if (truth[g] < lower[g] || truth[g] > upper[g])
      return false;
  return true;
}

AdditiveBand
additive_band(const AdditiveFit& fit, const std::vector<BandCurve>& bands, double mu_n)
{
  const std::size_t d = fit.components.size();
  if (bands.size() != d)
    throw std::invalid_argument("additive_band: one band per axis required");
  AdditiveBand out;
  out.mu_n = mu_n;
  std::size_t total = 1;
  for (std::size_t l = 0; l < d; ++l) {
    if (bands[l].grid != fit.components[l].grid)
      throw std::invalid_argument("additive_band: grids not aligned");
    out.grids.push_back(bands[l].grid);
    total *= bands[l].grid.size();
  }
  out.center.reserve(total);
  out.lower.reserve(total);
  out.upper.reserve(total);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    double c = mu_n, lo = mu_n, hi = mu_n;
    for (std::size_t l = 0; l < d; ++l) {
      c += bands[l].center[idx[l]];
      lo += bands[l].lower[idx[l]];
      hi += bands[l].upper[idx[l]];
    }
    out.center.push_back(c);
    out.lower.push_back(lo);
    out.upper.push_back(hi);
    for (std::size_t l = d; l-- > 0;) {
      if (++idx[l] < out.grids[l].size())
        break;
      idx[l] = 0;
    }
  }
  return out;
}

VarianceOracle
sigma_oracle(const SimDesign& design,
             const IntegrationDensity& q,
             const KernelSpec& kernel,
             std::size_t axis,
             OracleIntegrator integrator,
             std::size_t grid_points,
             PhiWeight weight)
{
  const std::size_t d = design.d();
  if (q.dim() != d || axis >= d)
    throw std::invalid_argument("sigma_oracle: dimension mismatch");
  std::vector<std::size_t> others;
  for (std::size_t l = 0; l < d; ++l)
    if (l != axis)
      others.push_back(l);

  const bool squared = weight == PhiWeight::squared;
  auto weight_of = [&q, axis, squared](std::span<const double> x) {
    const double w = q.product_except(x, axis);
    return squared ? w * w : w;
  };

  std::function<double(double)> phi;
  if (integrator == OracleIntegrator::gauss) {
    std::vector<QuadratureRule> axes;
    for (std::size_t j : others)
      axes.push_back(gauss_legendre(q.axis(j).support().lo, q.axis(j).support().hi, 64));
    auto rule = std::make_shared<TensorRule>(std::move(axes));
    phi = [&design, weight_of, axis, others, rule](double u) {
      std::vector<double> x(design.d());
      x[axis] = u;
      return integrate_tensor(*rule, [&](std::span<const double> z) {
        for (std::size_t a = 0; a < others.size(); ++a)
          x[others[a]] = z[a];
        return design.H(x) / design.f_conditional(x, axis) * weight_of(x);
      });
    };
  } else {
    phi = [&design, &q, weight_of, axis, others](double u) {
      constexpr std::size_t points = std::size_t{ 1 } << 16;
      boost::random::sobol qrng(others.size());
      const double scale = 1.0 / (static_cast<double>(qrng.max()) + 1.0);
      std::vector<double> x(design.d());
      x[axis] = u;
      double volume = 1.0;
      for (std::size_t j : others)
        volume *= q.axis(j).support().width();
      double sum = 0.0;
      for (std::size_t p = 0; p < points; ++p) {
        for (std::size_t j : others) {
          const Interval& c = q.axis(j).support();
          x[j] = c.lo + c.width() * (static_cast<double>(qrng()) + 0.5) * scale;
        }
        sum += design.H(x) / design.f_conditional(x, axis) * weight_of(x);
      }
      return volume * sum / static_cast<double>(points);
    };
  }

  VarianceOracle out;
  out.axis = axis;
  out.phi = phi;
  out.f_marginal = [&design, axis](double u) { return design.f_marginal(axis, u); };
  out.kernel_l2 = kernel.l2_norm();
  const Interval inner = design.domain().inner(axis);
  for (double u : linear_grid(inner, grid_points)) {
    const double value = phi(u);
    if (value < 0.0)
      throw std::runtime_error("sigma_oracle: negative phi");
    const double s = std::sqrt(value / design.f_marginal(axis, u) * out.kernel_l2);
    if (s > out.sigma) {
      out.sigma = s;
      out.argmax = u;
    }
  }
  return out;
}

TheoremStatistic
theorem_statistic(std::span<const double> estimate,
                  std::span<const double> truth,
                  double h,
                  std::size_t n,
                  double target)
{
  if (!(h > 0.0 && h < 1.0))
    throw std::invalid_argument("theorem_statistic: bandwidth must lie in (0, 1)");
  if (estimate.size() != truth.size() || estimate.empty())
    throw std::invalid_argument("theorem_statistic: grids not aligned");
  TheoremStatistic t;
  t.target = target;
  t.scale = std::sqrt(static_cast<double>(n) * h / (2.0 * std::abs(std::log(h))));
  double up = -std::numeric_limits<double>::infinity();
  double down = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < estimate.size(); ++g) {
    const double diff = estimate[g] - truth[g];
    up = std::max(up, diff);
    down = std::max(down, -diff);
  }
  t.t_plus = t.scale * up;
  t.t_minus = t.scale * down;
  return t;
}

} // namespace addreg
