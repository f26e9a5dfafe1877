#pragma once

#include "addreg/kernels.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace addreg {

struct Interval
{
  double lo;
  double hi;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
};

//! Observed covariates (row-major n x d) and responses.
class Sample
{
public:
  Sample(std::size_t d, std::vector<double> x, std::vector<double> y);

  std::size_t n() const noexcept { return y_.size(); }
  std::size_t d() const noexcept { return d_; }
  double x(std::size_t i, std::size_t l) const noexcept { return x_[i * d_ + l]; }
  std::span<const double> row(std::size_t i) const noexcept
  {
    return { x_.data() + i * d_, d_ };
  }
  std::span<const double> xs() const noexcept { return x_; }
  std::span<const double> y() const noexcept { return y_; }

  //! Same covariates with different responses.
  Sample with_responses(std::vector<double> y) const;

private:
  std::size_t d_;
  std::vector<double> x_;
  std::vector<double> y_;
};

//! The nested boxes I (inner, where estimates are reported) and J (outer).
class EvaluationDomain
{
public:
  EvaluationDomain(std::vector<Interval> inner, std::vector<Interval> outer);
  //! Same intervals on every axis.
  static EvaluationDomain cube(std::size_t d, Interval inner, Interval outer);

  std::size_t dim() const noexcept { return inner_.size(); }
  const std::vector<Interval>& inner() const noexcept { return inner_; }
  const std::vector<Interval>& outer() const noexcept { return outer_; }
  const Interval& inner(std::size_t l) const { return inner_.at(l); }
  const Interval& outer(std::size_t l) const { return outer_.at(l); }
  bool in_inner(std::span<const double> x) const noexcept;

private:
  std::vector<Interval> inner_;
  std::vector<Interval> outer_;
};

//! Evenly spaced grid of `points` values spanning an interval.
std::vector<double>
linear_grid(Interval iv, std::size_t points);

class DensityModel
{
public:
  virtual ~DensityModel() = default;
  virtual std::size_t dim() const noexcept = 0;
  virtual double raw(std::span<const double> x) const = 0;
};

//! A density surface used either as a plain estimate or as a divisor.
//! evaluate() clamps at `floor`; raw() does not.
class DensityField
{
public:
  DensityField(std::shared_ptr<const DensityModel> model,
               double floor,
               double bandwidth,
               std::optional<ProductKernel> kernel);

  double evaluate(std::span<const double> x) const
  {
    const double v = model_->raw(x);
    return v > floor_ ? v : floor_;
  }
  double raw(std::span<const double> x) const { return model_->raw(x); }
  std::size_t dim() const noexcept { return model_->dim(); }
  double floor() const noexcept { return floor_; }
  double bandwidth() const noexcept { return bandwidth_; }
  const std::optional<ProductKernel>& kernel() const noexcept { return kernel_; }
  DensityField with_floor(double floor) const;

private:
  std::shared_ptr<const DensityModel> model_;
  double floor_;
  double bandwidth_;
  std::optional<ProductKernel> kernel_;
};

//! max(floor, (1 / (n ell^d)) sum_i L((x - X_i) / ell)).
DensityField
kde_fit(const Sample& sample, const ProductKernel& kernel, double ell, double floor);

//! Wrap a known density.
DensityField
analytic_density(std::size_t d,
                 std::function<double(std::span<const double>)> f,
                 double floor = 0.0);

//! Max over a tensor grid on I of |raw field - raw truth|.
double
sup_density_error(const DensityField& field,
                  const DensityField& truth,
                  const EvaluationDomain& domain,
                  std::size_t grid_per_axis);

//! Floor used when the density lower bound b is (or is not) known.
double
default_density_floor(std::optional<double> lower_bound);

//! Calls f(point) for each point of the tensor grid built from `grids`,
//! last axis fastest.
void
for_each_grid_point(const std::vector<std::vector<double>>& grids,
                    const std::function<void(std::span<const double>)>& f);

} // namespace addreg
