#pragma once

#include "addreg/density.hpp"
#include "addreg/kernels.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace addreg {

//! Constants and exponents of the power-law bandwidth rules
//! h = c * n^exponent. Exponents left at NaN take the defaults of
//! make_default_plan.
struct PlanConstants
{
  double c_h = 0.25;
  double h_exponent = std::numeric_limits<double>::quiet_NaN();
  double c_ell = 0.15;
  double ell_exponent = std::numeric_limits<double>::quiet_NaN();
  double c_single = 1.0;
  double single_exponent = std::numeric_limits<double>::quiet_NaN();
};

struct RateMeta
{
  double c_h;
  double h_exponent;
  double c_ell;
  double ell_exponent;
  double c_single;
  double single_exponent;
  int k;
  bool undersmoothed;
};

struct BandwidthPlan
{
  std::vector<double> h_axes; // h_{l,n}
  double ell;                 // density bandwidth
  double h_single;            // h_n of the single-bandwidth estimator
  std::size_t n;
  RateMeta rate;

  std::size_t dim() const noexcept { return h_axes.size(); }
  bool equal_axes() const noexcept;
  //! Throws unless every bandwidth is strictly positive and finite.
  void validate(std::size_t d) const;
};

//! Default power-law plan for sample size n:
//!   h_l   = c_h n^{-1/(2k+1)}      (n^{-1/(2k+0.5)} when undersmoothed)
//!   ell   = c_ell n^{-1/(8d)}
//!   h_n   = c_single n^{-2k/(2k+1)}
BandwidthPlan
make_default_plan(std::size_t n,
                  std::size_t d,
                  int k,
                  const PlanConstants& constants,
                  bool undersmoothed);

//! Finite-n checks standing in for the bandwidth hypotheses: every h_l < 1,
//! n h_1 > log n, and (optionally) equal bandwidths across axes. Returns one
//! message per violated check.
std::vector<std::string>
plan_surrogate_violations(const BandwidthPlan& plan, bool require_equal);

enum class RegressionKind
{
  plug_in,
  single_bandwidth,
  oracle
};

std::string
to_string(RegressionKind kind);

//! Kernel regression field
//!   x -> sum_i c_i prod_l (1/h_l) K_l((x_l - X_il) / h_l),
//! with c_i = Y_i / (n f(X_i)) and f the estimated or the true density.
class RegressionField
{
public:
  RegressionField(RegressionKind kind,
                  const Sample& sample,
                  std::vector<double> divisors,
                  ProductKernel kernel,
                  std::vector<double> bandwidths);

  double evaluate(std::span<const double> x) const;

  RegressionKind kind() const noexcept { return kind_; }
  const ProductKernel& kernel() const noexcept { return kernel_; }
  std::span<const double> bandwidths() const noexcept { return bandwidths_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t d() const noexcept { return d_; }
  //! Covariates sorted by the first coordinate.
  std::span<const double> point(std::size_t i) const noexcept
  {
    return { points_.data() + i * d_, d_ };
  }
  //! c_i aligned with point(i).
  std::span<const double> coefficients() const noexcept { return coeffs_; }

private:
  RegressionKind kind_;
  ProductKernel kernel_;
  std::vector<double> bandwidths_;
  std::size_t n_;
  std::size_t d_;
  std::vector<double> points_;
  std::vector<double> lead_;
  std::vector<double> coeffs_;
  double reach_;
};

//! Product-kernel estimator with per-axis bandwidths, divided by the
//! estimated density at each X_i.
RegressionField
fit_plug_in(const Sample& sample,
            const DensityField& density,
            const ProductKernel& kernels,
            const BandwidthPlan& plan);

//! Multivariate-kernel estimator with the single bandwidth h_n on every axis.
RegressionField
fit_single_bandwidth(const Sample& sample,
                     const DensityField& density,
                     const ProductKernel& kernel_K,
                     const BandwidthPlan& plan);

//! As fit_plug_in with the true density in the denominator.
RegressionField
fit_oracle(const Sample& sample,
           const DensityField& truth,
           const ProductKernel& kernels,
           const BandwidthPlan& plan);

//! Taylor bias bound
//!   (2/k!) ||d^k m|| sum_{k_1+..+k_d=k} h_1^{k_1}..h_d^{k_d} |int v^k K|.
double
bias_bound(double kth_partial_sup,
           std::span<const double> h,
           const ProductKernel& kernels,
           int k);

} // namespace addreg
