#pragma once

#include "addreg/density.hpp"
#include "addreg/design.hpp"
#include "addreg/kernels.hpp"
#include "addreg/marginal.hpp"
#include "addreg/regression.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace addreg {

struct VarianceOptions
{
  //! Gauss nodes per integrated axis and kernel window (d <= 3).
  int quadrature_nodes = 16;
  //! Points per integrated axis for d > 3 (quasi-random fallback).
  std::size_t qmc_points = 4096;
  //! When > 0, the estimated density is tabulated on a tensor grid with this
  //! many points per axis and interpolated multilinearly. 0 evaluates it
  //! exactly at every node.
  std::size_t density_table = 0;
};

struct VarianceField
{
  std::vector<double> grid;
  std::vector<double> sigma_sq;
  //! Grid points whose raw value was negative and clipped to zero.
  std::size_t clipped = 0;
};

//! sigma^2_{1,n}(x_1) on `grid` for axis `axis` (default the first):
//!   (1/(n h_1)) sum_i Y_i^2 K_1((x_1 - X_i1)/h_1)
//!     int prod_{l != 1} (1/h_l) K_l((x_l - X_il)/h_l) / fhat^2(x) q_{-1} dx_{-1}.
VarianceField
variance_field(const Sample& sample,
               const DensityField& density,
               const ProductKernel& kernels,
               const BandwidthPlan& plan,
               const IntegrationDensity& q,
               std::span<const double> grid,
               const VarianceOptions& options = {},
               std::size_t axis = 0);

//! L_n = sqrt(2 log(1/h) / (n h)) sigma sqrt(int K^2), pointwise.
std::vector<double>
band_halfwidth(std::span<const double> sigma_sq, double h, double kernel_l2, std::size_t n);

struct BandCurve
{
  std::vector<double> grid;
  std::vector<double> center;
  std::vector<double> halfwidth; // L_n, before the factor
  std::vector<double> lower;
  std::vector<double> upper;
  double epsilon_factor = 1.0;

  //! True when every truth[g] lies in [lower[g], upper[g]].
  bool contains(std::span<const double> truth) const;
};

BandCurve
component_band(const ComponentCurve& fit,
               std::span<const double> halfwidths,
               double epsilon_factor);

//! Band for the additive fit on the tensor grid of the per-axis grids,
//! flattened with the last axis fastest.
struct AdditiveBand
{
  std::vector<std::vector<double>> grids;
  std::vector<double> center;
  std::vector<double> lower;
  std::vector<double> upper;
  double mu_n = 0.0;

  bool contains(std::span<const double> truth) const;
};

AdditiveBand
additive_band(const AdditiveFit& fit, const std::vector<BandCurve>& bands, double mu_n);

enum class OracleIntegrator
{
  gauss,
  quasi_random
};

//! Weight inside phi. `linear` is q_{-l}; `squared` uses q_{-l}^2, which is
//! what the variance of the component estimate actually carries. The
//! squared form is a diagnostic; targets use `linear`.
enum class PhiWeight
{
  linear,
  squared
};

struct VarianceOracle
{
  std::size_t axis = 0;
  std::function<double(double)> phi;
  std::function<double(double)> f_marginal;
  double kernel_l2 = 0.0;
  double sigma = 0.0;
  double argmax = 0.0;
};

//! phi(u) = int H(u) / f(u_{-l} | u_l) q_{-l}(u_{-l}) du_{-l} and
//! sigma_l = sup over `grid_points` points of I_l of sqrt(phi / f_l int K_l^2).
//! The returned callables reference `design` and `q`.
VarianceOracle
sigma_oracle(const SimDesign& design,
             const IntegrationDensity& q,
             const KernelSpec& kernel,
             std::size_t axis,
             OracleIntegrator integrator = OracleIntegrator::gauss,
             std::size_t grid_points = 512,
             PhiWeight weight = PhiWeight::linear);

struct TheoremStatistic
{
  double t_plus = 0.0;
  double t_minus = 0.0;
  double target = 0.0;
  double scale = 0.0; // sqrt(n h / (2 |log h|))
};

//! t_+/- = sqrt(n h / (2 |log h|)) max over points of +/-(estimate - truth).
TheoremStatistic
theorem_statistic(std::span<const double> estimate,
                  std::span<const double> truth,
                  double h,
                  std::size_t n,
                  double target);

} // namespace addreg
