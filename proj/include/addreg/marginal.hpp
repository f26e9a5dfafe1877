#pragma once

#include "addreg/density.hpp"
#include "addreg/regression.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace addreg {

//! Known univariate integration density q_l with compact support C_l.
class AxisDensity
{
public:
  //! Validates int q = 1 (1e-8) and q >= 0 on the support.
  AxisDensity(std::string name, std::function<double(double)> pdf, Interval support);

  double operator()(double x) const
  {
    return (x >= support_.lo && x <= support_.hi) ? pdf_(x) : 0.0;
  }
  const Interval& support() const noexcept { return support_; }
  const std::string& name() const noexcept { return name_; }

private:
  std::string name_;
  std::function<double(double)> pdf_;
  Interval support_;
};

//! c (1 - t^2)^{smoothness + 1} with t the position rescaled to [-1, 1];
//! `smoothness` continuous derivatives at the support ends.
AxisDensity
polynomial_bump(Interval support, int smoothness);

//! q(x) = prod_l q_l(x_l); q_{-l} is always derived from the factors.
class IntegrationDensity
{
public:
  explicit IntegrationDensity(std::vector<AxisDensity> axes);

  std::size_t dim() const noexcept { return axes_.size(); }
  const AxisDensity& axis(std::size_t l) const { return axes_.at(l); }
  double product(std::span<const double> x) const;
  //! prod_{j != l} q_j(x_j) where x has full dimension d.
  double product_except(std::span<const double> x, std::size_t l) const;
  //! Throws unless every C_l lies strictly inside I_l.
  void check_inside(const EvaluationDomain& domain) const;

private:
  std::vector<AxisDensity> axes_;
};

//! Estimated (or true) additive component on a grid. `centering` is the
//! constant that was subtracted: mu-hat for estimates, int m_l q_l for
//! true components.
struct ComponentCurve
{
  std::size_t axis = 0;
  std::vector<double> grid;
  std::vector<double> values;
  double centering = 0.0;

  //! Linear interpolation; throws outside the grid.
  double interpolate(double x) const;
};

enum class ConstantSource
{
  single_bandwidth,
  plug_in
};

std::string
to_string(ConstantSource source);

struct AdditiveFit
{
  std::vector<ComponentCurve> components;
  double mu_n = 0.0;
  ConstantSource constant_source = ConstantSource::single_bandwidth;

  //! sum_l eta-hat_l(x_l) + mu_n.
  double evaluate(std::span<const double> x) const;
};

enum class IntegrationMethod
{
  factorized,
  tensor
};

struct MarginalOptions
{
  IntegrationMethod method = IntegrationMethod::factorized;
  int quadrature_nodes = 32; // factorized per-sample weights
  int panel_nodes = 6;       // per panel of the composite tensor rule
};

//! Per-sample axis weights
//!   w_ij = int (1/h_j) K_j((x - X_ij) / h_j) q_j(x) dx
//! over C_j intersected with the kernel support, for a fitted field.
class FactorizedMarginal
{
public:
  FactorizedMarginal(const RegressionField& field,
                     const IntegrationDensity& q,
                     int quadrature_nodes);

  double weight(std::size_t i, std::size_t j) const noexcept
  {
    return weights_[i * d_ + j];
  }
  //! int field(z) q(z) dz.
  double constant() const noexcept { return constant_; }
  //! eta-hat_l on `grid` (no domain check).
  ComponentCurve component(std::size_t l, std::span<const double> grid) const;

private:
  const RegressionField* field_;
  std::size_t d_;
  std::vector<double> weights_;
  std::vector<double> partial_; // c_i prod_{j != l} w_ij, row per sample
  double constant_;
};

//! eta-hat_l(x_l) = int m-hat(x) q_{-l} dx_{-l} - int m-hat q.
ComponentCurve
component_estimate(std::size_t l,
                   std::span<const double> grid,
                   const RegressionField& regression,
                   const IntegrationDensity& q,
                   const EvaluationDomain& domain,
                   const MarginalOptions& options = {});

//! mu = int regression(z) q(z) dz.
double
additive_constant(const RegressionField& regression,
                  const IntegrationDensity& q,
                  const MarginalOptions& options = {});

//! Components from the plug-in field plus the additive constant from the
//! chosen source.
AdditiveFit
additive_fit(const Sample& sample,
             const DensityField& density,
             const IntegrationDensity& q,
             const ProductKernel& kernels,
             const ProductKernel& kernel_K,
             const BandwidthPlan& plan,
             const EvaluationDomain& domain,
             const std::vector<std::vector<double>>& grids,
             ConstantSource source = ConstantSource::single_bandwidth,
             const MarginalOptions& options = {});

//! eta_l = m_l - int m_l q_l on `grid`.
ComponentCurve
true_component(std::size_t l,
               std::span<const double> grid,
               const std::function<double(double)>& m_l,
               const AxisDensity& q_l,
               int quadrature_nodes = 64);

} // namespace addreg
