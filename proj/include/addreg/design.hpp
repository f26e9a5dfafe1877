#pragma once

#include "addreg/density.hpp"
#include "addreg/marginal.hpp"
#include "addreg/rng.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace addreg {

//! Law of one covariate on [0, 1]: f(x) = 1 + tilt (2x - 1), |tilt| < 1.
//! tilt = 0 is the uniform law.
struct AxisLaw
{
  double tilt = 0.0;

  double pdf(double x) const noexcept
  {
    return (x >= 0.0 && x <= 1.0) ? 1.0 + tilt * (2.0 * x - 1.0) : 0.0;
  }
  double lower_bound() const noexcept { return 1.0 - std::abs(tilt); }
  //! Inverse CDF.
  double quantile(double u) const noexcept;
};

//! Synthetic additive design m(x) = mu + sum_l m_l(x_l) with independent
//! covariates on J = [0, 1]^d and uniform noise on [-a, a].
class SimDesign
{
public:
  SimDesign(std::string name,
            double mu,
            std::vector<std::function<double(double)>> components,
            std::vector<AxisLaw> laws,
            double noise_halfwidth,
            Interval inner,
            Interval q_support);

  const std::string& name() const noexcept { return name_; }
  std::size_t d() const noexcept { return components_.size(); }
  double mu() const noexcept { return mu_; }

  double m(std::span<const double> x) const;
  double m_component(std::size_t l, double x) const { return components_.at(l)(x); }
  const std::function<double(double)>& component(std::size_t l) const
  {
    return components_.at(l);
  }

  double f(std::span<const double> x) const;
  double f_marginal(std::size_t l, double x) const { return laws_.at(l).pdf(x); }
  //! f(u_{-l} | u_l) for a full-dimensional u.
  double f_conditional(std::span<const double> u, std::size_t l) const;
  //! Lower bound b of f on J.
  double lower_bound() const noexcept;

  double noise_halfwidth() const noexcept { return noise_halfwidth_; }
  double noise_variance() const noexcept
  {
    return noise_halfwidth_ * noise_halfwidth_ / 3.0;
  }
  //! E(Y^2 | X = u).
  double H(std::span<const double> u) const { return m(u) * m(u) + noise_variance(); }
  //! sup |Y| over J; the bound asserted at construction.
  double response_bound() const noexcept { return response_bound_; }

  EvaluationDomain domain() const;
  //! Smoothness-2 polynomial bumps on C_l = q_support for every axis.
  IntegrationDensity integration_density(int smoothness = 2) const;
  const Interval& q_support() const noexcept { return q_support_; }

  //! i.i.d. draws; covariates and noise come from separate streams.
  Sample generate(std::size_t n, Philox4x32& covariates, Philox4x32& noise) const;
  Sample generate(std::size_t n, std::uint64_t seed) const;

private:
  std::string name_;
  double mu_;
  std::vector<std::function<double(double)>> components_;
  std::vector<AxisLaw> laws_;
  double noise_halfwidth_;
  Interval inner_;
  Interval q_support_;
  double response_bound_ = 0.0;
};

//! Named designs: reference, reference_zero_noise, constant, polynomial_x,
//! additive3.
SimDesign
make_design(const std::string& name);

std::vector<std::string>
design_names();

} // namespace addreg
