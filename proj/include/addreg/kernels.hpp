#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace addreg {

//! Compactly supported polynomial kernel: K(u) = p(u) for |u| < half_support,
//! zero elsewhere. Only polynomial-times-indicator kernels are offered, which
//! keeps every shipped kernel inside the VC-type admissible class.
class KernelSpec
{
public:
  //! `coefficients[j]` multiplies u^j. Validates that the kernel integrates to
  //! one and that moments 1..order-1 vanish (tolerance 1e-8).
  KernelSpec(std::string name,
             std::vector<double> coefficients,
             double half_support,
             int order);

  double evaluate(double u) const noexcept
  {
    if (!(u < half_support_ && u > -half_support_))
      return 0.0;
    double r = coeffs_.back();
    for (std::size_t j = coeffs_.size() - 1; j-- > 0;)
      r = r * u + coeffs_[j];
    return r;
  }
  double operator()(double u) const noexcept { return evaluate(u); }

  const std::string& name() const noexcept { return name_; }
  double half_support() const noexcept { return half_support_; }
  int order() const noexcept { return order_; }
  //! Cached integral of K^2.
  double l2_norm() const noexcept { return l2_norm_; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }
  //! Degree of the polynomial piece.
  int degree() const noexcept { return static_cast<int>(coeffs_.size()) - 1; }
  //! True when all odd coefficients are exactly zero.
  bool symmetric() const noexcept;
  //! Integral of u^j K(u), exact up to rounding.
  double moment(int j) const;
  double sup_abs() const;

private:
  std::string name_;
  std::vector<double> coeffs_;
  double half_support_;
  int order_;
  double l2_norm_;
};

struct MomentEntry
{
  std::vector<int> index; // exponent per axis
  double value;
  double target;
  bool ok;
};

struct MomentReport
{
  int order;
  double tol;
  std::vector<MomentEntry> moments; // every multi-index with |index| <= order
  bool pass;
  std::optional<std::size_t> first_failure;
};

//! 3/4 (1 - u^2) on [-1, 1].
KernelSpec
epanechnikov();
//! 15/16 (1 - u^2)^2 on [-1, 1].
KernelSpec
biweight();
//! 35/32 (1 - u^2)^3 on [-1, 1].
KernelSpec
triweight();

//! Multiply `base` by the polynomial P of degree target_order - 2 (symmetric
//! base) solving  int u^j K P = delta_j0  for j < target_order.
KernelSpec
raise_order(const KernelSpec& base, int target_order);

//! Moments mu_0..mu_k with the order-k pass flag. mu_k is reported but not
//! checked.
MomentReport
verify_order(const KernelSpec& kernel, int k, double tol);

//! (1/h) K((center - x) / h).
double
scaled_eval(const KernelSpec& kernel, double center, double bandwidth, double x);

//! Base kernel by name ("epanechnikov", "biweight", "triweight") raised to
//! `order`.
KernelSpec
make_kernel(const std::string& name, int order);

std::vector<std::string>
kernel_names();

//! Product kernel prod_l K_l(u_l).
class ProductKernel
{
public:
  explicit ProductKernel(std::vector<KernelSpec> factors);
  static ProductKernel uniform(const KernelSpec& factor, std::size_t d);

  double evaluate(std::span<const double> u) const noexcept
  {
    double r = 1.0;
    for (std::size_t l = 0; l < factors_.size() && r != 0.0; ++l)
      r *= factors_[l].evaluate(u[l]);
    return r;
  }
  double operator()(std::span<const double> u) const noexcept
  {
    return evaluate(u);
  }

  std::size_t dim() const noexcept { return factors_.size(); }
  const KernelSpec& factor(std::size_t l) const { return factors_.at(l); }
  const std::vector<KernelSpec>& factors() const noexcept { return factors_; }
  //! Smallest factor order; the product has exactly this order.
  int order() const noexcept;
  double l2_norm() const noexcept;
  //! Mixed moment int v^alpha K(v) dv, factorized over axes.
  double moment(std::span<const int> alpha) const;

private:
  std::vector<KernelSpec> factors_;
};

//! Multi-index moment check of the product kernel for |alpha| <= k.
MomentReport
verify_order(const ProductKernel& kernel, int k, double tol);

} // namespace addreg
