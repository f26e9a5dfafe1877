#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace addreg {

/// Thrown when an integrand returns a non-finite value at a quadrature node.
class IntegrationError : public std::runtime_error
{
public:
  IntegrationError(std::vector<double> node, double value);

  const std::vector<double>& node() const noexcept { return node_; }
  double value() const noexcept { return value_; }

private:
  std::vector<double> node_;
  double value_;
};

//! Positive-weight quadrature rule on a closed interval.
//!
//! Rules are only built by the Gauss-Legendre factories below, so the
//! invariants (strictly increasing interior nodes, positive weights) hold by
//! construction. Nodes are stored mirror-symmetric about the interval
//! midpoint, which makes odd integrands on symmetric intervals sum to an exact
//! zero.
class QuadratureRule
{
public:
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  //! Affine image of this rule on [lo, hi].
  QuadratureRule mapped(double lo, double hi) const;

private:
  QuadratureRule(std::vector<double> nodes,
                 std::vector<double> weights,
                 double lo,
                 double hi);

  friend QuadratureRule gauss_legendre(double, double, int);
  friend QuadratureRule composite_gauss_legendre(std::span<const double>, int);

  std::vector<double> nodes_;
  std::vector<double> weights_;
  double lo_;
  double hi_;
};

//! n-node Gauss-Legendre rule on [lo, hi]; exact for degree <= 2n - 1.
QuadratureRule gauss_legendre(double lo, double hi, int n_nodes);

//! Reference rule on [-1, 1], cached per node count. Thread safe.
const QuadratureRule& gauss_legendre_reference(int n_nodes);

//! Gauss-Legendre panels between consecutive breakpoints. Breakpoints are
//! sorted and de-duplicated; at least two distinct values are required.
QuadratureRule composite_gauss_legendre(std::span<const double> breakpoints,
                                        int nodes_per_panel);

namespace detail {
[[noreturn]] void throw_non_finite(double node, double value);
[[noreturn]] void throw_non_finite(std::span<const double> node, double value);
}

//! Sum of w_i f(x_i). Terms are accumulated in mirrored pairs from the
//! outside in.
template<class F>
double
integrate_1d(const QuadratureRule& rule, F&& f)
{
  const auto x = rule.nodes();
  const auto w = rule.weights();
  const std::size_t n = x.size();
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = n - 1;
  for (; i < j; ++i, --j) {
    const double fi = f(x[i]);
    const double fj = f(x[j]);
    if (!std::isfinite(fi))
      detail::throw_non_finite(x[i], fi);
    if (!std::isfinite(fj))
      detail::throw_non_finite(x[j], fj);
    sum += w[i] * fi + w[j] * fj;
  }
  if (i == j) {
    const double fm = f(x[i]);
    if (!std::isfinite(fm))
      detail::throw_non_finite(x[i], fm);
    sum += w[i] * fm;
  }
  return sum;
}

//! Integrate over [lo, hi] with the affine image of `reference` (a rule on
//! [-1, 1]) without materializing the mapped rule.
template<class F>
double
integrate_mapped(const QuadratureRule& reference, double lo, double hi, F&& f)
{
  const auto t = reference.nodes();
  const auto w = reference.weights();
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const std::size_t n = t.size();
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = n - 1;
  for (; i < j; ++i, --j) {
    const double xi = mid - half * t[j];
    const double xj = mid + half * t[j];
    const double fi = f(xi);
    const double fj = f(xj);
    if (!std::isfinite(fi))
      detail::throw_non_finite(xi, fi);
    if (!std::isfinite(fj))
      detail::throw_non_finite(xj, fj);
    sum += w[i] * fi + w[j] * fj;
  }
  if (i == j) {
    const double fm = f(mid);
    if (!std::isfinite(fm))
      detail::throw_non_finite(mid, fm);
    sum += w[i] * fm;
  }
  return sum * half;
}

//! Tensor product of one-dimensional rules, one per integrated coordinate.
class TensorRule
{
public:
  explicit TensorRule(std::vector<QuadratureRule> axes);

  std::size_t dim() const noexcept { return axes_.size(); }
  std::size_t size() const noexcept;
  const QuadratureRule& axis(std::size_t l) const { return axes_.at(l); }
  const std::vector<QuadratureRule>& axes() const noexcept { return axes_; }

private:
  std::vector<QuadratureRule> axes_;
};

//! Full tensor sum of weighted evaluations. `f` receives a span of length
//! rule.dim().
template<class F>
double
integrate_tensor(const TensorRule& rule, F&& f)
{
  const std::size_t d = rule.dim();
  if (d == 0)
    throw std::invalid_argument("integrate_tensor: empty tensor rule");
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> point(d);
  double sum = 0.0;
  while (true) {
    double weight = 1.0;
    for (std::size_t l = 0; l < d; ++l) {
      point[l] = rule.axis(l).nodes()[idx[l]];
      weight *= rule.axis(l).weights()[idx[l]];
    }
    const double value = f(std::span<const double>(point));
    if (!std::isfinite(value))
      detail::throw_non_finite(point, value);
    sum += weight * value;

    std::size_t l = d;
    while (l > 0) {
      --l;
      if (++idx[l] < rule.axis(l).size())
        break;
      idx[l] = 0;
      if (l == 0)
        return sum;
    }
  }
}

} // namespace addreg
