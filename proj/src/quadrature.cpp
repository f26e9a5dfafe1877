#include "addreg/quadrature.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>

namespace addreg {

namespace {

std::string
describe_node(std::span<const double> node, double value)
{
  std::ostringstream os;
  os.precision(17);
  os << "integrand is not finite (" << value << ") at node (";
  for (std::size_t i = 0; i < node.size(); ++i)
    os << (i ? ", " : "") << node[i];
  os << ")";
  return os.str();
}

// Legendre nodes on [-1, 1] by Newton iteration on P_n, positive half first.
void
legendre_nodes(int n, std::vector<double>& x, std::vector<double>& w)
{
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / dp;
      z -= step;
      if (std::abs(step) < 1e-16)
        break;
    }
    // recompute the derivative at the converged root for the weight
    double p0 = 1.0;
    double p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double weight = 2.0 / ((1.0 - z * z) * dp * dp);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = weight;
    w[n - 1 - i] = weight;
  }
  if (n % 2 == 1)
    x[n / 2] = 0.0;
}

} // namespace

IntegrationError::IntegrationError(std::vector<double> node, double value)
  : std::runtime_error(describe_node(node, value))
  , node_(std::move(node))
  , value_(value)
{}

namespace detail {
void
throw_non_finite(double node, double value)
{
  throw IntegrationError({ node }, value);
}

void
throw_non_finite(std::span<const double> node, double value)
{
  throw IntegrationError(std::vector<double>(node.begin(), node.end()), value);
}
} // namespace detail

QuadratureRule::QuadratureRule(std::vector<double> nodes,
                               std::vector<double> weights,
                               double lo,
                               double hi)
  : nodes_(std::move(nodes))
  , weights_(std::move(weights))
  , lo_(lo)
  , hi_(hi)
{}

QuadratureRule
QuadratureRule::mapped(double lo, double hi) const
{
  if (!(lo < hi))
    throw std::invalid_argument("quadrature interval must satisfy lo < hi");
  const double scale = (hi - lo) / (hi_ - lo_);
  std::vector<double> x(nodes_.size());
  std::vector<double> w(weights_.size());
  // map mirrored pairs about the midpoint so the symmetry survives rounding
  const double mid = 0.5 * (lo + hi);
  const double old_mid = 0.5 * (lo_ + hi_);
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    if (j < i)
      break;
    const double offset = (nodes_[j] - old_mid) * scale;
    x[i] = mid - offset;
    x[j] = mid + offset;
    w[i] = weights_[i] * scale;
    w[j] = weights_[j] * scale;
  }
  return QuadratureRule(std::move(x), std::move(w), lo, hi);
}

QuadratureRule
gauss_legendre(double lo, double hi, int n_nodes)
{
  if (!(lo < hi))
    throw std::invalid_argument("gauss_legendre: degenerate interval (lo >= hi)");
  if (n_nodes < 1)
    throw std::invalid_argument("gauss_legendre: n_nodes must be positive");
  std::vector<double> x;
  std::vector<double> w;
  legendre_nodes(n_nodes, x, w);
  QuadratureRule reference(std::move(x), std::move(w), -1.0, 1.0);
  if (lo == -1.0 && hi == 1.0)
    return reference;
  return reference.mapped(lo, hi);
}

const QuadratureRule&
gauss_legendre_reference(int n_nodes)
{
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n_nodes];
  if (!slot)
    slot = std::make_unique<QuadratureRule>(gauss_legendre(-1.0, 1.0, n_nodes));
  return *slot;
}

QuadratureRule
composite_gauss_legendre(std::span<const double> breakpoints,
                         int nodes_per_panel)
{
  std::vector<double> b(breakpoints.begin(), breakpoints.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (b.size() < 2)
    throw std::invalid_argument(
      "composite_gauss_legendre: need two distinct breakpoints");
  const QuadratureRule& ref = gauss_legendre_reference(nodes_per_panel);
  std::vector<double> x;
  std::vector<double> w;
  x.reserve((b.size() - 1) * ref.size());
  w.reserve(x.capacity());
  for (std::size_t p = 0; p + 1 < b.size(); ++p) {
    const QuadratureRule panel = ref.mapped(b[p], b[p + 1]);
    x.insert(x.end(), panel.nodes().begin(), panel.nodes().end());
    w.insert(w.end(), panel.weights().begin(), panel.weights().end());
  }
  return QuadratureRule(std::move(x), std::move(w), b.front(), b.back());
}

TensorRule::TensorRule(std::vector<QuadratureRule> axes)
  : axes_(std::move(axes))
{}

std::size_t
TensorRule::size() const noexcept
{
  std::size_t total = axes_.empty() ? 0 : 1;
  for (const auto& a : axes_)
    total *= a.size();
  return total;
}

} // namespace addreg
