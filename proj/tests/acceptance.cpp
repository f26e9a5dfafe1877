// Acceptance run: one PASS/FAIL line per criterion, exit code 1 if any fails.

#include "addreg/cli.hpp"
#include "addreg/config.hpp"
#include "addreg/design.hpp"
#include "addreg/inference.hpp"
#include "addreg/kernels.hpp"
#include "addreg/marginal.hpp"
#include "addreg/quadrature.hpp"
#include "addreg/rng.hpp"
#include "addreg/simulation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace addreg;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

int failures = 0;

void
criterion(int id, const std::string& title, double budget_seconds, const std::function<Outcome()>& body)
{
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = { false, std::string("exception: ") + e.what() };
  }
  const double secs =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < budget_seconds;
  const bool pass = o.pass && in_time;
  if (!pass)
    ++failures;
  char timing[96];
  std::snprintf(timing, sizeof timing, "%.1fs of %.0fs%s", secs, budget_seconds,
                in_time ? "" : ", over budget");
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " " << title << ": "
            << o.detail << " [" << timing << "]" << std::endl;
}

std::string
fmt(double v)
{
  char b[32];
  std::snprintf(b, sizeof b, "%.4g", v);
  return b;
}

std::string
join(const std::vector<double>& v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? " -> " : "") + fmt(v[i]);
  return s;
}

// Random dataset with uniform covariates on [0,1]^d and responses in [-2, 2].
Sample
random_sample(Philox4x32& g, std::size_t n, std::size_t d)
{
  std::vector<double> x(n * d), y(n);
  for (auto& v : x)
    v = g.uniform();
  for (auto& v : y)
    v = g.uniform(-2.0, 2.0);
  return Sample(d, std::move(x), std::move(y));
}

BandwidthPlan
random_plan(Philox4x32& g, std::size_t n, std::size_t d)
{
  BandwidthPlan p;
  for (std::size_t l = 0; l < d; ++l)
    p.h_axes.push_back(g.uniform(0.1, 0.3));
  p.ell = g.uniform(0.2, 0.35);
  p.h_single = g.uniform(0.1, 0.3);
  p.n = n;
  p.rate = {};
  return p;
}

IntegrationDensity
bumps(std::size_t d)
{
  std::vector<AxisDensity> axes;
  for (std::size_t l = 0; l < d; ++l)
    axes.push_back(polynomial_bump({ 0.15, 0.85 }, 2));
  return IntegrationDensity(std::move(axes));
}

// Plug-in field on a random dataset with a KDE divisor.
RegressionField
random_field(const Sample& s, const BandwidthPlan& plan)
{
  const KernelSet ks = make_kernel_set("epanechnikov", 2, s.d());
  const DensityField f = kde_fit(s, ks.density, plan.ell, 1e-3);
  return fit_plug_in(s, f, ks.regression, plan);
}

std::vector<std::size_t>
sizes()
{
  return { 500, 2000, 8000 };
}

// Settings for the theorem and coverage experiments; see README.
ExperimentSettings
theorem_settings()
{
  ExperimentSettings s;
  s.constants.c_h = 0.18;
  s.constants.h_exponent = -0.4;
  s.constants.c_ell = 0.25;
  s.grid_points = 641;
  s.variance.quadrature_nodes = 8;
  s.variance.density_table = 128;
  return s;
}

std::string
slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

} // namespace

int
main()
{
  criterion(1, "kernel moments", 1.0, [] {
    int checked = 0;
    bool ok = true;
    for (const auto& name : kernel_names())
      for (int order : { 2, 4, 6, 8 }) {
        const KernelSpec k = make_kernel(name, order);
        ok = ok && verify_order(k, order, 1e-8).pass;
        ++checked;
      }
    double worst = 0.0;
    for (const KernelSpec& base : { epanechnikov(), biweight(), triweight() }) {
      const KernelSpec k4 = raise_order(base, 4);
      worst = std::max({ worst, std::abs(k4.moment(2)), std::abs(k4.moment(0) - 1.0) });
    }
    ok = ok && worst < 1e-8;
    return Outcome{ ok, std::to_string(checked) + " kernels verified, order-4 max(|mu2|, |int K - 1|) = " +
                          fmt(worst) };
  });

  criterion(2, "zero-mean identity", 30.0, [] {
    Philox4x32 g(stream_key(2026, 2, 0, StreamPurpose::auxiliary));
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const std::size_t d = t % 2 == 0 ? 2 : 3;
      const std::size_t n = 10 + static_cast<std::size_t>(g.uniform() * 91.0);
      const Sample s = random_sample(g, n, d);
      const BandwidthPlan plan = random_plan(g, n, d);
      const RegressionField field = random_field(s, plan);
      const IntegrationDensity q = bumps(d);
      const FactorizedMarginal fm(field, q, 32);
      for (std::size_t l = 0; l < d; ++l) {
        // panels split at every kink keep the quadrature exact
        std::vector<double> breaks{ 0.15, 0.85 };
        const double r = plan.h_axes[l];
        for (std::size_t i = 0; i < n; ++i)
          for (double b : { s.x(i, l) - r, s.x(i, l), s.x(i, l) + r })
            if (b > 0.15 && b < 0.85)
              breaks.push_back(b);
        const QuadratureRule rule = composite_gauss_legendre(breaks, 8);
        const std::vector<double> nodes(rule.nodes().begin(), rule.nodes().end());
        const ComponentCurve c = fm.component(l, nodes);
        double total = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k)
          total += rule.weights()[k] * c.values[k] * q.axis(l)(nodes[k]);
        worst = std::max(worst, std::abs(total));
      }
    }
    return Outcome{ worst < 1e-6, "max |int eta_l q_l| over 50 datasets = " + fmt(worst) };
  });

  criterion(3, "factorized vs tensor quadrature", 120.0, [] {
    Philox4x32 g(stream_key(2026, 3, 0, StreamPurpose::auxiliary));
    double worst_eta = 0.0, worst_mu = 0.0;
    const std::vector<double> grid = linear_grid({ 0.1, 0.9 }, 9);
    MarginalOptions tensor;
    tensor.method = IntegrationMethod::tensor;
    for (int t = 0; t < 20; ++t) {
      const std::size_t d = t % 2 == 0 ? 2 : 3;
      // the tensor rule grows like n^d, so d = 3 uses the small end of the range
      const std::size_t n = d == 2 ? 20 + static_cast<std::size_t>(g.uniform() * 31.0)
                                   : 8 + static_cast<std::size_t>(g.uniform() * 7.0);
      const Sample s = random_sample(g, n, d);
      const BandwidthPlan plan = random_plan(g, n, d);
      const RegressionField field = random_field(s, plan);
      const IntegrationDensity q = bumps(d);
      const EvaluationDomain dom = EvaluationDomain::cube(d, { 0.1, 0.9 }, { 0.0, 1.0 });
      for (std::size_t l = 0; l < d; ++l) {
        const ComponentCurve a = component_estimate(l, grid, field, q, dom);
        const ComponentCurve b = component_estimate(l, grid, field, q, dom, tensor);
        for (std::size_t k = 0; k < grid.size(); ++k)
          worst_eta = std::max(worst_eta, std::abs(a.values[k] - b.values[k]));
        worst_mu = std::max(worst_mu, std::abs(a.centering - b.centering));
      }
      const KernelSet ks = make_kernel_set("epanechnikov", 2, d);
      const RegressionField single = fit_single_bandwidth(
        s, kde_fit(s, ks.density, plan.ell, 1e-3), ks.regression, plan);
      worst_mu = std::max(worst_mu, std::abs(additive_constant(single, q) -
                                             additive_constant(single, q, tensor)));
    }
    return Outcome{ worst_eta < 1e-6 && worst_mu < 1e-6,
                    "max |eta diff| = " + fmt(worst_eta) + ", max |mu diff| = " + fmt(worst_mu) };
  });

  criterion(4, "oracle/plug-in coupling", 300.0, [] {
    const MCReport r =
      run_coupling(make_design("reference"), ExperimentSettings{}, { 250, 1000, 4000 }, 100, 4);
    std::vector<double> med;
    for (const auto& s : r.summaries)
      med.push_back(s.sup_error->median);
    const bool ok = check_report(r).front().pass;
    return Outcome{ ok, "median sup|m_hat - m_oracle| " + join(med) };
  });

  const SimDesign reference = make_design("reference");

  criterion(5, "theorem 1 trend", 1200.0, [&] {
    const IntegrationDensity q = reference.integration_density();
    const KernelSpec K = make_kernel("epanechnikov", 2);
    const double sg = sigma_oracle(reference, q, K, 0).sigma;
    const double sq = sigma_oracle(reference, q, K, 0, OracleIntegrator::quasi_random).sigma;
    const double agree = std::abs(sg - sq) / sg;
    const MCReport r = run_theorem1(reference, theorem_settings(), sizes(), 200, 5);
    std::vector<double> gp, gm, tp, tm;
    for (const auto& s : r.summaries) {
      gp.push_back(s.rel_gap_plus->median);
      gm.push_back(s.rel_gap_minus->median);
      tp.push_back(s.t_plus->median);
      tm.push_back(s.t_minus->median);
    }
    bool ok = agree < 1e-3;
    for (const auto& c : check_report(r))
      ok = ok && c.pass;
    return Outcome{ ok, "sigma1 = " + fmt(sg) + " (quasi-random rel diff " + fmt(agree) +
                          "; squared-weight sigma1 = " + fmt(r.sigma_squared_weight[0]) +
                          "), median t+ " + join(tp) + ", t- " + join(tm) + ", gap+ " +
                          join(gp) + ", gap- " + join(gm) };
  });

  criterion(6, "coverage dichotomy", 1200.0, [&] {
    const MCReport r = run_coverage(reference, theorem_settings(), sizes(), 200, 0.5, 6);
    std::vector<double> lo, unit, up;
    for (const auto& s : r.summaries) {
      lo.push_back(*s.coverage_lower);
      unit.push_back(*s.coverage_unit);
      up.push_back(*s.coverage_upper);
    }
    bool ok = true;
    for (const auto& c : check_report(r))
      ok = ok && c.pass;
    return Outcome{ ok, "coverage at 0.5x " + join(lo) + ", 1x " + join(unit) + ", 1.5x " +
                          join(up) };
  });

  criterion(7, "theorem 2 trend", 1200.0, [&] {
    ExperimentSettings s = theorem_settings();
    s.grid_points = 161;
    const MCReport r = run_theorem2(reference, s, sizes(), 100, 7);
    std::vector<double> gp, tp;
    for (const auto& x : r.summaries) {
      gp.push_back(x.rel_gap_plus->median);
      tp.push_back(x.t_plus->median);
    }
    return Outcome{ check_report(r).front().pass,
                    "target sum sigma_l = " + fmt(r.target) + ", median t+ " + join(tp) +
                      ", gap+ " + join(gp) };
  });

  criterion(8, "dimensionality bench", 600.0, [] {
    ExperimentSettings s;
    s.constants.c_ell = 0.5;
    s.constants.c_h = 0.8;
    s.bench_c = 0.5;
    s.tensor_grid_points = 21;
    const MCReport r = run_dimensionality_bench(make_design("additive3"), s, { 4000 }, 50, 8);
    const NSummary& x = r.summaries.front();
    return Outcome{ check_report(r).front().pass,
                    "win fraction " + fmt(*x.win_fraction) + ", median sup error additive " +
                      fmt(x.sup_error->median) + " vs full " + fmt(x.sup_error_ref->median) };
  });

  criterion(9, "simulate determinism", 60.0, [] {
    const fs::path root = fs::temp_directory_path() / "addreg_acceptance_golden";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = root / "golden.ini";
    {
      std::ofstream o(cfg);
      o << "[estimation]\ngrid_points = 64\n[simulation]\nexperiment = coverage\n"
           "n_list = 500\nreps = 5\nseed = 9\n";
    }
    std::vector<std::string> names;
    for (const char* run : { "a", "b" }) {
      const std::string out = (root / run).string();
      const char* argv[] = { "addreg", "--config", cfg.c_str(), "--out", out.c_str(), "simulate" };
      std::ostringstream sink;
      if (run_cli(6, argv, sink, sink) != exit_ok)
        return Outcome{ false, "simulate failed: " + sink.str() };
    }
    bool same = true;
    for (const char* f : { "records.csv", "summary.json" })
      same = same && slurp(root / "a" / f) == slurp(root / "b" / f) &&
             !slurp(root / "a" / f).empty();
    fs::remove_all(root);
    return Outcome{ same, same ? "records.csv and summary.json identical across runs"
                               : "outputs differ between runs" };
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
