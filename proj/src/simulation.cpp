#include "addreg/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace addreg {

std::string
to_string(Experiment experiment)
{
  switch (experiment) {
    case Experiment::theorem1:
      return "theorem1";
    case Experiment::theorem2:
      return "theorem2";
    case Experiment::coverage:
      return "coverage";
    case Experiment::coupling:
      return "coupling";
    case Experiment::dimensionality:
      return "dimensionality";
  }
  return "unknown";
}

Experiment
parse_experiment(const std::string& name)
{
  for (Experiment e : { Experiment::theorem1, Experiment::theorem2, Experiment::coverage,
                        Experiment::coupling, Experiment::dimensionality })
    if (to_string(e) == name)
      return e;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

Quantiles
quantiles(std::vector<double> values)
{
  if (values.empty())
    throw std::invalid_argument("quantiles of an empty sample");
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double t = pos - static_cast<double>(lo);
    return values[lo] + t * (values[hi] - values[lo]);
  };
  return Quantiles{ at(0.25), at(0.5), at(0.75) };
}

void
summarize(MCReport& report)
{
  report.summaries.clear();
  for (std::size_t n : report.n_list) {
    NSummary s;
    s.n = n;
    std::vector<double> tp, tm, gp, gm, se, ser;
    std::size_t cl[3] = { 0, 0, 0 }, cc[3] = { 0, 0, 0 };
    std::size_t wins = 0, paired = 0;
    for (const auto& r : report.records) {
      if (r.n != n)
        continue;
      ++s.reps;
      s.clipped += r.clipped;
      if (!std::isnan(r.t_plus)) {
        tp.push_back(r.t_plus);
        tm.push_back(r.t_minus);
        if (report.target > 0.0) {
          gp.push_back(std::abs(r.t_plus - report.target) / report.target);
          gm.push_back(std::abs(r.t_minus - report.target) / report.target);
        }
      }
      if (!std::isnan(r.sup_error))
        se.push_back(r.sup_error);
      if (!std::isnan(r.sup_error_ref)) {
        ser.push_back(r.sup_error_ref);
        ++paired;
        if (r.sup_error < r.sup_error_ref)
          ++wins;
      }
      const int covers[3] = { r.cover_lower, r.cover_unit, r.cover_upper };
      for (int f = 0; f < 3; ++f)
        if (covers[f] >= 0) {
          ++cc[f];
          cl[f] += static_cast<std::size_t>(covers[f]);
        }
    }
    auto q = [](const std::vector<double>& v) -> std::optional<Quantiles> {
      if (v.empty())
        return std::nullopt;
      return quantiles(v);
    };
    s.t_plus = q(tp);
    s.t_minus = q(tm);
    s.rel_gap_plus = q(gp);
    s.rel_gap_minus = q(gm);
    s.sup_error = q(se);
    s.sup_error_ref = q(ser);
    auto frac = [](std::size_t a, std::size_t b) -> std::optional<double> {
      if (b == 0)
        return std::nullopt;
      return static_cast<double>(a) / static_cast<double>(b);
    };
    s.coverage_lower = frac(cl[0], cc[0]);
    s.coverage_unit = frac(cl[1], cc[1]);
    s.coverage_upper = frac(cl[2], cc[2]);
    s.win_fraction = frac(wins, paired);
    report.summaries.push_back(s);
  }
}

void
parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body)
{
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i)
      body(i);
    return;
  }
  std::atomic<std::size_t> next{ 0 };
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count)
        return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error)
          error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  for (unsigned t = 0; t < workers; ++t)
    pool.emplace_back(worker);
  for (auto& t : pool)
    t.join();
  if (error)
    std::rethrow_exception(error);
}

KernelSet
make_kernel_set(const std::string& name, int k, std::size_t d)
{
  const KernelSpec regression = make_kernel(name, k);
  const KernelSpec density = make_kernel(name, k * static_cast<int>(d) + 2);
  return KernelSet{ ProductKernel::uniform(regression, d), ProductKernel::uniform(density, d) };
}

double
resolve_floor(const ExperimentSettings& settings, const SimDesign& design)
{
  if (!std::isnan(settings.density_floor))
    return settings.density_floor;
  return default_density_floor(design.lower_bound());
}

FitContext
fit_context(const Sample& sample,
            const SimDesign& design,
            const KernelSet& kernels,
            const ExperimentSettings& settings)
{
  BandwidthPlan plan =
    make_default_plan(sample.n(), sample.d(), settings.k, settings.constants, settings.undersmoothed);
  DensityField density =
    kde_fit(sample, kernels.density, plan.ell, resolve_floor(settings, design));
  RegressionField plug_in = fit_plug_in(sample, density, kernels.regression, plan);
  return FitContext{ std::move(plan), std::move(density), std::move(plug_in) };
}

namespace {

using Clock = std::chrono::steady_clock;

struct Shared
{
  const SimDesign& design;
  const ExperimentSettings& settings;
  KernelSet kernels;
  IntegrationDensity q;
  EvaluationDomain domain;
};

Shared
make_shared_state(const SimDesign& design, const ExperimentSettings& settings)
{
  return Shared{ design, settings, make_kernel_set(settings.kernel, settings.k, design.d()),
                 design.integration_density(settings.k), design.domain() };
}

std::vector<ComponentCurve>
estimate_components(const RegressionField& plug_in,
                    const Shared& s,
                    const std::vector<std::vector<double>>& grids,
                    std::size_t axes)
{
  std::vector<ComponentCurve> out;
  if (s.settings.marginal.method == IntegrationMethod::factorized) {
    const FactorizedMarginal fm(plug_in, s.q, s.settings.marginal.quadrature_nodes);
    for (std::size_t l = 0; l < axes; ++l)
      out.push_back(fm.component(l, grids[l]));
  } else {
    for (std::size_t l = 0; l < axes; ++l)
      out.push_back(component_estimate(l, grids[l], plug_in, s.q, s.domain, s.settings.marginal));
  }
  return out;
}

std::vector<std::vector<double>>
axis_grids(const EvaluationDomain& domain, std::size_t points)
{
  std::vector<std::vector<double>> grids;
  for (std::size_t l = 0; l < domain.dim(); ++l)
    grids.push_back(linear_grid(domain.inner(l), points));
  return grids;
}

std::vector<double>
truth_on_tensor_grid(const SimDesign& design, const std::vector<std::vector<double>>& grids)
{
  std::vector<double> out;
  for_each_grid_point(grids, [&](std::span<const double> x) { out.push_back(design.m(x)); });
  return out;
}

std::vector<double>
sigmas(const SimDesign& design,
       const Shared& s,
       std::size_t axes,
       PhiWeight weight = PhiWeight::linear)
{
  std::vector<double> out;
  for (std::size_t l = 0; l < axes; ++l)
    out.push_back(sigma_oracle(design, s.q, s.kernels.regression.factor(l), l,
                               OracleIntegrator::gauss, 512, weight)
                    .sigma);
  return out;
}

template<class Body>
MCReport
drive(Experiment experiment,
      const SimDesign& design,
      const ExperimentSettings& settings,
      const std::vector<std::size_t>& n_list,
      std::size_t reps,
      std::uint64_t seed,
      Body body)
{
  if (n_list.empty() || reps == 0)
    throw std::invalid_argument("experiment needs at least one n and one replication");
  MCReport report;
  report.experiment = experiment;
  report.design = design.name();
  report.seed = seed;
  report.reps = reps;
  report.n_list = n_list;
  report.records.resize(n_list.size() * reps);
  parallel_for(report.records.size(), settings.threads, [&](std::size_t job) {
    const std::size_t slot = job / reps;
    const std::size_t rep = job % reps;
    const auto start = Clock::now();
    ReplicationRecord& r = report.records[job];
    r.n = n_list[slot];
    r.replication = rep;
    r.stream = stream_key(seed, slot, rep, StreamPurpose::covariates);
    Philox4x32 cov = make_stream(seed, slot, rep, StreamPurpose::covariates);
    Philox4x32 eps = make_stream(seed, slot, rep, StreamPurpose::noise);
    const Sample sample = design.generate(r.n, cov, eps);
    body(sample, r);
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  });
  return report;
}

double
max_abs_diff(std::span<const double> a, std::span<const double> b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void
check_plans(const ExperimentSettings& settings,
            const SimDesign& design,
            const std::vector<std::size_t>& n_list,
            bool require_equal)
{
  for (std::size_t n : n_list) {
    const BandwidthPlan plan =
      make_default_plan(n, design.d(), settings.k, settings.constants, settings.undersmoothed);
    plan.validate(design.d());
    if (require_equal && !plan.equal_axes())
      throw std::invalid_argument("equal bandwidths across axes are required");
    if (!(plan.h_axes[0] < 1.0))
      throw std::invalid_argument("bandwidth h_1 must be below 1");
  }
}

} // namespace

MCReport
run_theorem1(const SimDesign& design,
             const ExperimentSettings& settings,
             const std::vector<std::size_t>& n_list,
             std::size_t reps,
             std::uint64_t seed)
{
  check_plans(settings, design, n_list, false);
  const Shared s = make_shared_state(design, settings);
  const auto grids = axis_grids(s.domain, settings.grid_points);
  const ComponentCurve truth = true_component(0, grids[0], design.component(0), s.q.axis(0));
  const std::vector<double> sigma = sigmas(design, s, 1);

  MCReport report = drive(Experiment::theorem1, design, settings, n_list, reps, seed,
                          [&](const Sample& sample, ReplicationRecord& r) {
    const FitContext ctx = fit_context(sample, design, s.kernels, settings);
    const auto curves = estimate_components(ctx.plug_in, s, grids, 1);
    const TheoremStatistic t =
      theorem_statistic(curves[0].values, truth.values, ctx.plan.h_axes[0], r.n, sigma[0]);
    r.t_plus = t.t_plus;
    r.t_minus = t.t_minus;
    r.sup_error = max_abs_diff(curves[0].values, truth.values);
  });
  report.sigma = sigma;
  report.sigma_squared_weight = sigmas(design, s, 1, PhiWeight::squared);
  report.target = sigma[0];
  summarize(report);
  return report;
}

MCReport
run_theorem2(const SimDesign& design,
             const ExperimentSettings& settings,
             const std::vector<std::size_t>& n_list,
             std::size_t reps,
             std::uint64_t seed)
{
  check_plans(settings, design, n_list, true);
  const Shared s = make_shared_state(design, settings);
  const std::size_t d = design.d();
  const auto grids = axis_grids(s.domain, settings.grid_points);
  const std::vector<double> truth = truth_on_tensor_grid(design, grids);
  const std::vector<double> sigma = sigmas(design, s, d);
  double target = 0.0;
  for (double v : sigma)
    target += v;

  MCReport report = drive(Experiment::theorem2, design, settings, n_list, reps, seed,
                          [&](const Sample& sample, ReplicationRecord& r) {
    const FitContext ctx = fit_context(sample, design, s.kernels, settings);
    AdditiveFit fit;
    fit.components = estimate_components(ctx.plug_in, s, grids, d);
    fit.constant_source = settings.constant_source;
    if (settings.constant_source == ConstantSource::plug_in) {
      fit.mu_n = fit.components[0].centering;
    } else {
      const RegressionField single =
        fit_single_bandwidth(sample, ctx.density, s.kernels.regression, ctx.plan);
      fit.mu_n = additive_constant(single, s.q, settings.marginal);
    }
    std::vector<double> estimate;
    estimate.reserve(truth.size());
    std::vector<std::size_t> idx(d, 0);
    for (std::size_t flat = 0; flat < truth.size(); ++flat) {
      double v = fit.mu_n;
      for (std::size_t l = 0; l < d; ++l)
        v += fit.components[l].values[idx[l]];
      estimate.push_back(v);
      for (std::size_t l = d; l-- > 0;) {
        if (++idx[l] < grids[l].size())
          break;
        idx[l] = 0;
      }
    }
    const TheoremStatistic t =
      theorem_statistic(estimate, truth, ctx.plan.h_axes[0], r.n, target);
    r.t_plus = t.t_plus;
    r.t_minus = t.t_minus;
    r.sup_error = max_abs_diff(estimate, truth);
  });
  report.sigma = sigma;
  report.sigma_squared_weight = sigmas(design, s, d, PhiWeight::squared);
  report.target = target;
  summarize(report);
  return report;
}

MCReport
run_coverage(const SimDesign& design,
             const ExperimentSettings& settings,
             const std::vector<std::size_t>& n_list,
             std::size_t reps,
             double epsilon,
             std::uint64_t seed)
{
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  check_plans(settings, design, n_list, false);
  const Shared s = make_shared_state(design, settings);
  const auto grids = axis_grids(s.domain, settings.grid_points);
  const ComponentCurve truth = true_component(0, grids[0], design.component(0), s.q.axis(0));
  const std::vector<double> sigma = sigmas(design, s, 1);
  const double l2 = s.kernels.regression.factor(0).l2_norm();

  MCReport report = drive(Experiment::coverage, design, settings, n_list, reps, seed,
                          [&](const Sample& sample, ReplicationRecord& r) {
    const FitContext ctx = fit_context(sample, design, s.kernels, settings);
    const auto curves = estimate_components(ctx.plug_in, s, grids, 1);
    const VarianceField var = variance_field(sample, ctx.density, s.kernels.regression,
                                             ctx.plan, s.q, grids[0], settings.variance);
    const double h = ctx.plan.h_axes[0];
    const std::vector<double> L = band_halfwidth(var.sigma_sq, h, l2, r.n);
    r.cover_lower = component_band(curves[0], L, 1.0 - epsilon).contains(truth.values);
    r.cover_unit = component_band(curves[0], L, 1.0).contains(truth.values);
    r.cover_upper = component_band(curves[0], L, 1.0 + epsilon).contains(truth.values);
    r.clipped = var.clipped;
    const TheoremStatistic t = theorem_statistic(curves[0].values, truth.values, h, r.n, sigma[0]);
    r.t_plus = t.t_plus;
    r.t_minus = t.t_minus;
    r.sup_error = max_abs_diff(curves[0].values, truth.values);
  });
  report.sigma = sigma;
  report.sigma_squared_weight = sigmas(design, s, 1, PhiWeight::squared);
  report.target = sigma[0];
  report.epsilon = epsilon;
  summarize(report);
  return report;
}

MCReport
run_coupling(const SimDesign& design,
             const ExperimentSettings& settings,
             const std::vector<std::size_t>& n_list,
             std::size_t reps,
             std::uint64_t seed)
{
  check_plans(settings, design, n_list, false);
  const Shared s = make_shared_state(design, settings);
  const auto grids = axis_grids(s.domain, settings.tensor_grid_points);
  const DensityField truth_density =
    analytic_density(design.d(), [&design](std::span<const double> x) { return design.f(x); });

  MCReport report = drive(Experiment::coupling, design, settings, n_list, reps, seed,
                          [&](const Sample& sample, ReplicationRecord& r) {
    const FitContext ctx = fit_context(sample, design, s.kernels, settings);
    const RegressionField oracle =
      fit_oracle(sample, truth_density, s.kernels.regression, ctx.plan);
    double sup = 0.0;
    for_each_grid_point(grids, [&](std::span<const double> x) {
      sup = std::max(sup, std::abs(ctx.plug_in.evaluate(x) - oracle.evaluate(x)));
    });
    r.sup_error = sup;
  });
  summarize(report);
  return report;
}

MCReport
run_dimensionality_bench(const SimDesign& design,
                         const ExperimentSettings& settings,
                         const std::vector<std::size_t>& n_list,
                         std::size_t reps,
                         std::uint64_t seed)
{
  const std::size_t d = design.d();
  if (d < 2)
    throw std::invalid_argument("dimensionality bench needs d >= 2");
  check_plans(settings, design, n_list, false);
  const Shared s = make_shared_state(design, settings);
  const auto grids = axis_grids(s.domain, settings.tensor_grid_points);
  const std::vector<double> truth = truth_on_tensor_grid(design, grids);
  const double exponent = std::isnan(settings.bench_exponent)
                            ? -1.0 / (2.0 * settings.k + static_cast<double>(d))
                            : settings.bench_exponent;

  MCReport report = drive(Experiment::dimensionality, design, settings, n_list, reps, seed,
                          [&](const Sample& sample, ReplicationRecord& r) {
    const FitContext ctx = fit_context(sample, design, s.kernels, settings);
    const auto curves = estimate_components(ctx.plug_in, s, grids, d);
    BandwidthPlan full_plan = ctx.plan;
    full_plan.h_single = settings.bench_c * std::pow(static_cast<double>(r.n), exponent);
    const RegressionField full =
      fit_single_bandwidth(sample, ctx.density, s.kernels.regression, full_plan);
    double mu = 0.0;
    if (settings.constant_source == ConstantSource::plug_in) {
      mu = curves[0].centering;
    } else {
      const RegressionField single =
        fit_single_bandwidth(sample, ctx.density, s.kernels.regression, ctx.plan);
      mu = additive_constant(single, s.q, settings.marginal);
    }
    double add_err = 0.0, full_err = 0.0;
    std::size_t flat = 0;
    std::vector<std::size_t> idx(d, 0);
    for_each_grid_point(grids, [&](std::span<const double> x) {
      double v = mu;
      for (std::size_t l = 0; l < d; ++l)
        v += curves[l].values[idx[l]];
      add_err = std::max(add_err, std::abs(v - truth[flat]));
      full_err = std::max(full_err, std::abs(full.evaluate(x) - truth[flat]));
      ++flat;
      for (std::size_t l = d; l-- > 0;) {
        if (++idx[l] < grids[l].size())
          break;
        idx[l] = 0;
      }
    });
    r.sup_error = add_err;
    r.sup_error_ref = full_err;
  });
  summarize(report);
  return report;
}

} // namespace addreg

namespace addreg {

namespace {

std::string
series(const std::vector<double>& v)
{
  std::string s;
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.4f", i ? ", " : "", v[i]);
    s += buf;
  }
  return "[" + s + "]";
}

template<class Get>
std::vector<double>
collect(const MCReport& report, Get get)
{
  std::vector<double> out;
  for (const auto& s : report.summaries)
    out.push_back(get(s));
  return out;
}

bool
strictly_decreasing(const std::vector<double>& v)
{
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1]))
      return false;
  return true;
}

bool
non_decreasing(const std::vector<double>& v)
{
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[i - 1])
      return false;
  return true;
}

bool
non_increasing(const std::vector<double>& v)
{
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1])
      return false;
  return true;
}

double
median_or_nan(const std::optional<Quantiles>& q)
{
  return q ? q->median : std::numeric_limits<double>::quiet_NaN();
}

double
value_or_nan(const std::optional<double>& v)
{
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

} // namespace

std::vector<CheckResult>
check_report(const MCReport& report, const AcceptanceThresholds& thresholds)
{
  std::vector<CheckResult> out;
  if (report.summaries.empty())
    return { { "summaries present", false, "report has no summaries" } };
  switch (report.experiment) {
    case Experiment::theorem1: {
      for (int sign = 0; sign < 2; ++sign) {
        const auto gaps = collect(report, [&](const NSummary& s) {
          return median_or_nan(sign == 0 ? s.rel_gap_plus : s.rel_gap_minus);
        });
        const std::string tag = sign == 0 ? "t_plus" : "t_minus";
        out.push_back({ tag + " median relative gap strictly decreasing",
                        strictly_decreasing(gaps), series(gaps) });
        out.push_back({ tag + " median relative gap below threshold at largest n",
                        gaps.back() < thresholds.max_rel_gap, series({ gaps.back() }) });
      }
      break;
    }
    case Experiment::theorem2: {
      const auto gaps =
        collect(report, [](const NSummary& s) { return median_or_nan(s.rel_gap_plus); });
      out.push_back({ "t_plus median relative gap decreasing", strictly_decreasing(gaps),
                      series(gaps) });
      break;
    }
    case Experiment::coverage: {
      const auto upper =
        collect(report, [](const NSummary& s) { return value_or_nan(s.coverage_upper); });
      const auto lower =
        collect(report, [](const NSummary& s) { return value_or_nan(s.coverage_lower); });
      out.push_back({ "upper-factor coverage non-decreasing", non_decreasing(upper),
                      series(upper) });
      out.push_back({ "upper-factor coverage at largest n above threshold",
                      upper.back() >= thresholds.min_upper_coverage, series({ upper.back() }) });
      out.push_back({ "lower-factor coverage non-increasing", non_increasing(lower),
                      series(lower) });
      bool below = true;
      for (std::size_t i = 0; i < lower.size(); ++i)
        below = below && lower[i] < upper[i];
      out.push_back({ "lower-factor coverage below upper-factor coverage", below,
                      series(lower) + " vs " + series(upper) });
      break;
    }
    case Experiment::coupling: {
      const auto sup =
        collect(report, [](const NSummary& s) { return median_or_nan(s.sup_error); });
      out.push_back({ "median sup error strictly decreasing", strictly_decreasing(sup),
                      series(sup) });
      break;
    }
    case Experiment::dimensionality: {
      const auto wins =
        collect(report, [](const NSummary& s) { return value_or_nan(s.win_fraction); });
      bool ok = true;
      for (double w : wins)
        ok = ok && w >= thresholds.min_win_fraction;
      out.push_back({ "additive fit wins often enough", ok, series(wins) });
      break;
    }
  }
  return out;
}

} // namespace addreg
