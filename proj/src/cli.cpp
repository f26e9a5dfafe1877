#include "addreg/cli.hpp"

#include "addreg/simulation.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace addreg {

namespace {

EvaluationDomain
config_domain(const RunConfig& c, std::size_t d)
{
  return EvaluationDomain::cube(d, c.domain.inner, c.domain.outer);
}

IntegrationDensity
config_q(const RunConfig& c, std::size_t d)
{
  std::vector<AxisDensity> axes;
  for (std::size_t l = 0; l < d; ++l)
    axes.push_back(polynomial_bump(c.domain.q_support, c.domain.q_smoothness));
  return IntegrationDensity(std::move(axes));
}

double
config_floor(const RunConfig& c)
{
  return std::isnan(c.settings.density_floor) ? default_density_floor(std::nullopt)
                                              : c.settings.density_floor;
}

struct Pipeline
{
  KernelSet kernels;
  EvaluationDomain domain;
  IntegrationDensity q;
  BandwidthPlan plan;
  DensityField density;
  RegressionField plug_in;
};

Pipeline
build_pipeline(const Sample& sample, const RunConfig& c)
{
  const std::size_t d = sample.d();
  const auto& s = c.settings;
  KernelSet kernels = make_kernel_set(s.kernel, s.k, d);
  EvaluationDomain domain = config_domain(c, d);
  IntegrationDensity q = config_q(c, d);
  q.check_inside(domain);
  BandwidthPlan plan = make_default_plan(sample.n(), d, s.k, s.constants, s.undersmoothed);
  DensityField density = kde_fit(sample, kernels.density, plan.ell, config_floor(c));
  RegressionField plug_in = fit_plug_in(sample, density, kernels.regression, plan);
  return Pipeline{ std::move(kernels), std::move(domain), std::move(q),
                   std::move(plan),    std::move(density), std::move(plug_in) };
}

std::vector<std::vector<double>>
grids_for(const EvaluationDomain& domain, std::size_t points)
{
  std::vector<std::vector<double>> grids;
  for (std::size_t l = 0; l < domain.dim(); ++l)
    grids.push_back(linear_grid(domain.inner(l), points));
  return grids;
}

AdditiveFit
assemble(const Sample& sample, const Pipeline& p, const RunConfig& c, std::size_t points)
{
  return additive_fit(sample, p.density, p.q, p.kernels.regression, p.kernels.regression,
                      p.plan, p.domain, grids_for(p.domain, points),
                      c.settings.constant_source, c.settings.marginal);
}

DatasetFit
fit_from_pipeline(const Sample& sample, const Pipeline& p, const RunConfig& c)
{
  DatasetFit out;
  out.plan = p.plan;
  out.fit = assemble(sample, p, c, c.settings.grid_points);
  out.mu_plug_in = out.fit.components.front().centering;
  out.density_floor = p.density.floor();
  for (std::size_t i = 0; i < sample.n(); ++i)
    if (p.density.raw(sample.row(i)) < p.density.floor())
      ++out.floor_hits;
  return out;
}

std::vector<BandCurve>
bands_on(const Sample& sample,
         const Pipeline& p,
         const RunConfig& c,
         const AdditiveFit& fit,
         std::vector<std::size_t>* clipped)
{
  std::vector<BandCurve> bands;
  for (std::size_t l = 0; l < sample.d(); ++l) {
    const ComponentCurve& curve = fit.components[l];
    const VarianceField var = variance_field(sample, p.density, p.kernels.regression, p.plan,
                                             p.q, curve.grid, c.settings.variance, l);
    if (clipped)
      clipped->push_back(var.clipped);
    const auto L = band_halfwidth(var.sigma_sq, p.plan.h_axes[l],
                                  p.kernels.regression.factor(l).l2_norm(), sample.n());
    bands.push_back(component_band(curve, L, c.band_factor));
  }
  return bands;
}

nlohmann::json
plan_json(const BandwidthPlan& plan)
{
  return { { "h", plan.h_axes }, { "ell", plan.ell }, { "h_single", plan.h_single } };
}

nlohmann::json
fit_json(const Sample& sample, const DatasetFit& f, const RunConfig& c)
{
  nlohmann::json j;
  j["n"] = sample.n();
  j["d"] = sample.d();
  j["kernel"] = c.settings.kernel;
  j["order"] = c.settings.k;
  j["density_kernel_order"] = c.settings.k * static_cast<int>(sample.d()) + 2;
  j["bandwidths"] = plan_json(f.plan);
  j["mu_n"] = f.fit.mu_n;
  j["constant_source"] = to_string(f.fit.constant_source);
  j["mu_plug_in"] = f.mu_plug_in;
  j["density_floor"] = f.density_floor;
  j["floor_hits"] = f.floor_hits;
  return j;
}

std::string
dump(const nlohmann::json& j)
{
  return j.dump(2) + "\n";
}

} // namespace

DatasetFit
fit_dataset(const Sample& sample, const RunConfig& config)
{
  const Pipeline p = build_pipeline(sample, config);
  return fit_from_pipeline(sample, p, config);
}

DatasetBands
bands_dataset(const Sample& sample, const RunConfig& config)
{
  const Pipeline p = build_pipeline(sample, config);
  DatasetBands out;
  out.fit = fit_from_pipeline(sample, p, config);
  out.bands = bands_on(sample, p, config, out.fit.fit, &out.clipped);
  if (p.plan.equal_axes()) {
    const AdditiveFit coarse = assemble(sample, p, config, config.settings.tensor_grid_points);
    const auto coarse_bands = bands_on(sample, p, config, coarse, nullptr);
    out.additive = additive_band(coarse, coarse_bands, coarse.components.front().centering);
  }
  return out;
}

OutputBundle
fit_outputs(const Sample& sample, const RunConfig& config)
{
  const DatasetFit f = fit_dataset(sample, config);
  OutputBundle bundle;
  std::ostringstream comp;
  write_components_csv(comp, f.fit.components);
  bundle.add("components.csv", comp.str());
  bundle.add("fit.json", dump(fit_json(sample, f, config)));
  return bundle;
}

OutputBundle
bands_outputs(const Sample& sample, const RunConfig& config)
{
  const DatasetBands b = bands_dataset(sample, config);
  OutputBundle bundle;
  std::ostringstream comp;
  write_components_csv(comp, b.fit.fit.components);
  bundle.add("components.csv", comp.str());
  for (std::size_t l = 0; l < b.bands.size(); ++l) {
    std::ostringstream o;
    write_band_csv(o, b.bands[l]);
    bundle.add("band_axis" + std::to_string(l + 1) + ".csv", o.str());
  }
  nlohmann::json j = fit_json(sample, b.fit, config);
  j["band_factor"] = config.band_factor;
  j["clipped"] = b.clipped;
  if (b.additive) {
    std::ostringstream o;
    write_additive_band_csv(o, *b.additive);
    bundle.add("additive_band.csv", o.str());
    j["additive_band"] = "additive_band.csv";
  } else {
    j["additive_band"] = nullptr;
  }
  bundle.add("bands.json", dump(j));
  return bundle;
}

MCReport
run_simulation(const RunConfig& c)
{
  const SimDesign design = make_design(c.design);
  switch (c.experiment) {
    case Experiment::theorem1:
      return run_theorem1(design, c.settings, c.n_list, c.reps, c.seed);
    case Experiment::theorem2:
      return run_theorem2(design, c.settings, c.n_list, c.reps, c.seed);
    case Experiment::coverage:
      return run_coverage(design, c.settings, c.n_list, c.reps, c.epsilon, c.seed);
    case Experiment::coupling:
      return run_coupling(design, c.settings, c.n_list, c.reps, c.seed);
    case Experiment::dimensionality:
      return run_dimensionality_bench(design, c.settings, c.n_list, c.reps, c.seed);
  }
  throw std::logic_error("unhandled experiment");
}

OutputBundle
simulate_outputs(const MCReport& report, const RunConfig& config)
{
  OutputBundle bundle;
  std::ostringstream rec;
  write_records_csv(rec, report, config.report_timings);
  bundle.add("records.csv", rec.str());
  bundle.add("summary.json", dump(report_json(report)));
  return bundle;
}

int
run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Marginal-integration additive regression: fitting, bands and Monte Carlo "
                "experiments" };
  app.set_version_flag("--version", "addreg 1.0");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool assert_flag = false;
  std::string out_dir = "out";
  app.add_option("--config", config_path, "Config file (INI)")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override simulation.seed");
  app.add_flag("--assert", assert_flag, "Exit with code 2 when acceptance checks fail");
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  std::string data_path;
  auto* fit = app.add_subcommand("fit", "Fit the additive components of a CSV data set");
  fit->add_option("data", data_path, "CSV with header x1,..,xd,y")->required();
  auto* bands = app.add_subcommand("bands", "Fit and emit confidence bands");
  bands->add_option("data", data_path, "CSV with header x1,..,xd,y")->required();
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
  auto* validate = app.add_subcommand("validate-kernel", "Print the moment table of a kernel");
  auto* print = app.add_subcommand("print-config", "Print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_validation;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (seed)
      config.seed = *seed;
    validate_config(config);

    if (print->parsed()) {
      out << format_config(config);
      return exit_ok;
    }

    if (validate->parsed()) {
      const KernelSpec kernel = make_kernel(config.settings.kernel, config.settings.k);
      const MomentReport report = verify_order(kernel, config.settings.k, 1e-8);
      out << "kernel " << kernel.name() << " order " << report.order << " tol 1e-08\n";
      out << "j,moment,target,ok\n";
      for (const auto& m : report.moments) {
        char line[128];
        std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%s\n", m.index.front(), m.value, m.target,
                      m.ok ? "yes" : "no");
        out << line;
      }
      out << (report.pass ? "PASS\n" : "FAIL\n");
      return (!report.pass && assert_flag) ? exit_assertion : exit_ok;
    }

    if (simulate->parsed()) {
      const SimDesign design = make_design(config.design);
      for (std::size_t n : config.n_list)
        validate_plan(config, n, design.d(), config.experiment == Experiment::theorem2);
      const MCReport report = run_simulation(config);
      simulate_outputs(report, config).commit(out_dir);
      out << "wrote " << out_dir << "/records.csv and " << out_dir << "/summary.json\n";
      if (assert_flag) {
        bool ok = true;
        for (const auto& check : check_report(report, config.thresholds)) {
          out << (check.pass ? "PASS " : "FAIL ") << check.name << ": " << check.detail << "\n";
          ok = ok && check.pass;
        }
        return ok ? exit_ok : exit_assertion;
      }
      return exit_ok;
    }

    const Sample sample = read_sample_csv(std::filesystem::path(data_path));
    validate_plan(config, sample.n(), sample.d(), false);
    const OutputBundle bundle =
      fit->parsed() ? fit_outputs(sample, config) : bands_outputs(sample, config);
    bundle.commit(out_dir);
    for (const auto& [name, content] : bundle.files())
      out << "wrote " << out_dir << "/" << name << "\n";
    return exit_ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_validation;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return exit_validation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_validation;
  }
}

} // namespace addreg
