#pragma once

#include "addreg/design.hpp"
#include "addreg/inference.hpp"
#include "addreg/marginal.hpp"
#include "addreg/regression.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace addreg {

//! Everything an experiment needs besides the design, sizes and seed.
struct ExperimentSettings
{
  std::string kernel = "epanechnikov";
  int k = 2;
  PlanConstants constants;
  bool undersmoothed = false;
  //! Points of the evaluation grid on each I_l.
  std::size_t grid_points = 128;
  //! Points per axis of tensor grids used for multivariate sup errors.
  std::size_t tensor_grid_points = 41;
  //! Density floor; NaN picks max(1e-3, b/2) from the design.
  double density_floor = std::numeric_limits<double>::quiet_NaN();
  MarginalOptions marginal;
  VarianceOptions variance;
  ConstantSource constant_source = ConstantSource::single_bandwidth;
  //! Bandwidth of the full-dimensional competitor in the dimensionality
  //! bench: c n^exponent, exponent NaN meaning -1/(2k+d).
  double bench_c = 0.5;
  double bench_exponent = std::numeric_limits<double>::quiet_NaN();
  //! Worker threads; results never depend on this value.
  unsigned threads = 1;
};

enum class Experiment
{
  theorem1,
  theorem2,
  coverage,
  coupling,
  dimensionality
};

std::string
to_string(Experiment experiment);
Experiment
parse_experiment(const std::string& name);

//! One (n, replication) work unit.
struct ReplicationRecord
{
  std::size_t n = 0;
  std::size_t replication = 0;
  std::uint64_t stream = 0; // covariate stream key
  double t_plus = std::numeric_limits<double>::quiet_NaN();
  double t_minus = std::numeric_limits<double>::quiet_NaN();
  //! Main sup error of the experiment (e.g. sup |m-hat - m-hat-hat|).
  double sup_error = std::numeric_limits<double>::quiet_NaN();
  //! Competing sup error (full-dimensional estimator in the bench).
  double sup_error_ref = std::numeric_limits<double>::quiet_NaN();
  //! Coverage at factors 1 - eps, 1, 1 + eps; -1 when not applicable.
  int cover_lower = -1;
  int cover_unit = -1;
  int cover_upper = -1;
  std::size_t clipped = 0;
  double seconds = 0.0;
};

struct Quantiles
{
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

//! Per-n aggregates recomputable from the records.
struct NSummary
{
  std::size_t n = 0;
  std::size_t reps = 0;
  std::optional<Quantiles> t_plus, t_minus, rel_gap_plus, rel_gap_minus;
  std::optional<Quantiles> sup_error, sup_error_ref;
  std::optional<double> coverage_lower, coverage_unit, coverage_upper;
  std::optional<double> win_fraction; // sup_error < sup_error_ref
  std::size_t clipped = 0;
};

struct MCReport
{
  Experiment experiment = Experiment::theorem1;
  std::string design;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::vector<std::size_t> n_list;
  double target = std::numeric_limits<double>::quiet_NaN();
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  //! Per-axis sigma_l from the oracle (theorem and coverage runs).
  std::vector<double> sigma;
  //! Diagnostic: sigma_l with the squared integration weight.
  std::vector<double> sigma_squared_weight;
  std::vector<ReplicationRecord> records; // ordered by (n, replication)
  std::vector<NSummary> summaries;
};

//! Type-7 quantiles (linear interpolation) of a non-empty sample.
Quantiles
quantiles(std::vector<double> values);

//! Rebuilds `summaries` from `records`.
void
summarize(MCReport& report);

//! Runs body(0..count-1) on up to `threads` workers. Each index is
//! processed exactly once; callers write results into per-index slots.
void
parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

//! Kernels used by the experiments: regression kernels of order k per axis
//! and the density kernel raised to order k d + 2.
struct KernelSet
{
  ProductKernel regression;
  ProductKernel density;
};

KernelSet
make_kernel_set(const std::string& name, int k, std::size_t d);

double
resolve_floor(const ExperimentSettings& settings, const SimDesign& design);

//! Fitted objects for one sample, shared by the experiments.
struct FitContext
{
  BandwidthPlan plan;
  DensityField density;
  RegressionField plug_in;
};

FitContext
fit_context(const Sample& sample,
            const SimDesign& design,
            const KernelSet& kernels,
            const ExperimentSettings& settings);

MCReport
run_theorem1(const SimDesign& design,
             const ExperimentSettings& settings,
             const std::vector<std::size_t>& n_list,
             std::size_t reps,
             std::uint64_t seed);

//! Rejects settings whose plans have unequal bandwidths.
MCReport
run_theorem2(const SimDesign& design,
             const ExperimentSettings& settings,
             const std::vector<std::size_t>& n_list,
             std::size_t reps,
             std::uint64_t seed);

MCReport
run_coverage(const SimDesign& design,
             const ExperimentSettings& settings,
             const std::vector<std::size_t>& n_list,
             std::size_t reps,
             double epsilon,
             std::uint64_t seed);

//! sup over the tensor grid of I of |m-hat - m-hat-hat|.
MCReport
run_coupling(const SimDesign& design,
             const ExperimentSettings& settings,
             const std::vector<std::size_t>& n_list,
             std::size_t reps,
             std::uint64_t seed);

//! Paired sup errors over I of the additive fit and the full-dimensional
//! single-bandwidth estimator.
MCReport
run_dimensionality_bench(const SimDesign& design,
                         const ExperimentSettings& settings,
                         const std::vector<std::size_t>& n_list,
                         std::size_t reps,
                         std::uint64_t seed);

} // namespace addreg

namespace addreg {

//! Thresholds for trend checks on finished reports.
struct AcceptanceThresholds
{
  double max_rel_gap = 0.35;        // theorem1, at the largest n
  double min_upper_coverage = 0.90; // coverage, at the largest n
  double min_win_fraction = 0.70;   // dimensionality, at every n
};

struct CheckResult
{
  std::string name;
  bool pass = false;
  std::string detail;
};

//! Trend checks appropriate to the report's experiment.
std::vector<CheckResult>
check_report(const MCReport& report, const AcceptanceThresholds& thresholds = {});

} // namespace addreg
