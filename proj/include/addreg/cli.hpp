#pragma once

#include "addreg/config.hpp"
#include "addreg/inference.hpp"
#include "addreg/marginal.hpp"
#include "addreg/report.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace addreg {

enum ExitCode : int
{
  exit_ok = 0,
  exit_validation = 1,
  exit_assertion = 2
};

struct DatasetFit
{
  BandwidthPlan plan;
  AdditiveFit fit;
  double mu_plug_in = 0.0;
  double density_floor = 0.0;
  //! Observations where the raw density estimate fell below the floor.
  std::size_t floor_hits = 0;
};

//! The fit command without I/O.
DatasetFit
fit_dataset(const Sample& sample, const RunConfig& config);

struct DatasetBands
{
  DatasetFit fit;
  std::vector<BandCurve> bands;
  std::vector<std::size_t> clipped;
  //! Present only when all bandwidths are equal.
  std::optional<AdditiveBand> additive;
};

//! The bands command without I/O.
DatasetBands
bands_dataset(const Sample& sample, const RunConfig& config);

//! Output files of each command, as written by the CLI.
OutputBundle
fit_outputs(const Sample& sample, const RunConfig& config);
OutputBundle
bands_outputs(const Sample& sample, const RunConfig& config);
OutputBundle
simulate_outputs(const MCReport& report, const RunConfig& config);

//! Runs the simulation named by the config.
MCReport
run_simulation(const RunConfig& config);

//! Entry point: returns the process exit code.
int
run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace addreg
