#pragma once

#include "addreg/simulation.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace addreg {

//! Bad configuration values; maps to exit code 1.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct DomainConfig
{
  Interval inner{ 0.1, 0.9 };
  Interval outer{ 0.0, 1.0 };
  Interval q_support{ 0.15, 0.85 };
  int q_smoothness = 2;
};

struct RunConfig
{
  ExperimentSettings settings;
  DomainConfig domain;
  //! Band factor used by the bands command.
  double band_factor = 1.0;
  Experiment experiment = Experiment::theorem1;
  std::string design = "reference";
  std::vector<std::size_t> n_list{ 500, 2000, 8000 };
  std::size_t reps = 200;
  double epsilon = 0.5;
  std::uint64_t seed = 1;
  bool report_timings = false;
  AcceptanceThresholds thresholds;
};

//! Parses INI text ("key = value" lines grouped in [sections]). Unknown
//! sections or keys are errors.
RunConfig
parse_config(std::istream& in);
RunConfig
load_config(const std::string& path);

//! Checks that do not depend on data: ranges, names, nesting.
void
validate_config(const RunConfig& config);

//! Bandwidth hypothesis surrogates for a sample size; throws ConfigError.
void
validate_plan(const RunConfig& config, std::size_t n, std::size_t d, bool require_equal);

//! INI text that parses back to `config`.
std::string
format_config(const RunConfig& config);

} // namespace addreg
