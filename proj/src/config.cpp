#include "addreg/config.hpp"

#include "addreg/report.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace addreg {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>&
schema()
{
  static const std::map<std::string, std::set<std::string>> s{
    { "kernel", { "name", "order" } },
    { "bandwidth",
      { "c_h", "h_exponent", "c_ell", "ell_exponent", "c_single", "single_exponent",
        "undersmoothed" } },
    { "domain", { "inner_lo", "inner_hi", "outer_lo", "outer_hi", "q_lo", "q_hi", "q_smoothness" } },
    { "estimation",
      { "grid_points", "tensor_grid_points", "quadrature_nodes", "panel_nodes", "method",
        "constant_source", "density_floor", "variance_nodes", "density_table", "band_factor" } },
    { "simulation",
      { "experiment", "design", "n_list", "reps", "epsilon", "seed", "threads", "bench_c",
        "bench_exponent", "report_timings" } },
    { "assert", { "max_rel_gap", "min_upper_coverage", "min_win_fraction" } },
  };
  return s;
}

double
to_double(const std::string& key, const std::string& text)
{
  if (text == "auto")
    return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size())
      throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
  }
}

long long
to_integer(const std::string& key, const std::string& text)
{
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size())
      throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
  }
}

std::size_t
to_count(const std::string& key, const std::string& text)
{
  const long long v = to_integer(key, text);
  if (v < 0)
    throw ConfigError("'" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

bool
to_bool(const std::string& key, const std::string& text)
{
  if (text == "true" || text == "1" || text == "yes")
    return true;
  if (text == "false" || text == "0" || text == "no")
    return false;
  throw ConfigError("'" + key + "': expected true or false, got '" + text + "'");
}

std::string
auto_or(double v)
{
  return std::isnan(v) ? "auto" : format_double(v);
}

} // namespace

RunConfig
parse_config(std::istream& in)
{
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      if (!body.data().empty())
        throw ConfigError("config keys must live in a [section]: '" + section + "'");
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (const auto& [key, node] : body) {
      if (!it->second.count(key))
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      const std::string v = node.data();
      const std::string full = section + "." + key;
      auto& s = c.settings;
      if (section == "kernel") {
        if (key == "name")
          s.kernel = v;
        else
          s.k = static_cast<int>(to_integer(full, v));
      } else if (section == "bandwidth") {
        if (key == "c_h")
          s.constants.c_h = to_double(full, v);
        else if (key == "h_exponent")
          s.constants.h_exponent = to_double(full, v);
        else if (key == "c_ell")
          s.constants.c_ell = to_double(full, v);
        else if (key == "ell_exponent")
          s.constants.ell_exponent = to_double(full, v);
        else if (key == "c_single")
          s.constants.c_single = to_double(full, v);
        else if (key == "single_exponent")
          s.constants.single_exponent = to_double(full, v);
        else
          s.undersmoothed = to_bool(full, v);
      } else if (section == "domain") {
        if (key == "inner_lo")
          c.domain.inner.lo = to_double(full, v);
        else if (key == "inner_hi")
          c.domain.inner.hi = to_double(full, v);
        else if (key == "outer_lo")
          c.domain.outer.lo = to_double(full, v);
        else if (key == "outer_hi")
          c.domain.outer.hi = to_double(full, v);
        else if (key == "q_lo")
          c.domain.q_support.lo = to_double(full, v);
        else if (key == "q_hi")
          c.domain.q_support.hi = to_double(full, v);
        else
          c.domain.q_smoothness = static_cast<int>(to_integer(full, v));
      } else if (section == "estimation") {
        if (key == "grid_points")
          s.grid_points = to_count(full, v);
        else if (key == "tensor_grid_points")
          s.tensor_grid_points = to_count(full, v);
        else if (key == "quadrature_nodes")
          s.marginal.quadrature_nodes = static_cast<int>(to_integer(full, v));
        else if (key == "panel_nodes")
          s.marginal.panel_nodes = static_cast<int>(to_integer(full, v));
        else if (key == "method") {
          if (v == "factorized")
            s.marginal.method = IntegrationMethod::factorized;
          else if (v == "tensor")
            s.marginal.method = IntegrationMethod::tensor;
          else
            throw ConfigError("'" + full + "' must be factorized or tensor");
        } else if (key == "constant_source") {
          if (v == "single_bandwidth")
            s.constant_source = ConstantSource::single_bandwidth;
          else if (v == "plug_in")
            s.constant_source = ConstantSource::plug_in;
          else
            throw ConfigError("'" + full + "' must be single_bandwidth or plug_in");
        } else if (key == "density_floor")
          s.density_floor = to_double(full, v);
        else if (key == "variance_nodes")
          s.variance.quadrature_nodes = static_cast<int>(to_integer(full, v));
        else if (key == "density_table")
          s.variance.density_table = to_count(full, v);
        else
          c.band_factor = to_double(full, v);
      } else if (section == "simulation") {
        if (key == "experiment") {
          try {
            c.experiment = parse_experiment(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
          }
        } else if (key == "design")
          c.design = v;
        else if (key == "n_list") {
          c.n_list.clear();
          std::stringstream ss(v);
          std::string item;
          while (std::getline(ss, item, ','))
            c.n_list.push_back(to_count(full, item.erase(0, item.find_first_not_of(' '))));
        } else if (key == "reps")
          c.reps = to_count(full, v);
        else if (key == "epsilon")
          c.epsilon = to_double(full, v);
        else if (key == "seed")
          c.seed = static_cast<std::uint64_t>(to_count(full, v));
        else if (key == "threads")
          s.threads = static_cast<unsigned>(to_count(full, v));
        else if (key == "bench_c")
          s.bench_c = to_double(full, v);
        else if (key == "bench_exponent")
          s.bench_exponent = to_double(full, v);
        else
          c.report_timings = to_bool(full, v);
      } else if (section == "assert") {
        if (key == "max_rel_gap")
          c.thresholds.max_rel_gap = to_double(full, v);
        else if (key == "min_upper_coverage")
          c.thresholds.min_upper_coverage = to_double(full, v);
        else
          c.thresholds.min_win_fraction = to_double(full, v);
      }
    }
  }
  return c;
}

RunConfig
load_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void
validate_config(const RunConfig& c)
{
  const auto& s = c.settings;
  auto require = [](bool ok, const std::string& msg) {
    if (!ok)
      throw ConfigError(msg);
  };
  try {
    (void)make_kernel(s.kernel, s.k);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  require(s.k >= 2 && s.k % 2 == 0, "kernel.order must be an even integer >= 2");
  const auto& pc = s.constants;
  require(pc.c_h > 0 && pc.c_ell > 0 && pc.c_single > 0,
          "bandwidth constants must be positive");
  for (double e : { pc.h_exponent, pc.ell_exponent, pc.single_exponent })
    require(std::isnan(e) || (e < 0.0 && e > -1.0), "bandwidth exponents must lie in (-1, 0)");
  const auto& d = c.domain;
  require(d.outer.lo < d.inner.lo && d.inner.lo < d.q_support.lo &&
            d.q_support.lo < d.q_support.hi && d.q_support.hi < d.inner.hi &&
            d.inner.hi < d.outer.hi,
          "domain must satisfy outer_lo < inner_lo < q_lo < q_hi < inner_hi < outer_hi");
  require(d.q_smoothness >= 0, "domain.q_smoothness must be non-negative");
  require(s.grid_points >= 2 && s.tensor_grid_points >= 2, "grids need at least 2 points");
  require(s.marginal.quadrature_nodes >= 1 && s.marginal.panel_nodes >= 1 &&
            s.variance.quadrature_nodes >= 1,
          "quadrature node counts must be positive");
  require(s.variance.density_table != 1, "estimation.density_table must be 0 or >= 2");
  require(std::isnan(s.density_floor) || s.density_floor > 0.0,
          "estimation.density_floor must be positive");
  require(c.band_factor >= 0.0, "estimation.band_factor must be non-negative");
  require(!c.n_list.empty(), "simulation.n_list must not be empty");
  for (std::size_t n : c.n_list)
    require(n >= 2, "simulation.n_list entries must be at least 2");
  require(c.reps >= 1, "simulation.reps must be positive");
  require(c.epsilon > 0.0 && c.epsilon < 1.0, "simulation.epsilon must lie in (0, 1)");
  require(s.threads >= 1, "simulation.threads must be positive");
  require(s.bench_c > 0.0, "simulation.bench_c must be positive");
  bool known = false;
  for (const auto& name : design_names())
    known = known || name == c.design;
  require(known, "unknown design '" + c.design + "'");
}

void
validate_plan(const RunConfig& c, std::size_t n, std::size_t d, bool require_equal)
{
  const BandwidthPlan plan =
    make_default_plan(n, d, c.settings.k, c.settings.constants, c.settings.undersmoothed);
  try {
    plan.validate(d);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const auto issues = plan_surrogate_violations(plan, require_equal);
  if (!issues.empty()) {
    std::string msg = "bandwidth plan for n=" + std::to_string(n) + " rejected:";
    for (const auto& i : issues)
      msg += " " + i + ";";
    throw ConfigError(msg);
  }
}

std::string
format_config(const RunConfig& c)
{
  const auto& s = c.settings;
  std::ostringstream o;
  o << "[kernel]\n"
    << "name = " << s.kernel << "\n"
    << "order = " << s.k << "\n\n"
    << "[bandwidth]\n"
    << "c_h = " << format_double(s.constants.c_h) << "\n"
    << "h_exponent = " << auto_or(s.constants.h_exponent) << "\n"
    << "c_ell = " << format_double(s.constants.c_ell) << "\n"
    << "ell_exponent = " << auto_or(s.constants.ell_exponent) << "\n"
    << "c_single = " << format_double(s.constants.c_single) << "\n"
    << "single_exponent = " << auto_or(s.constants.single_exponent) << "\n"
    << "undersmoothed = " << (s.undersmoothed ? "true" : "false") << "\n\n"
    << "[domain]\n"
    << "inner_lo = " << format_double(c.domain.inner.lo) << "\n"
    << "inner_hi = " << format_double(c.domain.inner.hi) << "\n"
    << "outer_lo = " << format_double(c.domain.outer.lo) << "\n"
    << "outer_hi = " << format_double(c.domain.outer.hi) << "\n"
    << "q_lo = " << format_double(c.domain.q_support.lo) << "\n"
    << "q_hi = " << format_double(c.domain.q_support.hi) << "\n"
    << "q_smoothness = " << c.domain.q_smoothness << "\n\n"
    << "[estimation]\n"
    << "grid_points = " << s.grid_points << "\n"
    << "tensor_grid_points = " << s.tensor_grid_points << "\n"
    << "quadrature_nodes = " << s.marginal.quadrature_nodes << "\n"
    << "panel_nodes = " << s.marginal.panel_nodes << "\n"
    << "method = "
    << (s.marginal.method == IntegrationMethod::factorized ? "factorized" : "tensor") << "\n"
    << "constant_source = " << to_string(s.constant_source) << "\n"
    << "density_floor = " << auto_or(s.density_floor) << "\n"
    << "variance_nodes = " << s.variance.quadrature_nodes << "\n"
    << "density_table = " << s.variance.density_table << "\n"
    << "band_factor = " << format_double(c.band_factor) << "\n\n"
    << "[simulation]\n"
    << "experiment = " << to_string(c.experiment) << "\n"
    << "design = " << c.design << "\n"
    << "n_list = ";
  for (std::size_t i = 0; i < c.n_list.size(); ++i)
    o << (i ? "," : "") << c.n_list[i];
  o << "\n"
    << "reps = " << c.reps << "\n"
    << "epsilon = " << format_double(c.epsilon) << "\n"
    << "seed = " << c.seed << "\n"
    << "threads = " << s.threads << "\n"
    << "bench_c = " << format_double(s.bench_c) << "\n"
    << "bench_exponent = " << auto_or(s.bench_exponent) << "\n"
    << "report_timings = " << (c.report_timings ? "true" : "false") << "\n\n"
    << "[assert]\n"
    << "max_rel_gap = " << format_double(c.thresholds.max_rel_gap) << "\n"
    << "min_upper_coverage = " << format_double(c.thresholds.min_upper_coverage) << "\n"
    << "min_win_fraction = " << format_double(c.thresholds.min_win_fraction) << "\n";
  return o.str();
}

} // namespace addreg
