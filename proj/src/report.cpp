#include "addreg/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace addreg {

std::string
format_double(double value)
{
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::vector<std::string>
split_row(const std::string& line)
{
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ','))
    cells.push_back(cell);
  if (!line.empty() && line.back() == ',')
    cells.emplace_back();
  return cells;
}

std::string
trim(std::string s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double
parse_number(const std::string& raw, std::size_t row, std::size_t column)
{
  const std::string text = trim(raw);
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value))
    throw DataError("row " + std::to_string(row) + ", column " + std::to_string(column) +
                      ": not a finite number: '" + text + "'",
                    row);
  return value;
}

} // namespace

Sample
read_sample_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || trim(line).empty())
    throw DataError("data file is empty (a header row is required)", 0);
  const std::size_t columns = split_row(trim(line)).size();
  if (columns < 3)
    throw DataError("need at least two covariate columns and one response column", 1);
  const std::size_t d = columns - 1;
  std::vector<double> x, y;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty())
      continue;
    const auto cells = split_row(trim(line));
    if (cells.size() != columns)
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(columns) +
                        " columns, found " + std::to_string(cells.size()),
                      row);
    for (std::size_t c = 0; c < d; ++c)
      x.push_back(parse_number(cells[c], row, c + 1));
    y.push_back(parse_number(cells[d], row, columns));
  }
  if (y.empty())
    throw DataError("data file has a header but no rows", 0);
  return Sample(d, std::move(x), std::move(y));
}

Sample
read_sample_csv(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open data file '" + path.string() + "'", 0);
  return read_sample_csv(in);
}

void
write_components_csv(std::ostream& out, const std::vector<ComponentCurve>& curves)
{
  out << "axis,x,eta_hat\n";
  for (const auto& c : curves)
    for (std::size_t g = 0; g < c.grid.size(); ++g)
      out << c.axis + 1 << ',' << format_double(c.grid[g]) << ','
          << format_double(c.values[g]) << '\n';
}

std::vector<ComponentCurve>
read_components_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || trim(line) != "axis,x,eta_hat")
    throw DataError("component file must start with 'axis,x,eta_hat'", 1);
  std::vector<ComponentCurve> curves;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty())
      continue;
    const auto cells = split_row(trim(line));
    if (cells.size() != 3)
      throw DataError("row " + std::to_string(row) + ": expected 3 columns", row);
    const double axis = parse_number(cells[0], row, 1);
    if (axis < 1.0 || axis != std::floor(axis))
      throw DataError("row " + std::to_string(row) + ": bad axis", row);
    const std::size_t l = static_cast<std::size_t>(axis) - 1;
    if (curves.empty() || curves.back().axis != l) {
      curves.emplace_back();
      curves.back().axis = l;
    }
    curves.back().grid.push_back(parse_number(cells[1], row, 2));
    curves.back().values.push_back(parse_number(cells[2], row, 3));
  }
  return curves;
}

void
write_band_csv(std::ostream& out, const BandCurve& band)
{
  out << "x,center,lower,upper,halfwidth\n";
  for (std::size_t g = 0; g < band.grid.size(); ++g)
    out << format_double(band.grid[g]) << ',' << format_double(band.center[g]) << ','
        << format_double(band.lower[g]) << ',' << format_double(band.upper[g]) << ','
        << format_double(band.halfwidth[g]) << '\n';
}

void
write_additive_band_csv(std::ostream& out, const AdditiveBand& band)
{
  const std::size_t d = band.grids.size();
  for (std::size_t l = 0; l < d; ++l)
    out << 'x' << l + 1 << ',';
  out << "center,lower,upper\n";
  std::size_t flat = 0;
  for_each_grid_point(band.grids, [&](std::span<const double> x) {
    for (double v : x)
      out << format_double(v) << ',';
    out << format_double(band.center[flat]) << ',' << format_double(band.lower[flat]) << ','
        << format_double(band.upper[flat]) << '\n';
    ++flat;
  });
}

void
write_records_csv(std::ostream& out, const MCReport& report, bool include_timings)
{
  out << "n,replication,stream,t_plus,t_minus,sup_error,sup_error_ref,"
         "cover_lower,cover_unit,cover_upper,clipped";
  if (include_timings)
    out << ",seconds";
  out << '\n';
  char key[24];
  for (const auto& r : report.records) {
    std::snprintf(key, sizeof key, "%016llx", static_cast<unsigned long long>(r.stream));
    out << r.n << ',' << r.replication << ',' << key << ',' << format_double(r.t_plus) << ','
        << format_double(r.t_minus) << ',' << format_double(r.sup_error) << ','
        << format_double(r.sup_error_ref) << ',' << r.cover_lower << ',' << r.cover_unit << ','
        << r.cover_upper << ',' << r.clipped;
    if (include_timings)
      out << ',' << format_double(r.seconds);
    out << '\n';
  }
}

namespace {

nlohmann::json
to_json(const std::optional<Quantiles>& q)
{
  if (!q)
    return nullptr;
  return { { "q25", q->q25 }, { "median", q->median }, { "q75", q->q75 } };
}

nlohmann::json
to_json(const std::optional<double>& v)
{
  if (!v)
    return nullptr;
  return *v;
}

nlohmann::json
number(double v)
{
  if (!std::isfinite(v))
    return nullptr;
  return v;
}

} // namespace

nlohmann::json
report_json(const MCReport& report)
{
  nlohmann::json j;
  j["experiment"] = to_string(report.experiment);
  j["design"] = report.design;
  j["seed"] = report.seed;
  j["reps"] = report.reps;
  j["n_list"] = report.n_list;
  j["target"] = number(report.target);
  j["epsilon"] = number(report.epsilon);
  j["sigma"] = report.sigma;
  j["sigma_squared_weight"] = report.sigma_squared_weight;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : report.summaries) {
    nlohmann::json row;
    row["n"] = s.n;
    row["reps"] = s.reps;
    row["t_plus"] = to_json(s.t_plus);
    row["t_minus"] = to_json(s.t_minus);
    row["rel_gap_plus"] = to_json(s.rel_gap_plus);
    row["rel_gap_minus"] = to_json(s.rel_gap_minus);
    row["sup_error"] = to_json(s.sup_error);
    row["sup_error_ref"] = to_json(s.sup_error_ref);
    row["coverage_lower"] = to_json(s.coverage_lower);
    row["coverage_unit"] = to_json(s.coverage_unit);
    row["coverage_upper"] = to_json(s.coverage_upper);
    row["win_fraction"] = to_json(s.win_fraction);
    row["clipped"] = s.clipped;
    rows.push_back(std::move(row));
  }
  j["summaries"] = std::move(rows);
  return j;
}

void
OutputBundle::add(const std::string& name, std::string content)
{
  if (name.empty() || name.find('/') != std::string::npos)
    throw std::invalid_argument("output names must be plain file names");
  files_[name] = std::move(content);
}

void
OutputBundle::commit(const std::filesystem::path& dir) const
{
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::pair<fs::path, fs::path>> staged;
  try {
    for (const auto& [name, content] : files_) {
      const fs::path tmp = dir / ("." + name + ".tmp");
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      out.close();
      if (!out)
        throw std::runtime_error("cannot write '" + tmp.string() + "'");
      staged.emplace_back(tmp, dir / name);
    }
  } catch (...) {
    for (const auto& s : staged) {
      std::error_code ec;
      fs::remove(s.first, ec);
    }
    throw;
  }
  for (const auto& [tmp, final_path] : staged)
    fs::rename(tmp, final_path);
}

} // namespace addreg
