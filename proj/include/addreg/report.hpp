#pragma once

#include "addreg/density.hpp"
#include "addreg/inference.hpp"
#include "addreg/marginal.hpp"
#include "addreg/simulation.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace addreg {

//! Shortest text that reads back to the same double ("%.17g" style);
//! "nan" and "inf"/"-inf" for non-finite values.
std::string
format_double(double value);

//! Input file problems; `row` is 1-based counting the header, 0 when not
//! tied to a row.
class DataError : public std::runtime_error
{
public:
  DataError(const std::string& what, std::size_t row)
    : std::runtime_error(what)
    , row_(row)
  {
  }
  std::size_t row() const noexcept { return row_; }

private:
  std::size_t row_;
};

//! Reads "x1,..,xd,y" with a header row; d >= 2.
Sample
read_sample_csv(std::istream& in);
Sample
read_sample_csv(const std::filesystem::path& path);

//! Columns: axis, x, eta_hat (axis is 1-based).
void
write_components_csv(std::ostream& out, const std::vector<ComponentCurve>& curves);
std::vector<ComponentCurve>
read_components_csv(std::istream& in);

//! Columns: x, center, lower, upper, halfwidth.
void
write_band_csv(std::ostream& out, const BandCurve& band);

//! Columns: x1..xd, center, lower, upper.
void
write_additive_band_csv(std::ostream& out, const AdditiveBand& band);

//! Per-replication records. Timings are left out unless asked for, so that
//! repeated runs produce identical bytes.
void
write_records_csv(std::ostream& out, const MCReport& report, bool include_timings = false);

nlohmann::json
report_json(const MCReport& report);

//! Files collected in memory and written only once everything succeeded.
class OutputBundle
{
public:
  void add(const std::string& name, std::string content);
  const std::map<std::string, std::string>& files() const noexcept { return files_; }
  //! Writes every file into `dir` (created if missing) through temporary
  //! names followed by renames.
  void commit(const std::filesystem::path& dir) const;

private:
  std::map<std::string, std::string> files_;
};

} // namespace addreg
