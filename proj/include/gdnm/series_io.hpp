#pragma once

#include "gdnm/stats.hpp"

#include <iosfwd>
#include <string>

#include "json.hpp"

namespace gdnm {

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

/// Columns: grid, estimate, ci_low, ci_high, n.
void write_series_csv(std::ostream& out, const EstimateSeries& series);
std::string series_csv(const EstimateSeries& series);

nlohmann::json series_to_json(const EstimateSeries& series);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

} // namespace gdnm
