#pragma once

#include "hexftc/simulation.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace hexftc {

std::vector<std::string> csv_columns();
std::vector<double> csv_row(const TelemetryRecord& rec);

/// Header row plus one row per record, 9 significant digits.
void write_csv(const std::vector<TelemetryRecord>& records, std::ostream& out);
/// Throws Error with the path on I/O failure.
void write_csv(const std::vector<TelemetryRecord>& records, const std::string& path);

/// Outcome summary as a JSON object string.
std::string summary_json(const SimulationResult& result);
/// Summary plus the CSV columns as arrays.
void write_json(const SimulationResult& result, const std::string& path);

}  // namespace hexftc
