#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace csd::tools {

struct SummaryRow {
  std::string metric;
  std::string value;
  std::string unit;
};

struct RunReport {
  std::vector<std::string> artifacts;  // file names inside the output directory
  std::vector<SummaryRow> rows;        // as written to summary.csv

  // Value of the first row named `metric`; throws std::out_of_range.
  const std::string& value(const std::string& metric) const;
  bool has(const std::string& metric) const;
};

struct RunOptions {
  std::filesystem::path output_dir;  // created if missing
  std::ostream* log = nullptr;       // progress lines; null for silence
};

// Runs the experiment, writes its artifacts and summary.csv. Throws
// ConfigError / DomainError (bad input), NumericalError, or IoError.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options);

}  // namespace csd::tools
