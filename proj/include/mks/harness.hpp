#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mks/config.hpp"

namespace mks {

// Column-named numeric table; rows are written with 17 significant digits so a
// reread reproduces every value exactly. NaN is written as "nan".
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws SchemaError if absent
  double at(std::size_t row, const std::string& name) const { return rows[row][column(name)]; }

  friend bool operator==(const Table&, const Table&) = default;
};

struct ExperimentResult {
  ExperimentConfig config;
  Table raw;
  Table summary;
  std::vector<std::string> advisories;
  double wall_seconds = 0.0;
  // Empty on success. Otherwise the error that stopped the run; the tables then
  // hold every sample size completed before it.
  std::string failure;
};

struct RunOptions {
  int threads = 1;
  // Called from the orchestrating thread only; never sees replicate data.
  std::function<void(const std::string&)> progress;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Writes <dir>/raw.csv, <dir>/summary.csv and <dir>/result.json. The directory
// must exist. Wall time and advisories live only in the JSON sidecar, so the
// CSVs are byte-identical across reruns.
void write_results(const ExperimentResult& res, const std::string& dir);

struct StoredResult {
  Table raw;
  Table summary;
  std::string sidecar;  // JSON text
};
StoredResult read_results(const std::string& dir);

void write_table_csv(std::ostream& os, const Table& t);
Table read_table_csv(std::istream& is);

inline constexpr const char* kLibraryVersion = "0.3.0";

}  // namespace mks
