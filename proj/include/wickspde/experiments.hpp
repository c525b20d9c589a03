#pragma once
// Named experiments over the library operations, with deterministic artifact
// emission: summary.json, one CSV per result table, and a run manifest carrying
// the resolved config and pass/fail per tolerance check.

#include <string>
#include <vector>

#include "wickspde/config.hpp"

namespace wickspde {

inline constexpr const char* kVersionTag = "wickspde 1.0.0";

struct ResultTable {
  std::string name;                             // file stem ("norms" -> norms.csv)
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;   // cells already formatted
};

struct Metric {
  std::string name;
  double value = 0.0;
};

// Every tolerance check is normalized to "value <= bound".
struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct RunManifest {
  ExperimentConfig config;
  std::string version = kVersionTag;
  double wall_seconds = 0.0;    // only field that varies between identical runs
  std::vector<Metric> metrics;
  std::vector<Check> checks;
  bool pass = false;            // conjunction of the checks
};

struct RunResult {
  RunManifest manifest;
  std::vector<ResultTable> tables;
};

// Executes the named experiment. Pure computation: nothing is written to disk.
RunResult run_experiment(const ExperimentConfig& cfg);

// Creates the directory if needed and probes it with a scratch file; throws
// std::runtime_error("i/o error: ...") when it cannot be written.
void ensure_writable_dir(const std::string& dir);

// Writes summary.json, <table>.csv for each table, and manifest.json into
// result.manifest.config.out_dir. Returns the paths written, in order.
std::vector<std::string> emit_report(const RunResult& result);

}  // namespace wickspde
