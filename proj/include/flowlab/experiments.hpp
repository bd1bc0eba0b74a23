#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "flowlab/config.hpp"
#include "json.hpp"

namespace flowlab {

/// One falsifiable assertion of an experiment: `value` against `limit`.
struct Check {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;  // "<=", ">=", "==" or "in" (limit..limit_hi)
  double limit_hi = 0.0;
  bool pass = false;
  std::string note;
};

Check check_le(std::string name, double value, double limit, std::string note = "");
Check check_ge(std::string name, double value, double limit, std::string note = "");
Check check_in(std::string name, double value, double lo, double hi, std::string note = "");
Check check_eq(std::string name, double value, double want, std::string note = "");

struct Report {
  std::string experiment;
  std::uint64_t seed = 0;
  nlohmann::json config;
  nlohmann::json results = nlohmann::json::object();
  std::vector<Check> checks;
  std::vector<std::string> csv_header;
  std::vector<std::vector<double>> csv_rows;

  bool pass() const;
  nlohmann::json to_json() const;
  std::string csv() const;
};

struct Experiment {
  std::string name;
  std::string summary;
  std::vector<std::string> keys;  // accepted config keys
  std::function<Report(const Config&, std::uint64_t seed)> run;
};

const std::vector<Experiment>& experiments();
/// Throws kInvalidArgument for unknown names.
const Experiment& find_experiment(const std::string& name);
/// Validates the config keys, then runs.
Report run_experiment(const std::string& name, const Config& config, std::uint64_t seed);

/// Writes the JSON report to `path` and, when the report has curve rows, a
/// CSV next to it (same stem, .csv).
void write_report(const Report& report, const std::string& path);

Report exp_psi(const Config& c, std::uint64_t seed);
Report exp_grid_acf(const Config& c, std::uint64_t seed);
Report exp_triangular(const Config& c, std::uint64_t seed);
Report exp_distributional(const Config& c, std::uint64_t seed);
Report exp_node(const Config& c, std::uint64_t seed);
Report exp_gl(const Config& c, std::uint64_t seed);
Report exp_ipm(const Config& c, std::uint64_t seed);

}  // namespace flowlab
