#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "flowlab/core.hpp"
#include "flowlab/experiments.hpp"

namespace flowlab {

namespace {

Check make(std::string name, double value, double limit, std::string rel, bool pass, std::string note) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.limit = limit;
  c.relation = std::move(rel);
  c.pass = pass;
  c.note = std::move(note);
  return c;
}

}  // namespace

Check check_le(std::string name, double value, double limit, std::string note) {
  return make(std::move(name), value, limit, "<=", value <= limit, std::move(note));
}

Check check_ge(std::string name, double value, double limit, std::string note) {
  return make(std::move(name), value, limit, ">=", value >= limit, std::move(note));
}

Check check_eq(std::string name, double value, double want, std::string note) {
  return make(std::move(name), value, want, "==", value == want, std::move(note));
}

Check check_in(std::string name, double value, double lo, double hi, std::string note) {
  Check c = make(std::move(name), value, lo, "in", value >= lo && value <= hi, std::move(note));
  c.limit_hi = hi;
  return c;
}

bool Report::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

nlohmann::json Report::to_json() const {
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j = {{"name", c.name}, {"value", c.value}, {"relation", c.relation},
                        {"limit", c.limit}, {"pass", c.pass}};
    if (c.relation == "in") j["limit_hi"] = c.limit_hi;
    if (!c.note.empty()) j["note"] = c.note;
    cs.push_back(j);
  }
  return {{"experiment", experiment}, {"seed", seed},      {"config", config},
          {"pass", pass()},           {"checks", cs},      {"results", results}};
}

std::string Report::csv() const {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < csv_header.size(); ++i) out << (i ? "," : "") << csv_header[i];
  out << "\n";
  for (const auto& row : csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

const std::vector<Experiment>& experiments() {
  static const std::vector<Experiment> all = {
      {"psi", "four-layer coupling construction of (x, y) -> (x, u(y)); error against delta",
       {"a", "dim", "deltas", "box", "resolution"}, exp_psi},
      {"grid_acf", "piecewise-constant conditioning construction f_n; L1 error against n",
       {"dim", "n_list", "target", "resolution"}, exp_grid_acf},
      {"triangular", "near-identity check, triangular factorization and recomposition of rotation flows",
       {"t", "t_far", "grid", "r_in", "r_out", "speed", "tol"}, exp_triangular},
      {"distributional", "Knothe-Rosenblatt comparison maps between grid measures with IPM certificates",
       {"cells_1d", "cells_2d", "certificate_factor", "sub_1d", "sub_2d"}, exp_distributional},
      {"node", "Gronwall certificates for perturbed and fitted vector fields",
       {"pairs", "n_probe", "epochs"}, exp_node},
      {"gl", "random affine maps realized by couplings and permutations", {"trials", "probes"}, exp_gl},
      {"ipm", "IPM inequality certificates on random grid-measure pairs",
       {"trials", "cells", "gamma"}, exp_ipm},
  };
  return all;
}

const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : experiments()) {
    if (e.name == name) return e;
  }
  std::string names;
  for (const auto& e : experiments()) names += (names.empty() ? "" : ", ") + e.name;
  fail(ErrorKind::kInvalidArgument, "unknown experiment '" + name + "' (available: " + names + ")");
}

Report run_experiment(const std::string& name, const Config& config, std::uint64_t seed) {
  const Experiment& e = find_experiment(name);
  config.require_known(e.keys);
  Report r = e.run(config, seed);
  r.experiment = e.name;
  r.seed = seed;
  r.config = config.to_json();
  return r;
}

void write_report(const Report& report, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  {
    std::ofstream out(p);
    if (!out) fail(ErrorKind::kInvalidArgument, "cannot write '" + path + "'");
    out << report.to_json().dump(2) << "\n";
  }
  if (!report.csv_rows.empty()) {
    std::filesystem::path csv = p;
    csv.replace_extension(".csv");
    std::ofstream out(csv);
    out << report.csv();
  }
}

}  // namespace flowlab
