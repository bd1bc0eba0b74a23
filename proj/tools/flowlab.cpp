#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "flowlab/config.hpp"
#include "flowlab/experiments.hpp"
#include "flowlab/metrics.hpp"

using namespace flowlab;

namespace {

Box parse_box(const std::string& text, int dim) {
  const std::vector<double> v = parse_doubles(text);
  if (v.size() == 2) return Box::cube(dim, v[0], v[1]);
  if (static_cast<int>(v.size()) != 2 * dim) {
    fail(ErrorKind::kInvalidArgument, "--box: expected lo,hi or " + std::to_string(2 * dim) + " numbers");
  }
  Vec lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = v[2 * i];
    hi[i] = v[2 * i + 1];
  }
  return Box(lo, hi);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowlab: constructive flow-approximation experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run an experiment and write its JSON report");
  std::string name, config_path, out_path;
  std::uint64_t seed = 0;
  run->add_option("experiment", name, "experiment name (see 'flowlab list')")->required();
  run->add_option("--config", config_path, "flat key = value config file");
  run->add_option("--seed", seed, "random seed")->default_val(0);
  run->add_option("--out", out_path, "report path (.json); a .csv with curves is written alongside")->required();

  app.add_subcommand("list", "list experiments");

  auto* cert = app.add_subcommand("certify-ipm", "check the IPM inequalities between two grid measures");
  std::string mu_path, nu_path, box_text, kernel_name = "gaussian", cert_out;
  double gamma = 1.0;
  cert->add_option("--mu", mu_path, "measure file")->required();
  cert->add_option("--nu", nu_path, "measure file")->required();
  cert->add_option("--box", box_text, "compact set K as lo,hi or lo,hi per axis")->required();
  cert->add_option("--kernel", kernel_name, "gaussian or laplacian")->check(CLI::IsMember({"gaussian", "laplacian"}));
  cert->add_option("--gamma", gamma, "kernel bandwidth parameter");
  cert->add_option("--out", cert_out, "write the report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list")) {
      for (const auto& e : experiments()) std::cout << e.name << "\t" << e.summary << "\n";
      return 0;
    }
    if (app.got_subcommand("run")) {
      const Config config = config_path.empty() ? Config{} : Config::load(config_path);
      const Report report = run_experiment(name, config, seed);
      write_report(report, out_path);
      for (const auto& c : report.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.value << "\n";
      }
      std::cout << name << ": " << (report.pass() ? "PASS" : "FAIL") << " (" << out_path << ")\n";
      return report.pass() ? 0 : 1;
    }
    const GridMeasure mu = load_measure(mu_path);
    const GridMeasure nu = load_measure(nu_path);
    const Kernel k = kernel_name == "gaussian" ? Kernel::gaussian(gamma) : Kernel::laplacian(gamma);
    const CertificateReport r = certify_bounds(mu, nu, parse_box(box_text, mu.dim()), k);
    const std::string text = to_json(r).dump(2);
    if (cert_out.empty()) {
      std::cout << text << "\n";
    } else {
      const std::filesystem::path path(cert_out);
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      std::ofstream out(path);
      if (!out) fail(ErrorKind::kIo, "cannot write " + cert_out);
      out << text << "\n";
    }
    return r.all_pass() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
