#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "nodal_lab/nodal_lab.hpp"

namespace {

using nlohmann::json;
using namespace nodal_lab;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;

const std::map<std::string, std::pair<std::string, json>>& demos() {
  static const std::map<std::string, std::pair<std::string, json>> d = {
      {"frequency",
       {"N(0,r) of Re z^k, k = 1..4, on 40 radii",
        {{"id", "frequency"}, {"kind", "frequency-scan"}, {"family", {{"re_zk", {1, 2, 3, 4}}}}}}},
      {"doubling",
       {"L2 and sup doubling of a seeded random Almansi family",
        {{"id", "doubling"},
         {"kind", "doubling-scan"},
         {"family", {{"random", {{"seed", 7}, {"degree_cap", 6}, {"count", 4}}}}}}}},
      {"nodal",
       {"nodal length of Re z^k in B_1/2, k = 1..6",
        {{"id", "nodal"},
         {"kind", "nodal-measure"},
         {"family", {{"re_zk", {1, 2, 3, 4, 5, 6}}}},
         {"params", {{"grid_n", 512}}}}}},
      {"partition",
       {"dividing scan of Re z^6 on [-0.4, 0.4]^2 with A = 27",
        {{"id", "partition"},
         {"kind", "partition-scan"},
         {"family", {{"re_zk", {6}}}},
         {"params", {{"A", 27}, {"rule", "contraction"}}}}}},
      {"propagation",
       {"Cauchy data propagation for sin(mx)sinh(my)/sinh(m pi), m = 2..8",
        {{"id", "propagation"},
         {"kind", "propagation"},
         {"family", {{"harmonic_model", {2, 3, 4, 5, 6, 7, 8}}}},
         {"params", {{"grid", 256}}}}}},
      {"decomposition",
       {"D = D1 + D2 + D3 + D4 for two seeded random Almansi functions",
        {{"id", "decomposition"},
         {"kind", "decomposition"},
         {"family", {{"random", {{"seed", 11}, {"degree_cap", 4}, {"count", 2}}}}}}}},
      {"compare",
       {"grid solutions of a frozen-coefficient operator against the Laplacian",
        {{"id", "compare"}, {"kind", "compare"}, {"family", {{"re_zk", {2, 3}}}}, {"params", {{"resolution", 64}}}}}},
  };
  return d;
}

int cmd_run(const std::string& path) {
  const auto config = load_config(path);
  const auto rows = run_experiment(config);
  int failed = 0;
  for (const auto& r : rows) failed += r.ok ? 0 : 1;
  const auto written = write_outputs(config, rows);
  if (written.empty()) emit_report(rows, ReportFormat::csv, std::cout);
  for (const auto& w : written) std::cerr << "wrote " << w << "\n";
  std::cerr << config.tasks.size() << " task(s), " << rows.size() << " row(s), " << failed << " row failure(s)\n";
  return kExitOk;
}

int cmd_verify(const std::string& level_name, const std::string& out_path) {
  const auto level = verify_level_from_string(level_name);
  const auto summary = verify_suite(level, [](const CriterionResult& r) {
    std::cout << r.line() << std::endl;
    char buf[48];
    std::snprintf(buf, sizeof buf, "  (%.2f s)\n", r.seconds);
    std::cerr << buf;
  });
  const std::string report = summary.report();
  std::cout << report.substr(report.rfind("summary:"));
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw UsageError("--out", "cannot write '" + out_path + "'");
    out << report;
  }
  return summary.ok() ? kExitOk : kExitVerifyFailed;
}

int cmd_demo(const std::string& name) {
  const auto it = demos().find(name);
  if (it == demos().end()) throw UsageError("demo", "unknown demo '" + name + "' (try 'nodal-lab demo --list')");
  const auto config = parse_config({{"tasks", json::array({it->second.second})}});
  emit_report(run_experiment(config), ReportFormat::csv, std::cout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nodal-lab: experiments on frequency, doubling and nodal sets of biharmonic functions"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run the tasks of a JSON experiment config");
  run->add_option("config", config_path, "config file")->required();

  std::string level = "fast", out_path;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--level", level, "fast or full")->capture_default_str();
  verify->add_option("--out", out_path, "also write the report to this file");

  std::string demo_name;
  bool list = false;
  auto* demo = app.add_subcommand("demo", "run a built-in experiment and print CSV");
  demo->add_option("name", demo_name, "demo name");
  demo->add_flag("--list", list, "list demos");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) return cmd_run(config_path);
    if (*verify) return cmd_verify(level, out_path);
    if (list || demo_name.empty()) {
      for (const auto& [name, d] : demos()) std::cout << name << "  " << d.first << "\n";
      return demo_name.empty() && !list ? kExitUsage : kExitOk;
    }
    return cmd_demo(demo_name);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFailed;
  }
}
