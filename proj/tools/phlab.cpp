#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "phlab/errors.hpp"
#include "runner.hpp"

namespace {

using nlohmann::json;
namespace cli = phlab::cli;

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw phlab::ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw phlab::ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

struct RunFlags {
  std::string config;
  std::string map;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> grid;
  bool quiet = false;
};

int run_command(const std::string& command, const RunFlags& fl) {
  json j = fl.config.empty() ? json::object() : read_json(fl.config);
  if (!j.is_object()) throw phlab::ConfigError("config must be a JSON object");
  if (j.contains("command") && j["command"] != command) {
    throw phlab::ConfigError("config is for command '" + j["command"].dump() + "', not '" + command + "'");
  }
  j["command"] = command;
  if (!fl.map.empty()) j["map"] = fl.map;
  if (fl.seed) j["seed"] = *fl.seed;
  if (!fl.out.empty()) j["output_dir"] = fl.out;
  if (fl.grid) {
    if (command != "certify-cones" && command != "minimality" && command != "ugibbs") {
      throw phlab::ConfigError("--grid does not apply to '" + command + "'");
    }
    j["parameters"]["grid_n"] = *fl.grid;
  }
  const cli::ExperimentConfig cfg = cli::parse_config(j);
  const cli::ReportBundle b = cli::run(cfg);
  cli::write_bundle(b, cfg.output_dir);
  if (!fl.quiet) {
    std::cout << b.report["result"].dump(2) << '\n';
    if (b.exit_code != 0) std::cerr << "phlab: " << b.report["error"].get<std::string>() << '\n';
    std::cerr << "report written to " << cfg.output_dir << "/report.json\n";
  }
  return b.exit_code;
}

int run_compare(const std::string& report, const std::string& golden, const std::string& tolerances, bool quiet) {
  const cli::ToleranceTable tol =
      tolerances.empty() ? cli::ToleranceTable{} : cli::tolerance_table_from_json(read_json(tolerances));
  const cli::GoldenComparison c = cli::compare_golden(read_json(report), read_json(golden), tol);
  if (!quiet) {
    for (const std::string& f : c.failures) std::cout << "FAIL " << f << '\n';
    std::cout << (c.pass ? "golden comparison passed" : "golden comparison failed") << '\n';
  }
  return c.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phlab: numerical experiments on partially hyperbolic endomorphisms of the 2-torus"};
  app.require_subcommand(1);

  RunFlags fl;
  std::uint64_t seed = 0;
  int grid = 0;
  std::string selected;
  const std::map<std::string, std::string> about = {
      {"certify-cones", "verify an invariant unstable cone field on a grid"},
      {"exponents", "Birkhoff estimates of the unstable and center exponents"},
      {"specialness", "spread of unstable directions over pasts of one point"},
      {"unstable-arc", "trace a local unstable arc and its center leaf"},
      {"minimality", "grid coverage of iterated unstable arcs"},
      {"ugibbs", "empirical u-Gibbs histogram from pushed arcs"},
      {"normal-form-check", "conjugacy residuals of the unstable and center charts"},
      {"stopping-times", "stopping times for the center cocycle"},
      {"drift", "center displacement over random coupled configurations"},
  };
  for (const std::string& name : cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", fl.config, "JSON config file");
    sub->add_option("--map", fl.map, "preset map name (f_A, f_B, example3, example4)");
    sub->add_option("--seed", seed, "64-bit seed, overrides the config");
    sub->add_option("--out", fl.out, "output directory");
    sub->add_option("--grid", grid, "grid size for cone, coverage and histogram commands")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", fl.quiet);
    sub->callback([&, name, sub] {
      selected = name;
      if (sub->count("--seed") > 0) fl.seed = seed;
      if (sub->count("--grid") > 0) fl.grid = grid;
    });
  }

  std::string report, golden, tolerances;
  bool cmp_quiet = false;
  CLI::App* cmp = app.add_subcommand("compare-golden", "compare a report.json against a golden file");
  cmp->add_option("report", report)->required();
  cmp->add_option("golden", golden)->required();
  cmp->add_option("--tolerances", tolerances, "JSON table of per-field tolerances");
  cmp->add_flag("--quiet", cmp_quiet);
  cmp->callback([&] { selected = "compare-golden"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (selected == "compare-golden") return run_compare(report, golden, tolerances, cmp_quiet);
    return run_command(selected, fl);
  } catch (const phlab::ConfigError& e) {
    std::cerr << "phlab: invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "phlab: invalid configuration: " << e.what() << '\n';
    return 2;
  } catch (const phlab::NumericalError& e) {
    std::cerr << "phlab: numerical failure: " << e.what() << '\n';
    return 3;
  }
}
