#include <cstdio>
#include <functional>
#include <map>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace jmgt::cli;
  CLI::App app{"jmgt: simulator and verification runs for the third-order wave equation with memory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  long long seed = -1;
  bool quiet = false;
  app.add_option("--config", config_path, "YAML run configuration")->required();
  app.add_option("--out-dir", out_dir, "directory for the artifacts");
  app.add_option("--seed", seed, "overrides the config seed");
  app.add_option("--override", overrides, "key=value, dotted keys, repeatable");
  app.add_flag("--quiet", quiet, "no progress messages");
  app.fallthrough();

  const std::map<std::string, std::pair<std::string, std::function<int(const RunContext&)>>> cmds{
      {"simulate", {"time series CSV and summary JSON", run_simulate}},
      {"verify", {"dissipation checks on a recorded run", run_verify}},
      {"resolvent", {"discrete resolvent residuals on random data", run_resolvent}},
      {"picard", {"Picard iteration against the direct solver", run_picard}},
      {"scan", {"decay rate over (b / tau c^2, kernel mass)", run_scan}},
      {"convergence", {"error versus dt and N for a manufactured solution", run_convergence}},
  };
  for (const auto& [name, info] : cmds) app.add_subcommand(name, info.first);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (seed >= 0) overrides.push_back("seed=" + std::to_string(seed));
    RunContext ctx{load_config(config_path, overrides), out_dir, quiet};
    if (!quiet) {
      const auto adm = admissibility(ctx.cfg);
      std::fprintf(stderr, "jmgt: config %s, regime %s, cg2 %.6g\n", config_hash(ctx.cfg).c_str(),
                   adm["regime"].get<std::string>().c_str(), adm["cg2"].get<double>());
    }
    const std::string name = app.get_subcommands().front()->get_name();
    return cmds.at(name).second(ctx);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "jmgt: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "jmgt: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "jmgt: error: %s\n", e.what());
    return 1;
  }
}
