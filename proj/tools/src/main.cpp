#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cgpkit_tools/runner.hpp"

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cgpkit::tools;

  CLI::App app{"Composite GP experiment runner"};
  app.require_subcommand(1);

  std::string name, config, out;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run one experiment: " + join(experiment_names()));
  run->add_option("name", name, "Experiment name")->required();
  run->add_option("--config", config, "JSON config")->required();
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--seed", seed, "Override the config seed");

  auto* sw = app.add_subcommand("sweep", "Run one experiment per value of a list-valued field");
  sw->add_option("--config", config, "JSON config with one list-valued field")->required();
  sw->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      const RunResult r = run_experiment(name, config, out, RunOptions{seed});
      std::cout << r.experiment << " " << r.config_hash << "\n";
      for (const auto& m : r.methods) {
        std::cout << "  " << m.method << ": " << m.seconds << " s";
        if (m.rmse) std::cout << ", rmse " << *m.rmse;
        std::cout << "\n";
      }
    } else {
      const auto results = sweep(config, out);
      std::cout << "sweep: " << results.size() << " points -> " << out << "/sweep.csv\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
