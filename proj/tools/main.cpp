#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imfault/app.hpp"
#include "imfault/error.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed, overrides the config file");
  cmd->add_option("--set", c.overrides, "override a config value, e.g. --set model.epochs=20");
  cmd->add_flag("--quiet", c.quiet, "suppress progress output");
}

imfault::app::CommandOptions resolve(const Common& c) {
  imfault::app::CommandOptions opt;
  std::optional<std::filesystem::path> path;
  if (!c.config.empty()) path = c.config;
  opt.config = imfault::app::load_run_config(path, c.overrides, c.seed);
  opt.quiet = c.quiet;
  return opt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-based induction machine fault diagnosis"};
  app.require_subcommand(1);

  Common common;
  std::string out, dataset, checkpoint, recording;

  auto* simulate = app.add_subcommand("simulate", "synthesize the fault catalog");
  add_common(simulate, common);
  simulate->add_option("--out", out, "dataset directory to write")->required();

  auto* train = app.add_subcommand("train", "train a model on a dataset");
  add_common(train, common);
  train->add_option("--dataset", dataset, "dataset directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", out, "checkpoint file to write")->required();

  auto* evaluate = app.add_subcommand("evaluate", "report metrics on the held-out test split");
  add_common(evaluate, common);
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--dataset", dataset, "dataset directory")->required()->check(CLI::ExistingDirectory);
  evaluate->add_option("--out", out, "report directory")->required();

  auto* diagnose = app.add_subcommand("diagnose", "diagnose one recording CSV, JSON on stdout");
  add_common(diagnose, common);
  diagnose->add_option("--checkpoint", checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--recording", recording, "recording CSV")->required()->check(CLI::ExistingFile);

  auto* ablate = app.add_subcommand("ablate", "train and compare the four model variants");
  add_common(ablate, common);
  ablate->add_option("--dataset", dataset, "dataset directory")->required()->check(CLI::ExistingDirectory);
  ablate->add_option("--out", out, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (simulate->parsed()) {
      imfault::app::cmd_simulate(resolve(common), out, std::cout);
    } else if (train->parsed()) {
      imfault::app::cmd_train(resolve(common), dataset, out, std::cout);
    } else if (evaluate->parsed()) {
      imfault::app::cmd_evaluate(resolve(common), checkpoint, dataset, out, std::cout);
    } else if (diagnose->parsed()) {
      imfault::app::cmd_diagnose(checkpoint, recording, std::cout);
    } else if (ablate->parsed()) {
      imfault::app::cmd_ablate(resolve(common), dataset, out, std::cout);
    }
  } catch (const imfault::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
