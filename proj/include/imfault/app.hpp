#pragma once
// Run configuration and the five command implementations behind the CLI.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "imfault/eval.hpp"
#include "imfault/machine_sim.hpp"

namespace imfault::app {

struct RunConfig {
  std::uint64_t seed = 1;
  sim::MachineSpec machine;
  sim::CatalogOptions catalog;
  eval::ExperimentConfig experiment;

  RunConfig();
};

// Master seed fan-out. Each module seed is derive_seed(master, "<tag>").
std::uint64_t catalog_seed(std::uint64_t master);

nlohmann::json to_json(const RunConfig& c);
// Missing keys keep their defaults. Unknown keys, wrong types and invalid
// values raise InvalidConfig naming the key path, e.g. "model.dropout".
RunConfig run_config_from_json(const nlohmann::json& j);
// Defaults when path is empty. `overrides` holds "key.path=value" strings;
// the value is parsed as JSON and falls back to a plain string.
RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<std::string>& overrides = {},
                          std::optional<std::uint64_t> seed = std::nullopt);

struct CommandOptions {
  RunConfig config;
  bool quiet = false;
};

void cmd_simulate(const CommandOptions& opt, const std::filesystem::path& out_dir, std::ostream& log);
void cmd_train(const CommandOptions& opt, const std::filesystem::path& dataset_dir,
               const std::filesystem::path& checkpoint_out, std::ostream& log);
void cmd_evaluate(const CommandOptions& opt, const std::filesystem::path& checkpoint,
                  const std::filesystem::path& dataset_dir, const std::filesystem::path& out_dir, std::ostream& log);
// Writes the diagnosis JSON document to `out`.
void cmd_diagnose(const std::filesystem::path& checkpoint, const std::filesystem::path& recording, std::ostream& out);
void cmd_ablate(const CommandOptions& opt, const std::filesystem::path& dataset_dir, const std::filesystem::path& out_dir,
                std::ostream& log);

nlohmann::json diagnosis_json(const std::string& recording_id, const model::Diagnosis& d, std::size_t windows);

}  // namespace imfault::app
