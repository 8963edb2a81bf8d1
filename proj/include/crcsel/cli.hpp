#pragma once

// Command-line front end. Every command reads explicit flags and files
// only; diagnostics go to `err`, payloads to files or `out`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crcsel/ensemble.hpp"
#include "crcsel/preprocess.hpp"
#include "crcsel/synth.hpp"

namespace crcsel {

enum ExitStatus : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitInvariant = 3,
};

/// Settings of the stage commands and `pipeline`, read from a JSON file.
/// Relative paths resolve against the config file's directory.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::size_t folds = 5;
  std::size_t k_top = 8;
  std::size_t k_bottom = 6;
  bool linearize = true;
  /// Either dataset + schema, or a surrogate spec generated in memory.
  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> schema;
  std::optional<SurrogateSpec> surrogate;
  std::filesystem::path out = "out";
  ExclusionConfig exclusion;
  /// Sweep attribute counts; empty means 1..min(20, attribute count).
  std::vector<std::size_t> sweep_k;
  SweepVariant sweep_variant = SweepVariant::Both;
  nlohmann::ordered_json svm = nlohmann::ordered_json::object();
  nlohmann::ordered_json mlp = nlohmann::ordered_json::object();

  /// Throws UsageError when seed is unset or paths collide.
  void validate() const;
  EnsembleConfig ensemble() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// args excludes the program name. Returns an ExitStatus.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crcsel
