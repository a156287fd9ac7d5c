#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "temprel/cse.hpp"
#include "temprel/embeddings.hpp"
#include "temprel/inference.hpp"
#include "temprel/pair_model.hpp"

namespace temprel {

enum class ProviderKind { Hash, Static, Contextual };

struct RunConfig {
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> dev_corpus;
  std::optional<std::filesystem::path> test_corpus;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> temprob;
  std::optional<std::filesystem::path> cse_checkpoint;
  std::optional<std::filesystem::path> model_checkpoint;
  std::optional<std::filesystem::path> predictions;
  std::optional<std::filesystem::path> inferred;
  std::optional<std::filesystem::path> eval_predictions;
  std::optional<std::filesystem::path> compare_a;
  std::optional<std::filesystem::path> compare_b;
  std::optional<std::filesystem::path> graph_input;
  std::filesystem::path output_dir = "out";

  ProviderKind provider = ProviderKind::Hash;
  std::size_t hash_dim = 32;
  std::uint64_t hash_seed = kDefaultHashSeed;
  bool use_cse = false;
  double dev_fraction = 0.2;
  std::uint64_t seed = 1;
  ScoreSpace score_space = ScoreSpace::Probability;
  std::string graph_op = "closure";

  ModelConfig model;
  CseConfig cse;

  /// Every key with its effective value, paths as written.
  nlohmann::json effective;
};

/// Defaults for every accepted key; null marks an unset path.
const nlohmann::json& config_defaults();

/// "key=value"; value parsed as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Validates keys and types, fills defaults and resolves relative paths
/// against `base_dir`. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Reads the file, applies overrides in order, then parses.
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// Throws ConfigError naming `key` when unset or missing on disk.
const std::filesystem::path& require_input(const RunConfig& config,
                                           const std::optional<std::filesystem::path>& path,
                                           const std::string& key);
const std::filesystem::path& require_output(const std::optional<std::filesystem::path>& path,
                                            const std::string& key);

EmbeddingProvider make_provider(const RunConfig& config);

}  // namespace temprel
