#include "temprel/config.hpp"

#include <fstream>

#include "temprel/error.hpp"

namespace temprel {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* const kPathKeys[] = {"corpus",      "dev_corpus",       "test_corpus",  "embeddings",
                                 "temprob",     "cse_checkpoint",   "model_checkpoint",
                                 "predictions", "inferred",         "eval_predictions",
                                 "compare_a",   "compare_b",        "graph_input"};

bool same_kind(const json& expected, const json& got) {
  if (expected.is_null()) return got.is_null() || got.is_string();
  if (expected.is_number_unsigned())
    return got.is_number_unsigned() || (got.is_number_integer() && got.get<std::int64_t>() >= 0);
  if (expected.is_number_integer()) return got.is_number_integer();
  if (expected.is_number()) return got.is_number();
  return expected.type() == got.type();
}

std::string kind_name(const json& expected) {
  if (expected.is_null()) return "a path string";
  if (expected.is_number_unsigned()) return "a non-negative integer";
  if (expected.is_number_integer()) return "an integer";
  if (expected.is_number()) return "a number";
  return std::string("a ") + expected.type_name();
}

}  // namespace

const json& config_defaults() {
  static const json defaults = [] {
    json j = json::object();
    for (const char* k : kPathKeys) j[k] = nullptr;
    j["output_dir"] = "out";
    j["provider"] = "hash";
    j["hash_dim"] = 32u;
    j["hash_seed"] = static_cast<std::uint64_t>(kDefaultHashSeed);
    j["use_cse"] = false;
    j["dev_fraction"] = 0.2;
    j["seed"] = 1u;
    j["score_space"] = "probability";
    j["graph_op"] = "closure";

    const ModelConfig m;
    j["encoder"] = std::string(to_string(m.encoder));
    j["lstm_hidden"] = m.lstm_hidden;
    j["ffnn_hidden"] = m.ffnn_hidden;
    j["cse_bins"] = m.cse_bins;
    j["cse_bin_dim"] = m.cse_bin_dim;
    j["max_tokens"] = m.max_tokens;
    j["lr"] = m.train.base_lr;
    j["epochs"] = static_cast<unsigned>(m.train.epochs);
    j["batch_size"] = static_cast<unsigned>(m.train.batch_size);
    j["lr_decay"] = m.train.lr_decay;
    j["lr_period"] = static_cast<unsigned>(m.train.lr_period);
    j["clip_norm"] = m.train.clip_norm;

    const CseConfig c;
    j["cse_embed_dim"] = c.embed_dim;
    j["cse_branch_hidden"] = c.branch_hidden;
    j["cse_combiner_hidden"] = c.combiner_hidden;
    j["cse_lr"] = c.lr;
    j["cse_epochs"] = static_cast<unsigned>(c.epochs);
    j["cse_batch_size"] = static_cast<unsigned>(c.batch_size);
    j["cse_val_fraction"] = c.val_fraction;
    return j;
  }();
  return defaults;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  j[key] = std::move(value);
}

RunConfig parse_config(const json& input, const fs::path& base_dir) {
  if (!input.is_object()) throw ConfigError("config must be a JSON object");
  const json& defaults = config_defaults();
  json j = defaults;
  for (const auto& [key, value] : input.items()) {
    if (!defaults.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    if (!same_kind(defaults[key], value))
      throw ConfigError("config key '" + key + "' must be " + kind_name(defaults[key]));
    j[key] = value;
  }

  RunConfig c;
  c.effective = j;
  auto path_of = [&](const char* key) -> std::optional<fs::path> {
    if (j[key].is_null()) return std::nullopt;
    fs::path p = j[key].get<std::string>();
    if (p.empty()) throw ConfigError("config key '" + std::string(key) + "' is empty");
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };
  c.corpus = path_of("corpus");
  c.dev_corpus = path_of("dev_corpus");
  c.test_corpus = path_of("test_corpus");
  c.embeddings = path_of("embeddings");
  c.temprob = path_of("temprob");
  c.cse_checkpoint = path_of("cse_checkpoint");
  c.model_checkpoint = path_of("model_checkpoint");
  c.predictions = path_of("predictions");
  c.inferred = path_of("inferred");
  c.eval_predictions = path_of("eval_predictions");
  c.compare_a = path_of("compare_a");
  c.compare_b = path_of("compare_b");
  c.graph_input = path_of("graph_input");
  {
    fs::path out = j["output_dir"].get<std::string>();
    c.output_dir = out.is_absolute() || base_dir.empty() ? out : base_dir / out;
  }

  const auto provider = j["provider"].get<std::string>();
  if (provider == "hash") c.provider = ProviderKind::Hash;
  else if (provider == "static") c.provider = ProviderKind::Static;
  else if (provider == "contextual") c.provider = ProviderKind::Contextual;
  else throw ConfigError("provider must be hash, static or contextual, not '" + provider + "'");
  if (c.provider != ProviderKind::Hash && !c.embeddings)
    throw ConfigError("provider '" + provider + "' needs the 'embeddings' path");

  c.hash_dim = j["hash_dim"].get<std::size_t>();
  if (c.hash_dim == 0) throw ConfigError("hash_dim must be positive");
  c.hash_seed = j["hash_seed"].get<std::uint64_t>();
  c.use_cse = j["use_cse"].get<bool>();
  c.dev_fraction = j["dev_fraction"].get<double>();
  if (!(c.dev_fraction >= 0.0 && c.dev_fraction < 1.0))
    throw ConfigError("dev_fraction must be in [0, 1)");
  c.seed = j["seed"].get<std::uint64_t>();

  const auto space = j["score_space"].get<std::string>();
  if (space == "probability") c.score_space = ScoreSpace::Probability;
  else if (space == "log") c.score_space = ScoreSpace::Log;
  else throw ConfigError("score_space must be probability or log");

  c.graph_op = j["graph_op"].get<std::string>();
  if (c.graph_op != "closure" && c.graph_op != "reduce" && c.graph_op != "is_consistent")
    throw ConfigError("graph_op must be closure, reduce or is_consistent");

  const auto encoder = parse_encoder(j["encoder"].get<std::string>());
  if (!encoder) throw ConfigError("encoder must be concat or pi");
  c.model.encoder = *encoder;
  c.model.lstm_hidden = j["lstm_hidden"].get<std::size_t>();
  c.model.ffnn_hidden = j["ffnn_hidden"].get<std::size_t>();
  c.model.cse_bins = j["cse_bins"].get<std::size_t>();
  c.model.cse_bin_dim = j["cse_bin_dim"].get<std::size_t>();
  c.model.max_tokens = j["max_tokens"].get<std::size_t>();
  c.model.train.base_lr = j["lr"].get<double>();
  c.model.train.epochs = j["epochs"].get<int>();
  c.model.train.batch_size = j["batch_size"].get<int>();
  c.model.train.lr_decay = j["lr_decay"].get<double>();
  c.model.train.lr_period = j["lr_period"].get<int>();
  c.model.train.clip_norm = j["clip_norm"].get<double>();
  c.model.train.seed = c.seed;
  c.model.validate();

  c.cse.embed_dim = j["cse_embed_dim"].get<std::size_t>();
  c.cse.branch_hidden = j["cse_branch_hidden"].get<std::size_t>();
  c.cse.combiner_hidden = j["cse_combiner_hidden"].get<std::size_t>();
  c.cse.lr = j["cse_lr"].get<double>();
  c.cse.epochs = j["cse_epochs"].get<int>();
  c.cse.batch_size = j["cse_batch_size"].get<int>();
  c.cse.val_fraction = j["cse_val_fraction"].get<double>();
  c.cse.clip_norm = c.model.train.clip_norm;
  c.cse.seed = c.seed;
  if (c.cse.embed_dim == 0 || c.cse.branch_hidden == 0 || c.cse.combiner_hidden == 0 ||
      c.cse.batch_size == 0 || !(c.cse.lr > 0.0))
    throw ConfigError("CSE sizes and learning rate must be positive");
  if (!(c.cse.val_fraction >= 0.0 && c.cse.val_fraction < 1.0))
    throw ConfigError("cse_val_fraction must be in [0, 1)");
  return c;
}

RunConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config '" + path.string() + "' is not valid JSON");
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& o : overrides) apply_override(j, o);
  return parse_config(j, path.parent_path());
}

const fs::path& require_input(const RunConfig&, const std::optional<fs::path>& path,
                              const std::string& key) {
  if (!path) throw ConfigError("config key '" + key + "' is required for this command");
  if (!fs::exists(*path))
    throw ConfigError("'" + key + "' path '" + path->string() + "' does not exist");
  return *path;
}

const fs::path& require_output(const std::optional<fs::path>& path, const std::string& key) {
  if (!path) throw ConfigError("config key '" + key + "' is required for this command");
  return *path;
}

EmbeddingProvider make_provider(const RunConfig& c) {
  switch (c.provider) {
    case ProviderKind::Static:
      return EmbeddingProvider(load_static(require_input(c, c.embeddings, "embeddings"), c.hash_seed));
    case ProviderKind::Contextual:
      return EmbeddingProvider(load_contextual(require_input(c, c.embeddings, "embeddings")));
    case ProviderKind::Hash:
      break;
  }
  return EmbeddingProvider(HashFallback{c.hash_dim, c.hash_seed});
}

}  // namespace temprel
