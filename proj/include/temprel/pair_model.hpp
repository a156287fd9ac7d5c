#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "temprel/corpus.hpp"
#include "temprel/cse.hpp"
#include "temprel/embeddings.hpp"
#include "temprel/inference.hpp"
#include "temprel/layers.hpp"
#include "temprel/optim.hpp"

namespace temprel {

/// How the encoder learns where the two events are: marker tokens around
/// each event, or concatenated hidden states at the event positions.
enum class EncoderKind { PositionIndicators, Concat };

std::string_view to_string(EncoderKind kind);
std::optional<EncoderKind> parse_encoder(std::string_view text);

struct ModelConfig {
  EncoderKind encoder = EncoderKind::Concat;
  std::size_t lstm_hidden = 64;  // per direction
  std::size_t ffnn_hidden = 64;
  std::size_t cse_bins = 10;
  std::size_t cse_bin_dim = 32;
  std::size_t max_tokens = 100;
  nn::TrainConfig train;

  /// Throws ConfigError.
  void validate() const;
};

enum class Marker : std::size_t { E1Open = 0, E1Close = 1, E2Open = 2, E2Close = 3 };
std::string_view marker_text(Marker m);

/// One position of the encoder input: a token row of `embeddings` or a
/// learned marker vector.
struct SequenceItem {
  bool is_marker = false;
  std::size_t index = 0;  // token row, or Marker value
};

struct PairInput {
  EncoderKind encoder = EncoderKind::Concat;
  nn::Tensor embeddings;            // [T x d], window tokens only
  std::vector<std::string> tokens;  // one per sequence item, markers as "<e1>" etc.
  std::vector<SequenceItem> sequence;
  std::size_t pos1 = 0;  // sequence position of the first event's head token
  std::size_t pos2 = 0;
};

/// Window = sentences from the earlier to the later event, symmetrically
/// truncated to max_tokens around the two events.
PairInput build_input(const Document& doc, const Event& e1, const Event& e2,
                      const EmbeddingProvider& provider, const ModelConfig& config);

/// BiLSTM pair encoder with a bin-embedding fused FFNN scorer over the four
/// labels.
class PairClassifier {
 public:
  PairClassifier() = default;
  PairClassifier(const ModelConfig& config, std::size_t embed_dim, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::size_t embed_dim() const { return embed_dim_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t representation_size() const;

  nn::Var encode_pair(nn::Tape& t, const PairInput& input);
  /// Without a bin the bin slot is a zero vector.
  nn::Var logits(nn::Tape& t, nn::Var representation, std::optional<std::size_t> cse_bin);
  nn::Var loss(nn::Tape& t, const PairInput& input, std::optional<std::size_t> cse_bin,
               Label gold);

  std::vector<double> representation(const PairInput& input) const;
  std::array<double, kNumLabels> score(const PairInput& input,
                                       std::optional<std::size_t> cse_bin) const;

  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;

  nlohmann::json to_json() const;
  static PairClassifier from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static PairClassifier load(const std::filesystem::path& path);

 private:
  ModelConfig config_;
  std::size_t embed_dim_ = 0;
  std::uint64_t seed_ = 0;
  nn::LstmParams forward_, backward_;
  nn::Parameter markers_;
  nn::Parameter bins_;
  nn::Ffnn head_;
};

/// Softmax probabilities from an encoded pair; throws std::out_of_range for
/// a bin outside [0, cse_bins).
std::array<double, kNumLabels> score_labels(const PairClassifier& model,
                                            std::span<const double> representation,
                                            std::optional<std::size_t> cse_bin);

/// A relation prepared for the classifier.
struct Instance {
  PairKey key;
  PairInput input;
  std::optional<std::size_t> cse_bin;
  std::optional<Label> gold;
};

std::vector<Instance> prepare_instances(const Corpus& corpus, const EmbeddingProvider& provider,
                                        const SiameseModel* cse, const ModelConfig& config);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double dev_accuracy = 0.0;
};

struct TrainResult {
  PairClassifier model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // 0: initialization returned
};

/// Mini-batch Adam on mean cross entropy with step decay. Keeps the epoch
/// with the best dev accuracy (earliest on ties); with an empty dev corpus
/// the last epoch is kept.
TrainResult train(const PairClassifier& init, const Corpus& train_corpus, const Corpus& dev_corpus,
                  const EmbeddingProvider& provider, const SiameseModel* cse,
                  const ModelConfig& config);

double accuracy_on(const PairClassifier& model, const std::vector<Instance>& instances);

/// One row per relation, in (doc, src, dst) order, labeled with the local
/// argmax. Documents are scored in parallel.
ConfidenceTable predict(const PairClassifier& model, const Corpus& corpus,
                        const EmbeddingProvider& provider, const SiameseModel* cse);
/// Serial reference for predict.
ConfidenceTable predict_serial(const PairClassifier& model, const Corpus& corpus,
                               const EmbeddingProvider& provider, const SiameseModel* cse);

}  // namespace temprel
