#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "temprel/label.hpp"
#include "temprel/layers.hpp"
#include "temprel/tape.hpp"

namespace temprel {

struct TemProbEntry {
  std::string v1;
  std::string v2;
  Label relation = Label::Before;
  std::uint64_t count = 0;
};

/// Verb-pair relation frequencies.
class TemProbTable {
 public:
  /// Returns false when (v1, v2, relation) is already present.
  bool add(TemProbEntry entry);

  const std::vector<TemProbEntry>& entries() const { return entries_; }
  /// Sorted lemma vocabulary.
  std::vector<std::string> vocabulary() const;
  /// Counts per label for the ordered pair (zeros when unseen).
  std::array<std::uint64_t, kNumLabels> counts(const std::string& v1, const std::string& v2) const;
  /// Ordered pairs present in the table, sorted.
  std::vector<std::pair<std::string, std::string>> pairs() const;
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<TemProbEntry> entries_;
  std::map<std::pair<std::string, std::string>, std::array<std::uint64_t, kNumLabels>> counts_;
  std::map<std::pair<std::string, std::string>, std::array<bool, kNumLabels>> seen_;
};

/// TSV "v1<TAB>v2<TAB>label<TAB>count".
TemProbTable read_temprob(std::istream& in);
TemProbTable load_temprob(const std::filesystem::path& path);
void write_temprob(const TemProbTable& table, std::ostream& out);

/// count(BEFORE) / (count(BEFORE) + count(AFTER)); empty when both are zero.
std::optional<double> target_before_prob(const TemProbTable& table, const std::string& v1,
                                         const std::string& v2);

struct CseConfig {
  std::size_t embed_dim = 64;
  std::size_t branch_hidden = 32;
  std::size_t combiner_hidden = 32;
  double lr = 1e-4;
  int epochs = 20;
  int batch_size = 500;
  double val_fraction = 0.2;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

/// Siamese scorer: both verbs pass through the same embedding table and the
/// same branch layer; a combiner over the concatenated branch outputs yields
/// one logit. Row 0 of the embedding table is the unknown-lemma row.
class SiameseModel {
 public:
  SiameseModel() = default;
  SiameseModel(std::vector<std::string> vocabulary, const CseConfig& config);

  const CseConfig& config() const { return config_; }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  std::size_t lemma_index(const std::string& lemma) const;

  nn::Var logit(nn::Tape& t, const std::string& v1, const std::string& v2);
  /// P(v1 starts before v2) in (0, 1).
  double score(const std::string& v1, const std::string& v2) const;
  std::vector<double> branch_output(const std::string& lemma) const;

  std::vector<nn::Parameter*> parameters();
  std::vector<const nn::Parameter*> parameters() const;

  nlohmann::json to_json() const;
  static SiameseModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static SiameseModel load(const std::filesystem::path& path);

 private:
  nn::Var branch(nn::Tape& t, nn::Var embed, nn::Var w, nn::Var b, std::size_t index);

  CseConfig config_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  nn::Parameter embed_;
  nn::Parameter branch_w_, branch_b_;
  nn::Ffnn combiner_;
};

double cse_score(const SiameseModel& model, const std::string& v1, const std::string& v2);

/// floor(score * n_bins) clamped to n_bins - 1. Throws std::domain_error for
/// a score outside [0, 1] or n_bins < 2.
std::size_t discretize(double score, std::size_t n_bins);

struct CseExample {
  std::string v1, v2;
  double target = 0.0;
  double weight = 0.0;
};

struct CseEpoch {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct CseTrainResult {
  SiameseModel model;
  std::vector<CseEpoch> history;
  int best_epoch = 0;  // 0: initialization kept
  std::vector<CseExample> train_examples;
  std::vector<CseExample> val_examples;
};

/// One example per ordered pair with a defined before-probability, weighted
/// by its BEFORE+AFTER count. Throws DataError when no such pair exists.
std::vector<CseExample> cse_examples(const TemProbTable& table);

/// Weighted mean binary cross entropy.
double cse_loss(SiameseModel& model, const std::vector<CseExample>& examples, bool with_grad);

CseTrainResult train_cse(const TemProbTable& table, const CseConfig& config);

}  // namespace temprel
