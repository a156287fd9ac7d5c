#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "temprel/corpus.hpp"
#include "temprel/inference.hpp"
#include "temprel/label.hpp"
#include "temprel/tempgraph.hpp"

namespace temprel {

/// counts[gold][pred] in label order (b, a, e, v).
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumLabels>, kNumLabels> counts{};

  void add(Label gold, Label pred, std::uint64_t n = 1);
  std::uint64_t at(Label gold, Label pred) const { return counts[index_of(gold)][index_of(pred)]; }

  /// S: every instance.
  std::uint64_t total() const;
  /// S1: predictions that are not VAGUE.
  std::uint64_t predicted_relations() const;
  /// S2: gold labels that are not VAGUE.
  std::uint64_t gold_relations() const;
  /// C_bb + C_aa + C_ee.
  std::uint64_t correct_relations() const;
  std::uint64_t correct() const;

  bool operator==(const ConfusionMatrix&) const = default;
};

/// One entry per labeled gold relation; unlabeled relations are skipped.
/// A prediction stored in the opposite direction is reversed. Throws
/// DataError(MissingPrediction) when a gold pair has no prediction.
ConfusionMatrix confusion(const Corpus& gold, const Assignment& pred);

/// Throws DataError(Precondition) on an empty matrix.
double accuracy(const ConfusionMatrix& m);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Harmonic mean with 0 when p + r = 0.
double harmonic_mean(double p, double r);

/// VAGUE treated as no relation.
PrecisionRecall relation_f1(const ConfusionMatrix& m);

using GraphSet = std::map<std::string, TemporalGraph>;

GraphSet gold_graphs(const Corpus& gold);
GraphSet assignment_graphs(const Assignment& pred);

/// Precision of reduce(pred) against closure(gold), recall of reduce(gold)
/// against closure(pred), non-VAGUE edges only, counts pooled across
/// documents. Throws DataError(Inconsistent) for a graph whose closure fails.
PrecisionRecall awareness(const GraphSet& gold, const GraphSet& pred);

/// Mean of the three; inputs must all be fractions in [0, 1] or all be
/// percentages in [0, 100]. Throws std::domain_error on mixed scales.
double three_metric_average(double acc, double f1, double f_aware);

/// Per-instance correctness in the order `confusion` visits gold relations.
std::vector<bool> correctness(const Corpus& gold, const Assignment& pred);

struct LabelScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct EvalReport {
  ConfusionMatrix matrix;
  double acc = 0.0;
  PrecisionRecall relation;
  PrecisionRecall aware;
  double avg = 0.0;
  std::uint64_t n_instances = 0;
  std::array<LabelScores, kNumLabels> per_label{};
};

EvalReport evaluate(const Corpus& gold, const Assignment& pred);

/// Percentages, plus per-label scores, the matrix and evaluation metadata.
nlohmann::json to_json(const EvalReport& report);

}  // namespace temprel
