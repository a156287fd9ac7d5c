#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "temprel/label.hpp"

namespace temprel {

/// Scores of one directed event pair plus its current label (the local
/// argmax after predict, the global choice after inference).
struct ConfidenceRow {
  std::string doc_id;
  std::string src;
  std::string dst;
  std::array<double, kNumLabels> scores{};
  Label label = Label::Before;
};

struct ConfidenceTable {
  std::vector<ConfidenceRow> rows;

  /// Orders rows by (doc_id, src, dst).
  void sort();
};

struct PairKey {
  std::string doc_id;
  std::string src;
  std::string dst;

  auto operator<=>(const PairKey&) const = default;
};

struct Assignment {
  std::map<PairKey, Label> labels;
  double objective = 0.0;
  std::map<std::string, double> doc_objective;
};

enum class ScoreSpace { Probability, Log };

struct InferenceOptions {
  ScoreSpace space = ScoreSpace::Probability;
};

/// Argmax with ties resolved BEFORE < AFTER < EQUAL < VAGUE.
Label argmax_label(const std::array<double, kNumLabels>& scores);

/// Per-pair argmax; not necessarily consistent.
Assignment greedy_assign(const ConfidenceTable& conf, InferenceOptions options = {});

/// Exact global inference by branch and bound, one problem per document,
/// documents solved in parallel.
Assignment ilp_infer(const ConfidenceTable& conf, InferenceOptions options = {});
/// Same result as ilp_infer, documents solved one after another.
Assignment ilp_infer_serial(const ConfidenceTable& conf, InferenceOptions options = {});

inline constexpr std::size_t kBruteForceMaxPairs = 12;
/// Exhaustive 4^n enumeration per document; throws DataError(Precondition)
/// for documents with more than kBruteForceMaxPairs pairs.
Assignment brute_force_infer(const ConfidenceTable& conf, InferenceOptions options = {});

/// Violation of temporal transitivity. With `derived` unset, all three pairs
/// are in the assignment and ac is outside compose(ab, bc); with `derived`
/// set, the clash only shows after closure through unassigned pairs.
struct Violation {
  std::string doc_id;
  std::string a, b, c;
  Label ab, bc, ac;
  bool derived = false;
};

/// Empty iff every document graph satisfies all triple constraints and its
/// closure is consistent.
std::vector<Violation> verify_transitivity(const Assignment& assignment);

/// Sum of the chosen scores (after the score-space transform), per document
/// and overall, accumulated in canonical row order.
void score_assignment(const ConfidenceTable& conf, Assignment& assignment,
                      InferenceOptions options = {});

/// Labels currently stored in the rows.
Assignment assignment_from_table(const ConfidenceTable& conf);

/// JSON-lines {"doc","src","dst","scores":{...},"label"}.
ConfidenceTable read_predictions(std::istream& in);
ConfidenceTable load_predictions(const std::filesystem::path& path);
void write_predictions(const ConfidenceTable& conf, std::ostream& out);
void save_predictions(const ConfidenceTable& conf, const std::filesystem::path& path);

/// Copy of `conf` whose labels are taken from `assignment`.
ConfidenceTable relabel(const ConfidenceTable& conf, const Assignment& assignment);

/// Sidecar report: per-document objective, pair count, labels changed.
nlohmann::json inference_report(const ConfidenceTable& before, const Assignment& after);

}  // namespace temprel
