#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "temprel/label.hpp"

namespace temprel {

struct Event {
  std::string eid;
  std::size_t sent = 0;
  std::size_t tok = 0;
  std::string lemma;

  bool operator==(const Event&) const = default;
};

/// Directed (src, dst) pair; `label` is empty for prediction-only input.
struct RelationInstance {
  std::string doc_id;
  std::string src;
  std::string dst;
  std::optional<Label> label;

  bool operator==(const RelationInstance&) const = default;
};

struct Document {
  std::string id;
  std::vector<std::vector<std::string>> sentences;
  std::vector<Event> events;

  const Event* find_event(const std::string& eid) const;
  const Event& event(const std::string& eid) const;
  std::size_t token_count() const;

  bool operator==(const Document&) const = default;
};

struct Corpus {
  std::vector<Document> documents;
  std::vector<RelationInstance> relations;

  const Document* find_document(const std::string& id) const;
  const Document& document(const std::string& id) const;

  bool operator==(const Corpus&) const = default;
};

struct CorpusStats {
  std::size_t n_docs = 0;
  std::size_t n_events = 0;
  std::size_t n_relations = 0;
  std::array<std::size_t, kNumLabels> label_histogram{};
  std::size_t unlabeled = 0;
};

/// Parses JSON-lines, one document object per line. Throws DataError with
/// the offending 1-based line number.
Corpus read_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Checks every invariant of an in-memory corpus; throws DataError.
void validate(const Corpus& corpus);

/// Whole-document split. Dev receives round(dev_fraction * #docs) documents.
std::pair<Corpus, Corpus> split_dev(const Corpus& corpus, double dev_fraction,
                                    std::uint64_t seed);

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace temprel
