#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "temprel/corpus.hpp"
#include "temprel/cse.hpp"

namespace temprel {

/// Connective tokens of the synthetic corpus.
inline constexpr const char* kBeforeConnective = "zzbefore";
inline constexpr const char* kAfterConnective = "zzafter";

/// Lemmas "xlem0".. ('x' family, BEFORE) or "ylem0".. ('y' family, AFTER).
std::vector<std::string> lemma_family(char family, std::size_t size);

struct SyntheticCorpusOptions {
  std::size_t n_instances = 200;
  std::size_t lemmas_per_family = 10;
  std::uint64_t seed = 1;
  std::string doc_prefix = "syn";
};

/// One sentence per document with two or three events joined by the same
/// connective. "zzbefore" documents use x lemmas and every relation is
/// BEFORE; "zzafter" documents use y lemmas and every relation is AFTER.
/// Relations run from the earlier to the later event in the text, and the
/// total relation count equals n_instances exactly (n_instances >= 1).
Corpus synthetic_corpus(const SyntheticCorpusOptions& options);

struct SyntheticTemProbOptions {
  std::size_t pairs_per_family = 50;
  std::size_t lemmas_per_family = 10;
  std::uint64_t seed = 1;
};

struct SyntheticTemProb {
  TemProbTable table;
  /// Ordered same-family pairs left out of the table.
  std::vector<std::pair<std::string, std::string>> held_out_x;
  std::vector<std::pair<std::string, std::string>> held_out_y;
};

/// x-family pairs counted mostly BEFORE, y-family pairs mostly AFTER.
SyntheticTemProb synthetic_temprob(const SyntheticTemProbOptions& options);

}  // namespace temprel
