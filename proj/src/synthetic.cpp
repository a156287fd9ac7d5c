#include "temprel/synthetic.hpp"

#include <stdexcept>

#include "temprel/rng.hpp"

namespace temprel {

namespace {

const std::vector<std::string> kFiller = {"the",    "a",     "officials", "said", "it",
                                          "was",    "later", "people",    "in",   "city",
                                          "report", "on",    "with",      "new",  "week"};

void add_filler(Rng& rng, std::vector<std::string>& out, std::size_t lo, std::size_t hi) {
  const std::size_t n = lo + rng.below(hi - lo + 1);
  for (std::size_t i = 0; i < n; ++i) out.push_back(kFiller[rng.below(kFiller.size())]);
}

}  // namespace

std::vector<std::string> lemma_family(char family, std::size_t size) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < size; ++i) out.push_back(std::string(1, family) + "lem" + std::to_string(i));
  return out;
}

Corpus synthetic_corpus(const SyntheticCorpusOptions& o) {
  if (o.n_instances == 0 || o.lemmas_per_family == 0)
    throw std::invalid_argument("synthetic_corpus: empty request");
  Rng rng(o.seed);
  const auto xs = lemma_family('x', o.lemmas_per_family);
  const auto ys = lemma_family('y', o.lemmas_per_family);
  Corpus c;
  std::size_t remaining = o.n_instances;
  for (std::size_t d = 0; remaining > 0; ++d) {
    const bool before = rng.below(2) == 0;
    const auto& lemmas = before ? xs : ys;
    // Three events give three relations; two give one.
    const std::size_t events = (remaining >= 3 && rng.below(2) == 0) ? 3 : 2;
    remaining -= events == 3 ? 3 : 1;

    Document doc;
    doc.id = o.doc_prefix + std::to_string(d);
    std::vector<std::string> sent;
    add_filler(rng, sent, 0, 2);
    for (std::size_t e = 0; e < events; ++e) {
      if (e > 0) {
        add_filler(rng, sent, 0, 2);
        sent.push_back(before ? kBeforeConnective : kAfterConnective);
        add_filler(rng, sent, 0, 2);
      }
      const std::string& lemma = lemmas[rng.below(lemmas.size())];
      doc.events.push_back({"e" + std::to_string(e + 1), 0, sent.size(), lemma});
      sent.push_back(lemma);
    }
    add_filler(rng, sent, 0, 2);
    doc.sentences.push_back(std::move(sent));
    const Label label = before ? Label::Before : Label::After;
    for (std::size_t i = 0; i < events; ++i)
      for (std::size_t j = i + 1; j < events; ++j)
        c.relations.push_back({doc.id, doc.events[i].eid, doc.events[j].eid, label});
    c.documents.push_back(std::move(doc));
  }
  return c;
}

SyntheticTemProb synthetic_temprob(const SyntheticTemProbOptions& o) {
  Rng rng(o.seed);
  SyntheticTemProb out;
  for (const char family : {'x', 'y'}) {
    const auto lemmas = lemma_family(family, o.lemmas_per_family);
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& a : lemmas)
      for (const auto& b : lemmas)
        if (a != b) pairs.emplace_back(a, b);
    if (o.pairs_per_family > pairs.size())
      throw std::invalid_argument("synthetic_temprob: not enough lemma pairs");
    rng.shuffle(pairs);
    const Label major = family == 'x' ? Label::Before : Label::After;
    const Label minor = family == 'x' ? Label::After : Label::Before;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (i >= o.pairs_per_family) {
        (family == 'x' ? out.held_out_x : out.held_out_y).push_back(pairs[i]);
        continue;
      }
      out.table.add({pairs[i].first, pairs[i].second, major, 50 + rng.below(51)});
      const std::uint64_t noise = rng.below(4);
      if (noise > 0) out.table.add({pairs[i].first, pairs[i].second, minor, noise});
    }
  }
  return out;
}

}  // namespace temprel
