#include "temprel/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "temprel/error.hpp"
#include "temprel/rng.hpp"

namespace temprel {

using nlohmann::json;

std::string to_string(DataErrorKind kind) {
  switch (kind) {
    case DataErrorKind::Io: return "io";
    case DataErrorKind::Parse: return "parse";
    case DataErrorKind::Schema: return "schema";
    case DataErrorKind::DanglingEvent: return "dangling_event";
    case DataErrorKind::DuplicatePair: return "duplicate_pair";
    case DataErrorKind::DuplicateId: return "duplicate_id";
    case DataErrorKind::TokenOutOfRange: return "token_out_of_range";
    case DataErrorKind::DimensionMismatch: return "dimension_mismatch";
    case DataErrorKind::HeaderMismatch: return "header_mismatch";
    case DataErrorKind::DuplicateEntry: return "duplicate_entry";
    case DataErrorKind::MissingContext: return "missing_context";
    case DataErrorKind::BadLabel: return "bad_label";
    case DataErrorKind::NegativeCount: return "negative_count";
    case DataErrorKind::MissingPrediction: return "missing_prediction";
    case DataErrorKind::Inconsistent: return "inconsistent";
    case DataErrorKind::Precondition: return "precondition";
  }
  return "unknown";
}

DataError::DataError(DataErrorKind kind, const std::string& what, std::size_t line)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
      kind_(kind),
      line_(line) {}

const Event* Document::find_event(const std::string& eid) const {
  for (const auto& e : events)
    if (e.eid == eid) return &e;
  return nullptr;
}

const Event& Document::event(const std::string& eid) const {
  if (const Event* e = find_event(eid)) return *e;
  throw DataError(DataErrorKind::DanglingEvent,
                  "document '" + id + "' has no event '" + eid + "'");
}

std::size_t Document::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

const Document* Corpus::find_document(const std::string& id) const {
  for (const auto& d : documents)
    if (d.id == id) return &d;
  return nullptr;
}

const Document& Corpus::document(const std::string& id) const {
  if (const Document* d = find_document(id)) return *d;
  throw DataError(DataErrorKind::DanglingEvent, "no document '" + id + "'");
}

namespace {

void validate_document(const Document& doc, std::size_t line) {
  if (doc.sentences.empty())
    throw DataError(DataErrorKind::Schema, "document '" + doc.id + "' has no sentences", line);
  for (std::size_t s = 0; s < doc.sentences.size(); ++s)
    if (doc.sentences[s].empty())
      throw DataError(DataErrorKind::Schema,
                      "document '" + doc.id + "' sentence " + std::to_string(s) + " is empty",
                      line);
  std::unordered_set<std::string> seen;
  for (const auto& e : doc.events) {
    if (!seen.insert(e.eid).second)
      throw DataError(DataErrorKind::DuplicateId,
                      "duplicate event id '" + e.eid + "' in document '" + doc.id + "'", line);
    if (e.sent >= doc.sentences.size() || e.tok >= doc.sentences[e.sent].size())
      throw DataError(DataErrorKind::TokenOutOfRange,
                      "event '" + e.eid + "' addresses sentence " + std::to_string(e.sent) +
                          " token " + std::to_string(e.tok) + " outside document '" + doc.id +
                          "'",
                      line);
  }
}

void validate_relations(const Document& doc, const std::vector<RelationInstance>& rels,
                        std::set<std::pair<std::string, std::string>>& pairs, std::size_t line) {
  for (const auto& r : rels) {
    for (const auto* eid : {&r.src, &r.dst})
      if (!doc.find_event(*eid))
        throw DataError(DataErrorKind::DanglingEvent,
                        "relation refers to unknown event \"" + *eid + "\" in document '" +
                            doc.id + "'",
                        line);
    if (r.src == r.dst)
      throw DataError(DataErrorKind::Schema, "relation from event '" + r.src + "' to itself",
                      line);
    auto key = std::minmax(r.src, r.dst);
    if (!pairs.insert({key.first, key.second}).second)
      throw DataError(DataErrorKind::DuplicatePair,
                      "duplicate relation between '" + r.src + "' and '" + r.dst +
                          "' in document '" + doc.id + "'",
                      line);
  }
}

template <class T>
T required(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw DataError(DataErrorKind::Schema, std::string("missing field '") + key + "'", line);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw DataError(DataErrorKind::Schema, std::string("field '") + key + "' has wrong type",
                    line);
  }
}

std::size_t required_index(const json& obj, const char* key, std::size_t line) {
  auto v = required<json>(obj, key, line);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw DataError(DataErrorKind::Schema,
                    std::string("field '") + key + "' must be a non-negative integer", line);
  return v.get<std::size_t>();
}

}  // namespace

Corpus read_corpus(std::istream& in) {
  Corpus corpus;
  std::unordered_set<std::string> doc_ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }))
      continue;
    json obj;
    try {
      obj = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DataError(DataErrorKind::Parse, e.what(), line);
    }
    if (!obj.is_object()) throw DataError(DataErrorKind::Parse, "expected a JSON object", line);

    Document doc;
    doc.id = required<std::string>(obj, "id", line);
    doc.sentences = required<std::vector<std::vector<std::string>>>(obj, "sentences", line);
    for (const auto& ev : required<json>(obj, "events", line)) {
      Event e;
      e.eid = required<std::string>(ev, "eid", line);
      e.sent = required_index(ev, "sent", line);
      e.tok = required_index(ev, "tok", line);
      e.lemma = required<std::string>(ev, "lemma", line);
      doc.events.push_back(std::move(e));
    }
    if (!doc_ids.insert(doc.id).second)
      throw DataError(DataErrorKind::DuplicateId, "duplicate document id '" + doc.id + "'", line);
    validate_document(doc, line);

    std::vector<RelationInstance> rels;
    if (auto it = obj.find("relations"); it != obj.end()) {
      for (const auto& rj : *it) {
        RelationInstance r;
        r.doc_id = doc.id;
        r.src = required<std::string>(rj, "src", line);
        r.dst = required<std::string>(rj, "dst", line);
        if (auto lit = rj.find("label"); lit != rj.end() && !lit->is_null()) {
          if (!lit->is_string())
            throw DataError(DataErrorKind::BadLabel, "label must be a string", line);
          r.label = parse_label(lit->get<std::string>());
          if (!r.label)
            throw DataError(DataErrorKind::BadLabel,
                            "unknown label '" + lit->get<std::string>() + "'", line);
        }
        rels.push_back(std::move(r));
      }
    }
    std::set<std::pair<std::string, std::string>> pairs;
    validate_relations(doc, rels, pairs, line);
    corpus.documents.push_back(std::move(doc));
    corpus.relations.insert(corpus.relations.end(), std::make_move_iterator(rels.begin()),
                            std::make_move_iterator(rels.end()));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorKind::Io, "cannot open corpus '" + path.string() + "'");
  return read_corpus(in);
}

void validate(const Corpus& corpus) {
  std::unordered_set<std::string> ids;
  std::map<std::string, std::vector<RelationInstance>> by_doc;
  for (const auto& d : corpus.documents) {
    if (!ids.insert(d.id).second)
      throw DataError(DataErrorKind::DuplicateId, "duplicate document id '" + d.id + "'");
    validate_document(d, 0);
  }
  for (const auto& r : corpus.relations) {
    if (!ids.count(r.doc_id))
      throw DataError(DataErrorKind::DanglingEvent,
                      "relation refers to unknown document '" + r.doc_id + "'");
    by_doc[r.doc_id].push_back(r);
  }
  for (const auto& [id, rels] : by_doc) {
    std::set<std::pair<std::string, std::string>> pairs;
    validate_relations(corpus.document(id), rels, pairs, 0);
  }
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  std::map<std::string, std::vector<const RelationInstance*>> by_doc;
  for (const auto& r : corpus.relations) by_doc[r.doc_id].push_back(&r);
  for (const auto& d : corpus.documents) {
    json obj;
    obj["id"] = d.id;
    obj["sentences"] = d.sentences;
    obj["events"] = json::array();
    for (const auto& e : d.events)
      obj["events"].push_back({{"eid", e.eid}, {"sent", e.sent}, {"tok", e.tok}, {"lemma", e.lemma}});
    obj["relations"] = json::array();
    for (const auto* r : by_doc[d.id]) {
      json rj = {{"src", r->src}, {"dst", r->dst}};
      if (r->label) rj["label"] = std::string(to_string(*r->label));
      obj["relations"].push_back(std::move(rj));
    }
    out << obj.dump() << '\n';
  }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(DataErrorKind::Io, "cannot write '" + path.string() + "'");
  write_corpus(corpus, out);
}

std::pair<Corpus, Corpus> split_dev(const Corpus& corpus, double dev_fraction,
                                    std::uint64_t seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0))
    throw DataError(DataErrorKind::Precondition,
                    "dev fraction must lie in (0,1), got " + std::to_string(dev_fraction));
  const std::size_t n = corpus.documents.size();
  if (n < 2) throw DataError(DataErrorKind::Precondition, "dev split needs at least 2 documents");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_dev = static_cast<std::size_t>(std::llround(dev_fraction * static_cast<double>(n)));
  std::vector<bool> is_dev(n, false);
  for (std::size_t i = 0; i < n_dev; ++i) is_dev[order[i]] = true;

  Corpus train, dev;
  std::unordered_set<std::string> dev_ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (is_dev[i]) {
      dev.documents.push_back(corpus.documents[i]);
      dev_ids.insert(corpus.documents[i].id);
    } else {
      train.documents.push_back(corpus.documents[i]);
    }
  }
  for (const auto& r : corpus.relations)
    (dev_ids.count(r.doc_id) ? dev : train).relations.push_back(r);
  return {std::move(train), std::move(dev)};
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  s.n_docs = corpus.documents.size();
  for (const auto& d : corpus.documents) s.n_events += d.events.size();
  s.n_relations = corpus.relations.size();
  for (const auto& r : corpus.relations) {
    if (r.label)
      ++s.label_histogram[index_of(*r.label)];
    else
      ++s.unlabeled;
  }
  return s;
}

}  // namespace temprel
