#include "temprel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "temprel/error.hpp"

namespace temprel {

using nlohmann::json;

void ConfusionMatrix::add(Label gold, Label pred, std::uint64_t n) {
  counts[index_of(gold)][index_of(pred)] += n;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (const auto& row : counts)
    for (auto c : row) s += c;
  return s;
}

std::uint64_t ConfusionMatrix::predicted_relations() const {
  std::uint64_t s = 0;
  for (const auto& row : counts)
    for (std::size_t p = 0; p < 3; ++p) s += row[p];
  return s;
}

std::uint64_t ConfusionMatrix::gold_relations() const {
  std::uint64_t s = 0;
  for (std::size_t g = 0; g < 3; ++g)
    for (auto c : counts[g]) s += c;
  return s;
}

std::uint64_t ConfusionMatrix::correct_relations() const {
  return counts[0][0] + counts[1][1] + counts[2][2];
}

std::uint64_t ConfusionMatrix::correct() const { return correct_relations() + counts[3][3]; }

namespace {

template <typename F>
void for_each_gold(const Corpus& gold, const Assignment& pred, F&& visit) {
  for (const auto& r : gold.relations) {
    if (!r.label) continue;
    if (auto it = pred.labels.find({r.doc_id, r.src, r.dst}); it != pred.labels.end()) {
      visit(*r.label, it->second);
      continue;
    }
    if (auto it = pred.labels.find({r.doc_id, r.dst, r.src}); it != pred.labels.end()) {
      visit(*r.label, reverse(it->second));
      continue;
    }
    throw DataError(DataErrorKind::MissingPrediction,
                    "no prediction for (" + r.doc_id + ", " + r.src + ", " + r.dst + ")");
  }
}

double ratio(std::uint64_t num, std::uint64_t den) {
  return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

ConfusionMatrix confusion(const Corpus& gold, const Assignment& pred) {
  ConfusionMatrix m;
  for_each_gold(gold, pred, [&](Label g, Label p) { m.add(g, p); });
  return m;
}

std::vector<bool> correctness(const Corpus& gold, const Assignment& pred) {
  std::vector<bool> out;
  for_each_gold(gold, pred, [&](Label g, Label p) { out.push_back(g == p); });
  return out;
}

double accuracy(const ConfusionMatrix& m) {
  const auto s = m.total();
  if (s == 0) throw DataError(DataErrorKind::Precondition, "accuracy of an empty confusion matrix");
  return ratio(m.correct(), s);
}

double harmonic_mean(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

PrecisionRecall relation_f1(const ConfusionMatrix& m) {
  PrecisionRecall out;
  out.precision = ratio(m.correct_relations(), m.predicted_relations());
  out.recall = ratio(m.correct_relations(), m.gold_relations());
  out.f1 = harmonic_mean(out.precision, out.recall);
  return out;
}

GraphSet gold_graphs(const Corpus& gold) {
  GraphSet out;
  for (const auto& d : gold.documents) {
    auto& g = out[d.id];
    for (const auto& e : d.events) g.add_node(e.eid);
  }
  for (const auto& r : gold.relations)
    if (r.label) out[r.doc_id].set(r.src, r.dst, *r.label);
  return out;
}

GraphSet assignment_graphs(const Assignment& pred) {
  GraphSet out;
  for (const auto& [key, label] : pred.labels) out[key.doc_id].set(key.src, key.dst, label);
  return out;
}

namespace {

const TemporalGraph& closed(const TemporalGraph& g, const std::string& doc, TemporalGraph& slot) {
  auto c = closure(g);
  if (auto* bad = std::get_if<Inconsistency>(&c))
    throw DataError(DataErrorKind::Inconsistent,
                    "document '" + doc + "' is inconsistent at triple (" + bad->a + ", " + bad->b +
                        ", " + bad->c + ")");
  slot = std::get<TemporalGraph>(std::move(c));
  return slot;
}

/// Edges of `reduced` found with the same label in `closed_graph`.
std::pair<std::uint64_t, std::uint64_t> matched(const TemporalGraph& reduced,
                                                const TemporalGraph& closed_graph) {
  std::uint64_t hit = 0, n = 0;
  for (const auto& e : reduced.edges()) {
    if (e.label == Label::Vague) continue;
    ++n;
    if (closed_graph.get(e.src, e.dst) == e.label) ++hit;
  }
  return {hit, n};
}

}  // namespace

PrecisionRecall awareness(const GraphSet& gold, const GraphSet& pred) {
  std::set<std::string> docs;
  for (const auto& [d, g] : gold) docs.insert(d);
  for (const auto& [d, g] : pred) docs.insert(d);
  const TemporalGraph empty;
  std::uint64_t p_hit = 0, p_n = 0, r_hit = 0, r_n = 0;
  for (const auto& doc : docs) {
    const auto git = gold.find(doc);
    const auto pit = pred.find(doc);
    const TemporalGraph& g = git == gold.end() ? empty : git->second;
    const TemporalGraph& p = pit == pred.end() ? empty : pit->second;
    TemporalGraph g_slot, p_slot;
    const TemporalGraph& g_closed = closed(g, doc, g_slot);
    const TemporalGraph& p_closed = closed(p, doc, p_slot);
    const auto [ph, pn] = matched(reduce(p), g_closed);
    const auto [rh, rn] = matched(reduce(g), p_closed);
    p_hit += ph;
    p_n += pn;
    r_hit += rh;
    r_n += rn;
  }
  PrecisionRecall out;
  out.precision = ratio(p_hit, p_n);
  out.recall = ratio(r_hit, r_n);
  out.f1 = harmonic_mean(out.precision, out.recall);
  return out;
}

double three_metric_average(double acc, double f1, double f_aware) {
  const double v[] = {acc, f1, f_aware};
  bool fraction = false, percent = false;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0 || x > 100.0)
      throw std::domain_error("metric value out of range");
    if (x > 1.0) percent = true;
    else if (x > 0.0) fraction = true;
  }
  if (fraction && percent) throw std::domain_error("metrics mix fractions and percentages");
  return (acc + f1 + f_aware) / 3.0;
}

EvalReport evaluate(const Corpus& gold, const Assignment& pred) {
  EvalReport r;
  r.matrix = confusion(gold, pred);
  r.n_instances = r.matrix.total();
  r.acc = accuracy(r.matrix);
  r.relation = relation_f1(r.matrix);
  r.aware = awareness(gold_graphs(gold), assignment_graphs(pred));
  r.avg = three_metric_average(r.acc, r.relation.f1, r.aware.f1);
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    std::uint64_t col = 0, row = 0;
    for (std::size_t k = 0; k < kNumLabels; ++k) {
      col += r.matrix.counts[k][l];
      row += r.matrix.counts[l][k];
    }
    auto& s = r.per_label[l];
    s.support = row;
    s.precision = ratio(r.matrix.counts[l][l], col);
    s.recall = ratio(r.matrix.counts[l][l], row);
    s.f1 = harmonic_mean(s.precision, s.recall);
  }
  return r;
}

json to_json(const EvalReport& r) {
  json per_label = json::object();
  for (std::size_t l = 0; l < kNumLabels; ++l) {
    const auto& s = r.per_label[l];
    per_label[std::string(to_string(label_at(l)))] = {
        {"p", 100.0 * s.precision}, {"r", 100.0 * s.recall}, {"f1", 100.0 * s.f1}, {"support", s.support}};
  }
  json matrix = json::array();
  for (const auto& row : r.matrix.counts) matrix.push_back(row);
  return {{"acc", 100.0 * r.acc},
          {"p", 100.0 * r.relation.precision},
          {"r", 100.0 * r.relation.recall},
          {"f1", 100.0 * r.relation.f1},
          {"p_aware", 100.0 * r.aware.precision},
          {"r_aware", 100.0 * r.aware.recall},
          {"f_aware", 100.0 * r.aware.f1},
          {"avg", 100.0 * r.avg},
          {"n_instances", r.n_instances},
          {"per_label", per_label},
          {"confusion", {{"rows", "gold"}, {"cols", "pred"}, {"order", {"BEFORE", "AFTER", "EQUAL", "VAGUE"}}, {"counts", matrix}}},
          {"metadata",
           {{"awareness_average", "micro"},
            {"reduction", "greedy, canonical edge order"},
            {"awareness_parity", "not claimed against TempEval3 tooling"}}}};
}

}  // namespace temprel
