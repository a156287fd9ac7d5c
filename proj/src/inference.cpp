#include "temprel/inference.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "temprel/error.hpp"
#include "temprel/tempgraph.hpp"

namespace temprel {

using nlohmann::json;

void ConfidenceTable::sort() {
  std::stable_sort(rows.begin(), rows.end(), [](const ConfidenceRow& x, const ConfidenceRow& y) {
    return std::tie(x.doc_id, x.src, x.dst) < std::tie(y.doc_id, y.src, y.dst);
  });
}

Label argmax_label(const std::array<double, kNumLabels>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kNumLabels; ++i)
    if (scores[i] > scores[best]) best = i;
  return label_at(best);
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::array<double, kNumLabels> transform(const std::array<double, kNumLabels>& s,
                                         InferenceOptions options) {
  if (options.space == ScoreSpace::Probability) return s;
  std::array<double, kNumLabels> out{};
  for (std::size_t i = 0; i < kNumLabels; ++i) out[i] = std::log(std::max(s[i], 1e-300));
  return out;
}

/// ok[ab][bc][ac] for node indices x < y < z with labels on (x,y), (y,z),
/// (x,z): every ordering of the three nodes satisfies composition.
struct TripleTable {
  std::array<bool, 64> ok{};

  TripleTable() {
    for (std::size_t ab = 0; ab < 4; ++ab)
      for (std::size_t bc = 0; bc < 4; ++bc)
        for (std::size_t ac = 0; ac < 4; ++ac) {
          Label rel[3][3];
          rel[0][1] = label_at(ab);
          rel[1][2] = label_at(bc);
          rel[0][2] = label_at(ac);
          rel[1][0] = reverse(rel[0][1]);
          rel[2][1] = reverse(rel[1][2]);
          rel[2][0] = reverse(rel[0][2]);
          bool good = true;
          const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
          for (const auto& p : perms)
            good = good && compose(rel[p[0]][p[1]], rel[p[1]][p[2]]).contains(rel[p[0]][p[2]]);
          ok[ab * 16 + bc * 4 + ac] = good;
        }
  }
  bool operator()(std::size_t ab, std::size_t bc, std::size_t ac) const {
    return ok[ab * 16 + bc * 4 + ac];
  }
};

const TripleTable& triple_table() {
  static const TripleTable t;
  return t;
}

struct PairRef {
  std::size_t pair;
  bool flipped;  // stored as (later, earlier) relative to node order
};

struct Triple {
  std::array<std::size_t, 3> nodes;  // x < y < z
  PairRef xy, yz, xz;
};

/// One document's inference problem.
struct DocProblem {
  std::string doc_id;
  std::vector<std::string> nodes;                    // sorted ids
  std::vector<std::array<std::size_t, 2>> ends;      // stored (src, dst) node indices
  std::vector<std::size_t> rows;                     // row index into the table
  std::vector<std::array<double, kNumLabels>> weight;
  std::vector<Triple> triples;
  std::vector<std::vector<std::size_t>> triples_of;  // per pair
  bool complete = false;

  std::size_t oriented(const PairRef& ref, std::size_t label) const {
    return ref.flipped ? index_of(reverse(label_at(label))) : label;
  }

  bool triple_ok(const Triple& t, std::size_t xy, std::size_t yz, std::size_t xz) const {
    return triple_table()(oriented(t.xy, xy), oriented(t.yz, yz), oriented(t.xz, xz));
  }

  /// Triple constraints plus closure consistency when the graph has gaps.
  bool feasible(const std::vector<int>& labels) const {
    for (const auto& t : triples)
      if (!triple_ok(t, static_cast<std::size_t>(labels[t.xy.pair]),
                     static_cast<std::size_t>(labels[t.yz.pair]),
                     static_cast<std::size_t>(labels[t.xz.pair])))
        return false;
    return complete || closure_ok(labels);
  }

  /// Closure over the assigned (label >= 0) pairs.
  bool closure_ok(const std::vector<int>& labels) const {
    const std::size_t n = nodes.size();
    std::vector<std::int8_t> cells(n * n, -1);
    for (std::size_t p = 0; p < ends.size(); ++p) {
      if (labels[p] < 0) continue;
      const Label l = label_at(static_cast<std::size_t>(labels[p]));
      cells[ends[p][0] * n + ends[p][1]] = static_cast<std::int8_t>(index_of(l));
      cells[ends[p][1] * n + ends[p][0]] = static_cast<std::int8_t>(index_of(reverse(l)));
    }
    return !detail::dense_closure(n, cells).has_value();
  }
};

std::vector<DocProblem> build_problems(const ConfidenceTable& conf, InferenceOptions options) {
  std::map<std::string, std::vector<std::size_t>> by_doc;
  for (std::size_t i = 0; i < conf.rows.size(); ++i) by_doc[conf.rows[i].doc_id].push_back(i);

  std::vector<DocProblem> out;
  for (auto& [doc, rows] : by_doc) {
    DocProblem p;
    p.doc_id = doc;
    std::sort(rows.begin(), rows.end(), [&](std::size_t x, std::size_t y) {
      const auto& a = conf.rows[x];
      const auto& b = conf.rows[y];
      return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });
    for (std::size_t r : rows) {
      p.nodes.push_back(conf.rows[r].src);
      p.nodes.push_back(conf.rows[r].dst);
    }
    std::sort(p.nodes.begin(), p.nodes.end());
    p.nodes.erase(std::unique(p.nodes.begin(), p.nodes.end()), p.nodes.end());
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < p.nodes.size(); ++i) idx[p.nodes[i]] = i;

    const std::size_t n = p.nodes.size();
    std::vector<std::ptrdiff_t> pair_at(n * n, -1);
    for (std::size_t r : rows) {
      const auto& row = conf.rows[r];
      const std::size_t a = idx[row.src], b = idx[row.dst];
      if (a == b)
        throw DataError(DataErrorKind::Schema, "self pair '" + row.src + "' in " + doc);
      if (pair_at[a * n + b] >= 0)
        throw DataError(DataErrorKind::DuplicatePair,
                        "duplicate pair (" + row.src + ", " + row.dst + ") in " + doc);
      const auto id = static_cast<std::ptrdiff_t>(p.ends.size());
      pair_at[a * n + b] = pair_at[b * n + a] = id;
      p.ends.push_back({a, b});
      p.rows.push_back(r);
      p.weight.push_back(transform(row.scores, options));
    }
    p.triples_of.resize(p.ends.size());
    auto ref = [&](std::size_t u, std::size_t v) {
      const auto id = static_cast<std::size_t>(pair_at[u * n + v]);
      return PairRef{id, p.ends[id][0] != u};
    };
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = x + 1; y < n; ++y) {
        if (pair_at[x * n + y] < 0) continue;
        for (std::size_t z = y + 1; z < n; ++z) {
          if (pair_at[y * n + z] < 0 || pair_at[x * n + z] < 0) continue;
          Triple t{{x, y, z}, ref(x, y), ref(y, z), ref(x, z)};
          const std::size_t id = p.triples.size();
          p.triples.push_back(t);
          for (const auto& r : {t.xy, t.yz, t.xz}) p.triples_of[r.pair].push_back(id);
        }
      }
    p.complete = p.ends.size() == n * (n - 1) / 2;
    out.push_back(std::move(p));
  }
  return out;
}

/// Depth-first branch and bound over one document.
class BranchAndBound {
 public:
  explicit BranchAndBound(const DocProblem& p) : p_(p), labels_(p.ends.size(), -1) {
    order_.resize(p.ends.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::vector<double> margin(p.ends.size());
    for (std::size_t i = 0; i < p.ends.size(); ++i) {
      auto w = p.weight[i];
      std::sort(w.begin(), w.end(), std::greater<>());
      margin[i] = w[0] - w[1];
    }
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return margin[a] > margin[b]; });
  }

  std::vector<int> solve() {
    search(0, 0.0);
    return best_labels_;
  }

 private:
  /// Labels of `pair` compatible with every triple whose other two pairs
  /// are already fixed.
  LabelSet domain(std::size_t pair) {
    LabelSet allowed;
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      bool good = true;
      for (std::size_t tid : p_.triples_of[pair]) {
        const Triple& t = p_.triples[tid];
        int xy = labels_[t.xy.pair], yz = labels_[t.yz.pair], xz = labels_[t.xz.pair];
        const int li = static_cast<int>(l);
        if (t.xy.pair == pair) xy = li;
        if (t.yz.pair == pair) yz = li;
        if (t.xz.pair == pair) xz = li;
        if (xy < 0 || yz < 0 || xz < 0) continue;
        if (!p_.triple_ok(t, static_cast<std::size_t>(xy), static_cast<std::size_t>(yz),
                          static_cast<std::size_t>(xz))) {
          good = false;
          break;
        }
      }
      if (good) allowed.insert(label_at(l));
    }
    return allowed;
  }

  void search(std::size_t depth, double value) {
    if (depth == order_.size()) {
      if (value > best_) {
        best_ = value;
        best_labels_ = labels_;
      }
      return;
    }
    double bound = value;
    for (std::size_t k = depth; k < order_.size() && bound > kNegInf; ++k) {
      const LabelSet dom = domain(order_[k]);
      double m = kNegInf;
      for (Label l : dom.labels()) m = std::max(m, p_.weight[order_[k]][index_of(l)]);
      bound += m;
    }
    if (bound <= best_) return;

    const std::size_t pair = order_[depth];
    auto candidates = domain(pair).labels();
    std::stable_sort(candidates.begin(), candidates.end(), [&](Label a, Label b) {
      return p_.weight[pair][index_of(a)] > p_.weight[pair][index_of(b)];
    });
    for (Label l : candidates) {
      labels_[pair] = static_cast<int>(index_of(l));
      if (p_.complete || l == Label::Vague || p_.closure_ok(labels_))
        search(depth + 1, value + p_.weight[pair][index_of(l)]);
      labels_[pair] = -1;
    }
  }

  const DocProblem& p_;
  std::vector<std::size_t> order_;
  std::vector<int> labels_;
  std::vector<int> best_labels_;
  double best_ = kNegInf;
};

std::vector<int> brute_force(const DocProblem& p) {
  const std::size_t n = p.ends.size();
  if (n > kBruteForceMaxPairs)
    throw DataError(DataErrorKind::Precondition,
                    "document '" + p.doc_id + "' has " + std::to_string(n) +
                        " pairs; brute force handles at most " +
                        std::to_string(kBruteForceMaxPairs));
  std::vector<int> labels(n, 0), best;
  double best_value = kNegInf;
  while (true) {
    if (p.feasible(labels)) {
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) v += p.weight[i][static_cast<std::size_t>(labels[i])];
      if (v > best_value) {
        best_value = v;
        best = labels;
      }
    }
    // Odometer with the first pair as the most significant digit.
    std::size_t k = n;
    while (k > 0 && labels[k - 1] == 3) labels[--k] = 0;
    if (k == 0) break;
    ++labels[k - 1];
  }
  return best;
}

Assignment assemble(const ConfidenceTable& conf, const std::vector<DocProblem>& problems,
                    const std::vector<std::vector<int>>& solutions, InferenceOptions options) {
  Assignment a;
  for (std::size_t d = 0; d < problems.size(); ++d) {
    const auto& p = problems[d];
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
      const auto& row = conf.rows[p.rows[i]];
      a.labels[{row.doc_id, row.src, row.dst}] =
          label_at(static_cast<std::size_t>(solutions[d][i]));
    }
  }
  score_assignment(conf, a, options);
  return a;
}

}  // namespace

Assignment greedy_assign(const ConfidenceTable& conf, InferenceOptions options) {
  Assignment a;
  for (const auto& row : conf.rows)
    a.labels[{row.doc_id, row.src, row.dst}] = argmax_label(transform(row.scores, options));
  score_assignment(conf, a, options);
  return a;
}

Assignment ilp_infer_serial(const ConfidenceTable& conf, InferenceOptions options) {
  const auto problems = build_problems(conf, options);
  std::vector<std::vector<int>> solutions(problems.size());
  for (std::size_t d = 0; d < problems.size(); ++d)
    solutions[d] = BranchAndBound(problems[d]).solve();
  return assemble(conf, problems, solutions, options);
}

Assignment ilp_infer(const ConfidenceTable& conf, InferenceOptions options) {
  const auto problems = build_problems(conf, options);
  std::vector<std::vector<int>> solutions(problems.size());
  const auto n = static_cast<std::ptrdiff_t>(problems.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t d = 0; d < n; ++d)
    solutions[static_cast<std::size_t>(d)] =
        BranchAndBound(problems[static_cast<std::size_t>(d)]).solve();
  return assemble(conf, problems, solutions, options);
}

Assignment brute_force_infer(const ConfidenceTable& conf, InferenceOptions options) {
  const auto problems = build_problems(conf, options);
  std::vector<std::vector<int>> solutions;
  for (const auto& p : problems) solutions.push_back(brute_force(p));
  return assemble(conf, problems, solutions, options);
}

void score_assignment(const ConfidenceTable& conf, Assignment& a, InferenceOptions options) {
  std::vector<const ConfidenceRow*> rows;
  for (const auto& r : conf.rows) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [](const ConfidenceRow* x, const ConfidenceRow* y) {
    return std::tie(x->doc_id, x->src, x->dst) < std::tie(y->doc_id, y->src, y->dst);
  });
  a.objective = 0.0;
  a.doc_objective.clear();
  for (const ConfidenceRow* r : rows) {
    auto it = a.labels.find({r->doc_id, r->src, r->dst});
    if (it == a.labels.end()) continue;
    a.doc_objective[r->doc_id] += transform(r->scores, options)[index_of(it->second)];
  }
  for (const auto& [_, v] : a.doc_objective) a.objective += v;
}

std::vector<Violation> verify_transitivity(const Assignment& assignment) {
  ConfidenceTable conf;
  for (const auto& [key, label] : assignment.labels) {
    ConfidenceRow row;
    row.doc_id = key.doc_id;
    row.src = key.src;
    row.dst = key.dst;
    row.label = label;
    conf.rows.push_back(row);
  }
  const auto problems = build_problems(conf, {});
  std::vector<Violation> out;
  for (const auto& p : problems) {
    std::vector<int> labels;
    for (std::size_t r : p.rows) labels.push_back(static_cast<int>(index_of(conf.rows[r].label)));
    const std::size_t before = out.size();
    for (const auto& t : p.triples) {
      const auto xy = static_cast<std::size_t>(labels[t.xy.pair]);
      const auto yz = static_cast<std::size_t>(labels[t.yz.pair]);
      const auto xz = static_cast<std::size_t>(labels[t.xz.pair]);
      if (p.triple_ok(t, xy, yz, xz)) continue;
      out.push_back({p.doc_id, p.nodes[t.nodes[0]], p.nodes[t.nodes[1]], p.nodes[t.nodes[2]],
                     label_at(p.oriented(t.xy, xy)), label_at(p.oriented(t.yz, yz)),
                     label_at(p.oriented(t.xz, xz)), false});
    }
    if (out.size() != before || p.complete) continue;
    TemporalGraph g;
    for (std::size_t i = 0; i < p.rows.size(); ++i)
      g.set(conf.rows[p.rows[i]].src, conf.rows[p.rows[i]].dst, conf.rows[p.rows[i]].label);
    const auto closed = closure(g);
    if (const auto* bad = std::get_if<Inconsistency>(&closed))
      out.push_back({p.doc_id, bad->a, bad->b, bad->c, bad->ab, bad->bc, bad->existing, true});
  }
  return out;
}

Assignment assignment_from_table(const ConfidenceTable& conf) {
  Assignment a;
  for (const auto& row : conf.rows) a.labels[{row.doc_id, row.src, row.dst}] = row.label;
  score_assignment(conf, a);
  return a;
}

ConfidenceTable read_predictions(std::istream& in) {
  ConfidenceTable conf;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(text);
      ConfidenceRow row;
      row.doc_id = j.at("doc").get<std::string>();
      row.src = j.at("src").get<std::string>();
      row.dst = j.at("dst").get<std::string>();
      const auto& s = j.at("scores");
      for (Label l : kAllLabels) row.scores[index_of(l)] = s.at(std::string(to_string(l))).get<double>();
      if (auto it = j.find("label"); it != j.end()) {
        const auto parsed = parse_label(it->get<std::string>());
        if (!parsed)
          throw DataError(DataErrorKind::BadLabel, "unknown label '" + it->get<std::string>() + "'",
                          line);
        row.label = *parsed;
      } else {
        row.label = argmax_label(row.scores);
      }
      conf.rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw DataError(DataErrorKind::Parse, e.what(), line);
    }
  }
  return conf;
}

ConfidenceTable load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorKind::Io, "cannot open predictions '" + path.string() + "'");
  return read_predictions(in);
}

void write_predictions(const ConfidenceTable& conf, std::ostream& out) {
  for (const auto& row : conf.rows) {
    json scores = json::object();
    for (Label l : kAllLabels) scores[std::string(to_string(l))] = row.scores[index_of(l)];
    json j = {{"doc", row.doc_id},
              {"src", row.src},
              {"dst", row.dst},
              {"scores", scores},
              {"label", std::string(to_string(row.label))}};
    out << j.dump() << '\n';
  }
}

void save_predictions(const ConfidenceTable& conf, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(DataErrorKind::Io, "cannot write '" + path.string() + "'");
  write_predictions(conf, out);
}

ConfidenceTable relabel(const ConfidenceTable& conf, const Assignment& assignment) {
  ConfidenceTable out = conf;
  for (auto& row : out.rows) {
    auto it = assignment.labels.find({row.doc_id, row.src, row.dst});
    if (it != assignment.labels.end()) row.label = it->second;
  }
  return out;
}

json inference_report(const ConfidenceTable& before, const Assignment& after) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // pairs, changed
  for (const auto& row : before.rows) {
    auto& c = counts[row.doc_id];
    ++c.first;
    auto it = after.labels.find({row.doc_id, row.src, row.dst});
    if (it != after.labels.end() && it->second != row.label) ++c.second;
  }
  json docs = json::array();
  for (const auto& [doc, c] : counts) {
    auto it = after.doc_objective.find(doc);
    docs.push_back({{"doc", doc},
                    {"objective", it == after.doc_objective.end() ? 0.0 : it->second},
                    {"pairs", c.first},
                    {"changed", c.second}});
  }
  return {{"documents", docs},
          {"total_objective", after.objective},
          {"violations", verify_transitivity(after).size()}};
}

}  // namespace temprel
