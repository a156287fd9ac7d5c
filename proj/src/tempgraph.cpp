#include "temprel/tempgraph.hpp"

#include <stdexcept>

#include "temprel/error.hpp"

namespace temprel {

std::optional<Label> LabelSet::single() const {
  if (size() != 1) return std::nullopt;
  return label_at(static_cast<std::size_t>(__builtin_ctz(bits_)));
}

std::vector<Label> LabelSet::labels() const {
  std::vector<Label> out;
  for (Label l : kAllLabels)
    if (contains(l)) out.push_back(l);
  return out;
}

LabelSet compose(Label r1, Label r2) {
  using enum Label;
  if (r1 == Equal && r2 != Vague) return LabelSet::of(r2);
  if (r2 == Equal && r1 != Vague) return LabelSet::of(r1);
  if (r1 == Before && r2 == Before) return LabelSet::of(Before);
  if (r1 == After && r2 == After) return LabelSet::of(After);
  return LabelSet::all();
}

void TemporalGraph::set(const std::string& src, const std::string& dst, Label label) {
  if (src == dst) throw std::invalid_argument("temporal graph: self-loop on '" + src + "'");
  nodes_.insert(src);
  nodes_.insert(dst);
  if (src < dst)
    edges_[{src, dst}] = label;
  else
    edges_[{dst, src}] = reverse(label);
}

void TemporalGraph::erase(const std::string& src, const std::string& dst) {
  edges_.erase(src < dst ? std::make_pair(src, dst) : std::make_pair(dst, src));
}

std::optional<Label> TemporalGraph::get(const std::string& src, const std::string& dst) const {
  if (src < dst) {
    auto it = edges_.find({src, dst});
    if (it != edges_.end()) return it->second;
  } else {
    auto it = edges_.find({dst, src});
    if (it != edges_.end()) return reverse(it->second);
  }
  return std::nullopt;
}

std::vector<Edge> TemporalGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (const auto& [k, l] : edges_) out.push_back({k.first, k.second, l});
  return out;
}

TemporalGraph TemporalGraph::without_vague() const {
  TemporalGraph g;
  g.nodes_ = nodes_;
  for (const auto& [k, l] : edges_)
    if (l != Label::Vague) g.edges_.emplace(k, l);
  return g;
}

nlohmann::json TemporalGraph::to_json() const {
  nlohmann::json j;
  j["nodes"] = std::vector<std::string>(nodes_.begin(), nodes_.end());
  j["edges"] = nlohmann::json::array();
  for (const auto& e : edges())
    j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"label", std::string(to_string(e.label))}});
  return j;
}

TemporalGraph TemporalGraph::from_json(const nlohmann::json& j) {
  TemporalGraph g;
  try {
    if (j.contains("nodes"))
      for (const auto& n : j.at("nodes")) g.add_node(n.get<std::string>());
    for (const auto& e : j.at("edges")) {
      const auto text = e.at("label").get<std::string>();
      const auto label = parse_label(text);
      if (!label) throw DataError(DataErrorKind::BadLabel, "unknown label '" + text + "'");
      const auto src = e.at("src").get<std::string>();
      const auto dst = e.at("dst").get<std::string>();
      if (src == dst) throw DataError(DataErrorKind::Schema, "self-loop on '" + src + "'");
      if (g.get(src, dst))
        throw DataError(DataErrorKind::DuplicatePair,
                        "duplicate edge between '" + src + "' and '" + dst + "'");
      g.set(src, dst, *label);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(DataErrorKind::Schema, std::string("bad graph dump: ") + e.what());
  }
  return g;
}

namespace {

constexpr std::int8_t kNone = -1;

struct DenseGraph {
  std::vector<std::string> ids;
  std::vector<std::int8_t> cells;  // n*n, label index or kNone

  std::size_t n() const { return ids.size(); }
  std::int8_t& at(std::size_t a, std::size_t b) { return cells[a * ids.size() + b]; }
};

DenseGraph densify(const TemporalGraph& g) {
  DenseGraph d;
  d.ids.assign(g.nodes().begin(), g.nodes().end());
  d.cells.assign(d.n() * d.n(), kNone);
  std::map<std::string, std::size_t> idx;
  for (std::size_t i = 0; i < d.n(); ++i) idx[d.ids[i]] = i;
  for (const auto& e : g.edges()) {
    const auto a = idx[e.src], b = idx[e.dst];
    d.at(a, b) = static_cast<std::int8_t>(index_of(e.label));
    d.at(b, a) = static_cast<std::int8_t>(index_of(reverse(e.label)));
  }
  return d;
}

}  // namespace

namespace detail {

std::optional<std::array<std::size_t, 3>> dense_closure(std::size_t n,
                                                        std::vector<std::int8_t>& cells) {
  const auto vague = static_cast<std::int8_t>(index_of(Label::Vague));
  auto at = [&](std::size_t a, std::size_t b) -> std::int8_t& { return cells[a * n + b]; };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        const std::int8_t ab = at(a, b);
        if (b == a || ab == kNone || ab == vague) continue;
        for (std::size_t c = 0; c < n; ++c) {
          const std::int8_t bc = at(b, c);
          if (c == a || c == b || bc == kNone || bc == vague) continue;
          const auto implied = compose(label_at(ab), label_at(bc)).single();
          if (!implied || *implied == Label::Vague) continue;
          const std::int8_t ac = at(a, c);
          const auto want = static_cast<std::int8_t>(index_of(*implied));
          if (ac == kNone || ac == vague) {
            at(a, c) = want;
            at(c, a) = static_cast<std::int8_t>(index_of(reverse(*implied)));
            changed = true;
          } else if (ac != want) {
            return std::array<std::size_t, 3>{a, b, c};
          }
        }
      }
  }
  return std::nullopt;
}

}  // namespace detail

std::variant<TemporalGraph, Inconsistency> closure(const TemporalGraph& g) {
  DenseGraph d = densify(g);
  const std::size_t n = d.n();
  if (const auto bad = detail::dense_closure(n, d.cells)) {
    const auto [a, b, c] = *bad;
    const Label ab = label_at(d.at(a, b)), bc = label_at(d.at(b, c));
    return Inconsistency{d.ids[a], d.ids[b], d.ids[c], ab, bc,
                         *compose(ab, bc).single(), label_at(d.at(a, c))};
  }
  TemporalGraph out;
  for (const auto& id : d.ids) out.add_node(id);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (d.at(a, b) != kNone) out.set(d.ids[a], d.ids[b], label_at(d.at(a, b)));
  return out;
}

bool is_consistent(const TemporalGraph& g) {
  return std::holds_alternative<TemporalGraph>(closure(g));
}

TemporalGraph reduce(const TemporalGraph& g) {
  const auto closed_input = closure(g);
  if (const auto* bad = std::get_if<Inconsistency>(&closed_input))
    throw DataError(DataErrorKind::Inconsistent, "cannot reduce an inconsistent graph (triple " +
                                                     bad->a + ", " + bad->b + ", " + bad->c + ")");
  TemporalGraph current = g.without_vague();
  for (const auto& e : g.without_vague().edges()) {
    TemporalGraph rest = current;
    rest.erase(e.src, e.dst);
    const auto closed = closure(rest);
    const auto& cg = std::get<TemporalGraph>(closed);
    if (cg.get(e.src, e.dst) == e.label) current = std::move(rest);
  }
  return current;
}

}  // namespace temprel
