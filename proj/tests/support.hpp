#pragma once
// Independent oracles and random generators shared by the test binaries.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "temprel/corpus.hpp"
#include "temprel/inference.hpp"
#include "temprel/label.hpp"
#include "temprel/rng.hpp"
#include "temprel/tempgraph.hpp"

namespace testing {

using temprel::Label;

// Point relation of t1 against t2; VAGUE admits every order.
inline bool admits(Label r, int t1, int t2) {
  switch (r) {
    case Label::Before: return t1 < t2;
    case Label::After: return t1 > t2;
    case Label::Equal: return t1 == t2;
    case Label::Vague: return true;
  }
  return false;
}

inline Label point_relation(int t1, int t2) {
  return t1 < t2 ? Label::Before : t1 > t2 ? Label::After : Label::Equal;
}

// Enumerates all total preorders of three start points (values 0..2 cover
// every one). A single forced relation is returned alone; anything weaker
// leaves the pair undetermined.
inline temprel::LabelSet compose_oracle(Label r1, Label r2) {
  std::set<Label> seen;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        if (admits(r1, a, b) && admits(r2, b, c)) seen.insert(point_relation(a, c));
  if (seen.size() == 1) return temprel::LabelSet::of(*seen.begin());
  return temprel::LabelSet::all();
}

// 2 * sum_{k<=m} C(n,k) / 2^n with exact integer arithmetic.
inline double binomial_two_sided(unsigned n, unsigned m) {
  std::vector<std::uint64_t> row{1};
  for (unsigned i = 1; i <= n; ++i) {
    std::vector<std::uint64_t> next(i + 1, 1);
    for (unsigned k = 1; k < i; ++k) next[k] = row[k - 1] + row[k];
    row = next;
  }
  std::uint64_t sum = 0;
  for (unsigned k = 0; k <= m; ++k) sum += row[k];
  return std::min(1.0, 2.0 * static_cast<double>(sum) / std::ldexp(1.0, static_cast<int>(n)));
}

// Two-sided Student t tail by composite Simpson integration of the density
// over [0, |t|].
inline double t_two_sided_simpson(double t, double df, int intervals = 200000) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
  auto f = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const double b = std::abs(t);
  const double h = b / intervals;
  double s = f(0) + f(b);
  for (int i = 1; i < intervals; ++i) s += f(i * h) * (i % 2 ? 4 : 2);
  return 1.0 - 2.0 * s * h / 3.0;
}

// Graph built from random start points, so it is consistent by construction.
inline temprel::TemporalGraph random_point_graph(temprel::Rng& rng, std::size_t nodes,
                                                 double density, double vague_rate) {
  std::vector<int> time(nodes);
  for (auto& t : time) t = static_cast<int>(rng.below(4));
  temprel::TemporalGraph g;
  for (std::size_t i = 0; i < nodes; ++i) g.add_node("n" + std::to_string(i));
  for (std::size_t i = 0; i < nodes; ++i)
    for (std::size_t j = i + 1; j < nodes; ++j) {
      if (rng.uniform() >= density) continue;
      const Label l = rng.uniform() < vague_rate ? Label::Vague : point_relation(time[i], time[j]);
      if (rng.below(2)) g.set("n" + std::to_string(i), "n" + std::to_string(j), l);
      else g.set("n" + std::to_string(j), "n" + std::to_string(i), temprel::reverse(l));
    }
  return g;
}

inline std::array<double, temprel::kNumLabels> random_scores(temprel::Rng& rng) {
  std::array<double, temprel::kNumLabels> s{};
  double sum = 0.0;
  for (auto& x : s) sum += x = rng.uniform(0.01, 1.0);
  for (auto& x : s) x /= sum;
  return s;
}

// One document per table; every pair among `events` present, random direction.
inline temprel::ConfidenceTable random_table(temprel::Rng& rng, std::size_t events,
                                             const std::string& doc = "d0", double pair_rate = 1.0) {
  temprel::ConfidenceTable t;
  for (std::size_t i = 0; i < events; ++i)
    for (std::size_t j = i + 1; j < events; ++j) {
      if (rng.uniform() >= pair_rate) continue;
      temprel::ConfidenceRow r;
      r.doc_id = doc;
      r.src = "e" + std::to_string(i);
      r.dst = "e" + std::to_string(j);
      if (rng.below(2)) std::swap(r.src, r.dst);
      r.scores = random_scores(rng);
      r.label = temprel::argmax_label(r.scores);
      t.rows.push_back(r);
    }
  t.sort();
  return t;
}

// Exhaustive check of an assignment against the composition oracle.
inline bool triples_hold(const temprel::Assignment& a) {
  std::map<std::string, std::map<std::pair<std::string, std::string>, Label>> docs;
  for (const auto& [k, l] : a.labels) {
    docs[k.doc_id][{k.src, k.dst}] = l;
    docs[k.doc_id][{k.dst, k.src}] = temprel::reverse(l);
  }
  for (const auto& [doc, m] : docs) {
    std::set<std::string> nodes;
    for (const auto& [p, l] : m) nodes.insert(p.first);
    for (const auto& x : nodes)
      for (const auto& y : nodes)
        for (const auto& z : nodes) {
          if (x == y || y == z || x == z) continue;
          const auto xy = m.find({x, y}), yz = m.find({y, z}), xz = m.find({x, z});
          if (xy == m.end() || yz == m.end() || xz == m.end()) continue;
          if (!compose_oracle(xy->second, yz->second).contains(xz->second)) return false;
        }
  }
  return true;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("temprel_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
