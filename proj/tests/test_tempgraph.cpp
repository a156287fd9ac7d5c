#include <doctest.h>

#include "support.hpp"
#include "temprel/error.hpp"
#include "temprel/tempgraph.hpp"

using namespace temprel;
using B = Label;

namespace {

TemporalGraph make(std::initializer_list<std::tuple<const char*, const char*, Label>> edges) {
  TemporalGraph g;
  for (const auto& [a, b, l] : edges) g.set(a, b, l);
  return g;
}

TemporalGraph closed(const TemporalGraph& g) {
  auto c = closure(g);
  REQUIRE(std::holds_alternative<TemporalGraph>(c));
  return std::get<TemporalGraph>(c);
}

}  // namespace

TEST_SUITE("tempgraph") {
  TEST_CASE("compose matches the point-order oracle on all 16 inputs") {
    for (auto r1 : kAllLabels)
      for (auto r2 : kAllLabels) {
        CAPTURE(to_string(r1));
        CAPTURE(to_string(r2));
        CHECK(compose(r1, r2) == testing::compose_oracle(r1, r2));
        CHECK_FALSE(compose(r1, r2).empty());
      }
    for (auto r : kAllLabels)
      if (r != Label::Vague) CHECK(compose(Label::Equal, r) == LabelSet::of(r));
    CHECK(compose(B::Before, B::After) == LabelSet::all());
  }

  TEST_CASE("edge direction coherence") {
    TemporalGraph g;
    g.set("b", "a", Label::Before);
    CHECK(g.get("a", "b") == Label::After);
    CHECK(g.get("b", "a") == Label::Before);
    CHECK_FALSE(g.get("a", "c").has_value());
    CHECK_THROWS(g.set("a", "a", Label::Equal));
  }

  TEST_CASE("closure examples") {
    const auto g = closed(make({{"A", "B", B::Before}, {"B", "C", B::Before}}));
    CHECK(g.get("A", "C") == Label::Before);

    const auto bad = closure(make({{"A", "B", B::Before}, {"B", "C", B::Before}, {"A", "C", B::After}}));
    REQUIRE(std::holds_alternative<Inconsistency>(bad));
    const auto& inc = std::get<Inconsistency>(bad);
    CHECK(inc.a == "A");
    CHECK(inc.b == "B");
    CHECK(inc.c == "C");

    CHECK(closed(g) == g);
  }

  TEST_CASE("closure overrides VAGUE with a derived label") {
    const auto g = closed(make({{"A", "B", B::Before}, {"B", "C", B::Equal}, {"A", "C", B::Vague}}));
    CHECK(g.get("A", "C") == Label::Before);
  }

  TEST_CASE("reduce examples") {
    const auto chain = make({{"A", "B", B::Before}, {"B", "C", B::Before}, {"A", "C", B::Before}});
    CHECK(reduce(chain) == make({{"A", "B", B::Before}, {"B", "C", B::Before}}));
    CHECK(reduce(make({{"A", "B", B::Vague}, {"B", "C", B::Vague}})).edge_count() == 0);
    const auto indep = make({{"A", "B", B::Before}, {"C", "D", B::Equal}});
    CHECK(reduce(indep) == indep);
    CHECK_THROWS_AS(reduce(make({{"A", "B", B::Before}, {"B", "C", B::Before}, {"C", "A", B::Before}})),
                    DataError);
  }

  TEST_CASE("is_consistent examples") {
    CHECK(is_consistent(TemporalGraph{}));
    CHECK_FALSE(is_consistent(make({{"A", "B", B::Before}, {"B", "C", B::Before}, {"C", "A", B::Before}})));
    for (auto l : kAllLabels) CHECK(is_consistent(make({{"x", "y", l}})));
  }

  TEST_CASE("graph dump round trip") {
    const auto g = make({{"b", "a", B::Before}, {"c", "a", B::Vague}});
    const auto j = g.to_json();
    CHECK(TemporalGraph::from_json(j) == g);
    CHECK(j["edges"][0]["src"] == "a");
  }

  TEST_CASE("property: closure idempotent and reduce preserves information") {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t n = 2 + rng.below(7);
      const auto g = testing::random_point_graph(rng, n, rng.uniform(0.2, 1.0), 0.2);
      REQUIRE(is_consistent(g));
      const auto c = closed(g);
      CHECK(closed(c) == c);
      const auto r = reduce(c);
      for (const auto& e : r.edges()) CHECK(e.label != Label::Vague);
      CHECK(closed(r) == c.without_vague());
      CHECK(r.edge_count() <= c.without_vague().edge_count());
    }
  }

  TEST_CASE("property: closure only adds labels implied by every point model") {
    Rng rng(31);
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t n = 3 + rng.below(3);
      const auto g = testing::random_point_graph(rng, n, 0.6, 0.1);
      const auto c = closed(g);
      // Enumerate all point assignments in {0..n-1}^n consistent with g.
      std::vector<std::string> ids(g.nodes().begin(), g.nodes().end());
      std::vector<int> t(n, 0);
      const auto fits = [&](const TemporalGraph& h) {
        for (const auto& e : h.edges()) {
          const auto i = std::find(ids.begin(), ids.end(), e.src) - ids.begin();
          const auto j = std::find(ids.begin(), ids.end(), e.dst) - ids.begin();
          if (!testing::admits(e.label, t[i], t[j])) return false;
        }
        return true;
      };
      while (true) {
        if (fits(g)) CHECK(fits(c));
        std::size_t k = 0;
        while (k < n && ++t[k] == static_cast<int>(n)) t[k++] = 0;
        if (k == n) break;
      }
    }
  }
}
