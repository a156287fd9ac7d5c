#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "temprel/error.hpp"
#include "temprel/inference.hpp"
#include "temprel/metrics.hpp"

using namespace temprel;

namespace {

ConfidenceRow row(const char* src, const char* dst, std::array<double, kNumLabels> s,
                  const char* doc = "d") {
  return {doc, src, dst, s, argmax_label(s)};
}

ConfidenceTable example_table() {
  ConfidenceTable t;
  t.rows = {row("A", "B", {.9, .03, .03, .04}), row("B", "C", {.9, .03, .03, .04}),
            row("A", "C", {.45, .50, .02, .03})};
  t.sort();
  return t;
}

bool consistent_per_doc(const Assignment& a) {
  for (const auto& [doc, g] : assignment_graphs(a))
    if (!is_consistent(g)) return false;
  return true;
}

}  // namespace

TEST_SUITE("inference") {
  TEST_CASE("greedy ties break toward BEFORE") {
    ConfidenceTable t;
    t.rows = {row("a", "b", {.25, .25, .25, .25}), row("a", "c", {.1, .2, .6, .1})};
    const auto g = greedy_assign(t);
    CHECK(g.labels.at({"d", "a", "b"}) == Label::Before);
    CHECK(g.labels.at({"d", "a", "c"}) == Label::Equal);
  }

  TEST_CASE("worked three-event example") {
    const auto t = example_table();
    const auto greedy = greedy_assign(t);
    CHECK(greedy.labels.at({"d", "A", "C"}) == Label::After);
    CHECK_FALSE(verify_transitivity(greedy).empty());

    const auto ilp = ilp_infer(t);
    for (const auto& [k, l] : ilp.labels) CHECK(l == Label::Before);
    CHECK(ilp.objective == doctest::Approx(2.25).epsilon(1e-12));
    CHECK(verify_transitivity(ilp).empty());
    CHECK(brute_force_infer(t).objective == ilp.objective);
  }

  TEST_CASE("no triple means greedy is optimal") {
    ConfidenceTable t;
    t.rows = {row("A", "B", {.7, .1, .1, .1}), row("B", "C", {.1, .6, .2, .1})};
    CHECK(ilp_infer(t).labels == greedy_assign(t).labels);
  }

  TEST_CASE("verify_transitivity names the triple") {
    Assignment a;
    a.labels[{"d", "A", "B"}] = Label::Before;
    a.labels[{"d", "B", "C"}] = Label::Before;
    a.labels[{"d", "A", "C"}] = Label::After;
    const auto v = verify_transitivity(a);
    REQUIRE(v.size() == 1);
    CHECK(v[0].doc_id == "d");
    CHECK(v[0].a == "A");
    CHECK(v[0].b == "B");
    CHECK(v[0].c == "C");
    CHECK_FALSE(v[0].derived);

    Assignment apart;
    apart.labels[{"d", "A", "B"}] = Label::Before;
    apart.labels[{"d", "C", "D"}] = Label::After;
    CHECK(verify_transitivity(apart).empty());
  }

  TEST_CASE("verify_transitivity reports clashes through missing pairs") {
    // A<B, B<C, C<D, D<A: no triangle is complete but the closure fails.
    Assignment a;
    a.labels[{"d", "A", "B"}] = Label::Before;
    a.labels[{"d", "B", "C"}] = Label::Before;
    a.labels[{"d", "C", "D"}] = Label::Before;
    a.labels[{"d", "D", "A"}] = Label::Before;
    const auto v = verify_transitivity(a);
    REQUIRE(v.size() == 1);
    CHECK(v[0].derived);
  }

  TEST_CASE("brute force limits") {
    ConfidenceTable one;
    one.rows = {row("a", "b", {.1, .2, .3, .4})};
    CHECK(brute_force_infer(one).labels.at({"d", "a", "b"}) == Label::Vague);
    Rng rng(1);
    const auto big = testing::random_table(rng, 6);  // 15 pairs
    CHECK_THROWS_AS(brute_force_infer(big), DataError);
  }

  TEST_CASE("BEFORE cycle forced by scores") {
    ConfidenceTable t;
    t.rows = {row("A", "B", {.8, .1, .05, .05}), row("B", "C", {.8, .1, .05, .05}),
              row("C", "A", {.8, .1, .05, .05})};
    t.sort();
    CHECK_FALSE(verify_transitivity(greedy_assign(t)).empty());
    const auto bf = brute_force_infer(t);
    CHECK(bf.labels != greedy_assign(t).labels);
    CHECK(verify_transitivity(bf).empty());
  }

  TEST_CASE("property: ILP matches brute force on complete documents") {
    Rng rng(123);
    for (int trial = 0; trial < 200; ++trial) {
      const auto t = testing::random_table(rng, 3 + rng.below(3));
      const auto ilp = ilp_infer(t);
      const auto bf = brute_force_infer(t);
      CHECK(ilp.objective == bf.objective);
      CHECK(verify_transitivity(ilp).empty());
      CHECK(testing::triples_hold(ilp));
      CHECK(consistent_per_doc(ilp));
    }
  }

  TEST_CASE("property: ILP matches brute force on incomplete documents") {
    Rng rng(321);
    for (int trial = 0; trial < 150; ++trial) {
      const auto t = testing::random_table(rng, 4 + rng.below(2), "d", 0.7);
      if (t.rows.empty()) continue;
      const auto ilp = ilp_infer(t);
      CHECK(ilp.objective == brute_force_infer(t).objective);
      CHECK(verify_transitivity(ilp).empty());
      CHECK(consistent_per_doc(ilp));
    }
  }

  TEST_CASE("property: ILP dominates consistent greedy, is deterministic, scale invariant") {
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
      ConfidenceTable t;
      const std::size_t docs = 1 + rng.below(4);
      for (std::size_t d = 0; d < docs; ++d) {
        const auto part = testing::random_table(rng, 2 + rng.below(5), "doc" + std::to_string(d), 0.8);
        t.rows.insert(t.rows.end(), part.rows.begin(), part.rows.end());
      }
      t.sort();
      const auto ilp = ilp_infer(t);
      auto greedy = greedy_assign(t);
      if (verify_transitivity(greedy).empty()) CHECK(ilp.objective >= greedy.objective);
      CHECK(ilp_infer(t).labels == ilp.labels);
      CHECK(ilp_infer_serial(t).labels == ilp.labels);
      CHECK(ilp_infer_serial(t).objective == ilp.objective);

      ConfidenceTable scaled = t;
      const double c = rng.uniform(0.1, 10.0);
      for (auto& r : scaled.rows)
        for (auto& s : r.scores) s *= c;
      const auto s = ilp_infer(scaled);
      CHECK(s.labels == ilp.labels);
      CHECK(s.objective == doctest::Approx(c * ilp.objective).epsilon(1e-9));
    }
  }

  TEST_CASE("log space objective") {
    const auto t = example_table();
    InferenceOptions o;
    o.space = ScoreSpace::Log;
    const auto a = ilp_infer(t, o);
    CHECK(a.objective == doctest::Approx(std::log(.9) * 2 + std::log(.45)).epsilon(1e-12));
    CHECK(brute_force_infer(t, o).objective == a.objective);
  }

  TEST_CASE("prediction file round trip and relabel") {
    Rng rng(8);
    const auto t = testing::random_table(rng, 4);
    std::stringstream buf;
    write_predictions(t, buf);
    const auto back = read_predictions(buf);
    REQUIRE(back.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      CHECK(back.rows[i].scores == t.rows[i].scores);
      CHECK(back.rows[i].label == t.rows[i].label);
    }
    const auto a = ilp_infer(t);
    const auto relabeled = relabel(t, a);
    CHECK(assignment_from_table(relabeled).labels == a.labels);
    const auto report = inference_report(t, a);
    CHECK(report["documents"].size() == 1);
    CHECK(report["violations"] == 0);
  }

  TEST_CASE("malformed prediction lines") {
    std::istringstream in(R"({"doc":"d","src":"a","dst":"b","scores":{"BEFORE":1},"label":"BEFORE"})");
    CHECK_THROWS_AS(read_predictions(in), DataError);
  }
}
