#include <doctest.h>

#include "support.hpp"
#include "temprel/error.hpp"
#include "temprel/metrics.hpp"
#include "temprel/significance.hpp"
#include "temprel/synthetic.hpp"

using namespace temprel;

namespace {

ConfusionMatrix from(std::initializer_list<std::tuple<Label, Label, std::uint64_t>> cells) {
  ConfusionMatrix m;
  for (const auto& [g, p, n] : cells) m.add(g, p, n);
  return m;
}

TemporalGraph chain(bool closed) {
  TemporalGraph g;
  g.set("A", "B", Label::Before);
  g.set("B", "C", Label::Before);
  if (closed) g.set("A", "C", Label::Before);
  return g;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("confusion from corpus and assignment") {
    SyntheticCorpusOptions o;
    o.n_instances = 3;
    o.seed = 4;
    Corpus gold = synthetic_corpus(o);
    gold.relations[0].label = Label::Before;
    gold.relations[1].label = Label::Before;
    gold.relations[2].label = Label::After;
    Assignment pred;
    for (const auto& r : gold.relations) pred.labels[{r.doc_id, r.src, r.dst}] = Label::Before;
    const auto m = confusion(gold, pred);
    CHECK(m.at(Label::Before, Label::Before) == 2);
    CHECK(m.at(Label::After, Label::Before) == 1);
    CHECK(m.total() == 3);
    CHECK(m.predicted_relations() == 3);
    CHECK(m.gold_relations() == 3);

    Assignment reversed;
    for (const auto& r : gold.relations) reversed.labels[{r.doc_id, r.dst, r.src}] = Label::After;
    CHECK(confusion(gold, reversed) == m);

    pred.labels.erase(pred.labels.begin());
    CHECK_THROWS_AS(confusion(gold, pred), DataError);
  }

  TEST_CASE("accuracy and relation_f1 examples") {
    const auto diag = from({{Label::Before, Label::Before, 4}, {Label::After, Label::After, 2},
                            {Label::Equal, Label::Equal, 1}});
    CHECK(accuracy(diag) == 1.0);
    const auto prf = relation_f1(diag);
    CHECK(prf.precision == 1.0);
    CHECK(prf.recall == 1.0);
    CHECK(prf.f1 == 1.0);

    CHECK(accuracy(from({{Label::Before, Label::Before, 3}, {Label::Before, Label::After, 1}})) == 0.75);
    CHECK_THROWS_AS(accuracy(ConfusionMatrix{}), DataError);

    const auto vague = from({{Label::Before, Label::Vague, 3}, {Label::Vague, Label::Vague, 2}});
    CHECK(vague.predicted_relations() == 0);
    const auto z = relation_f1(vague);
    CHECK(z.precision == 0.0);
    CHECK(z.recall == 0.0);
    CHECK(z.f1 == 0.0);

    // Numerator 6, S1 = 10, S2 = 8.
    const auto m = from({{Label::Before, Label::Before, 6}, {Label::Vague, Label::After, 4},
                         {Label::After, Label::Vague, 2}});
    const auto r = relation_f1(m);
    CHECK(r.precision == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(r.recall == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(r.f1 == doctest::Approx(2 * 0.6 * 0.75 / 1.35).epsilon(1e-15));
  }

  TEST_CASE("property: metric bounds") {
    Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
      ConfusionMatrix m;
      for (auto g : kAllLabels)
        for (auto p : kAllLabels) m.add(g, p, rng.below(6));
      if (m.total() == 0) continue;
      const double acc = accuracy(m);
      const auto prf = relation_f1(m);
      CHECK(acc >= 0.0);
      CHECK(acc <= 1.0);
      for (double v : {prf.precision, prf.recall, prf.f1}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      CHECK(m.correct_relations() <= std::min(m.predicted_relations(), m.gold_relations()));
    }
  }

  TEST_CASE("awareness examples") {
    const GraphSet gold{{"d", chain(true)}};
    const auto r = awareness(gold, {{"d", chain(false)}});
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(awareness(gold, gold).f1 == 1.0);

    TemporalGraph vague;
    vague.set("A", "B", Label::Vague);
    vague.set("B", "C", Label::Vague);
    vague.set("A", "C", Label::Vague);
    CHECK(awareness(gold, {{"d", vague}}).f1 == 0.0);

    TemporalGraph cycle = chain(false);
    cycle.set("C", "A", Label::Before);
    CHECK_THROWS_AS(awareness(gold, {{"d", cycle}}), DataError);
  }

  TEST_CASE("property: awareness bounded, perfect on identical graphs") {
    Rng rng(99);
    for (int trial = 0; trial < 80; ++trial) {
      GraphSet gold, pred;
      for (int d = 0; d < 3; ++d) {
        gold["d" + std::to_string(d)] = testing::random_point_graph(rng, 2 + rng.below(5), 0.7, 0.1);
        pred["d" + std::to_string(d)] = testing::random_point_graph(rng, 2 + rng.below(5), 0.7, 0.1);
      }
      const auto a = awareness(gold, pred);
      for (double v : {a.precision, a.recall, a.f1}) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      const auto same = awareness(gold, gold);
      bool any = false;
      for (const auto& [d, g] : gold) any = any || g.without_vague().edge_count() > 0;
      CHECK(same.f1 == (any ? 1.0 : 0.0));
    }
  }

  TEST_CASE("three metric average") {
    CHECK(three_metric_average(61.6, 66.6, 60.8) == doctest::Approx(63.0).epsilon(1e-12));
    CHECK(std::abs(three_metric_average(71.7, 76.7, 66.0) - 71.5) <= 0.05);
    CHECK(three_metric_average(1.0, 1.0, 1.0) == 1.0);
    CHECK_THROWS_AS(three_metric_average(0.5, 66.0, 70.0), std::domain_error);
    CHECK_THROWS_AS(three_metric_average(101.0, 66.0, 70.0), std::domain_error);
  }

  TEST_CASE("evaluate report with perfect predictions") {
    SyntheticCorpusOptions o;
    o.n_instances = 20;
    const Corpus gold = synthetic_corpus(o);
    Assignment pred;
    for (const auto& r : gold.relations) pred.labels[{r.doc_id, r.src, r.dst}] = *r.label;
    const auto j = to_json(evaluate(gold, pred));
    for (const char* k : {"acc", "f1", "f_aware", "avg"}) CHECK(j[k].get<double>() == 100.0);
    CHECK(j["n_instances"] == 20);
    CHECK(j["metadata"]["awareness_average"] == "micro");
  }
}

TEST_SUITE("significance") {
  TEST_CASE("mcnemar exact branch") {
    const auto r = mcnemar_counts(5, 15);
    CHECK(r.branch == "exact");
    CHECK(std::abs(r.p - testing::binomial_two_sided(20, 5)) < 1e-12);
    CHECK(r.p == doctest::Approx(0.041389).epsilon(1e-4));
    CHECK(mcnemar_counts(7, 7).p == 1.0);
    CHECK(mcnemar_counts(0, 0).p == 1.0);
  }

  TEST_CASE("mcnemar chi-square branch") {
    const auto r = mcnemar_counts(10, 30);
    CHECK(r.branch == "chi2");
    CHECK(r.statistic == doctest::Approx(19.0 * 19.0 / 40.0));
    // Upper tail of chi-square(1) equals the two-sided normal tail at sqrt(x).
    CHECK(r.p == doctest::Approx(std::erfc(std::sqrt(r.statistic) / std::sqrt(2.0))).epsilon(1e-12));
  }

  TEST_CASE("property: mcnemar exact branch is symmetric and matches the oracle") {
    for (unsigned a = 0; a < 25; ++a)
      for (unsigned b = 0; a + b < 25; ++b) {
        CHECK(mcnemar_counts(a, b).p == mcnemar_counts(b, a).p);
        CHECK(std::abs(mcnemar_counts(a, b).p - testing::binomial_two_sided(a + b, std::min(a, b))) < 1e-12);
      }
  }

  TEST_CASE("mcnemar on correctness vectors") {
    std::vector<bool> a(30, true), b(30, true);
    for (int i = 0; i < 5; ++i) a[i] = false;
    for (int i = 10; i < 25; ++i) b[i] = false;
    const auto r = mcnemar(a, b);
    CHECK(r.n01 == 5);
    CHECK(r.n10 == 15);
    CHECK(r.n == 30);
    CHECK_THROWS_AS(mcnemar(a, std::vector<bool>(3)), DataError);
  }

  TEST_CASE("paired t examples") {
    const std::vector<double> xs{1, 2, 3}, zero{0, 0, 0};
    const auto r = paired_t(xs, zero);
    CHECK(r.statistic == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-12));
    CHECK(std::abs(r.p - testing::t_two_sided_simpson(r.statistic, 2)) < 1e-6);
    CHECK(r.p == doctest::Approx(0.0742).epsilon(1e-3));
    CHECK(paired_t(xs, xs).p == 1.0);
    const std::vector<double> ones{1, 1, 1, 1, 1}, zeros(5, 0.0);
    CHECK(paired_t(ones, zeros).p == 0.0);
    CHECK_THROWS_AS(paired_t(std::vector<double>{1}, std::vector<double>{0}), DataError);
    CHECK_THROWS_AS(paired_t(xs, ones), DataError);
  }

  TEST_CASE("property: t tail matches numerical integration") {
    Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      const double t = rng.uniform(-6, 6);
      const double df = 1 + static_cast<double>(rng.below(30));
      CHECK(std::abs(student_t_two_sided(t, df) - testing::t_two_sided_simpson(t, df, 20000)) < 1e-7);
    }
  }
}
