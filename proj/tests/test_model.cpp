#include <doctest.h>

#include <numeric>

#include "support.hpp"
#include "temprel/error.hpp"
#include "temprel/optim.hpp"
#include "temprel/pair_model.hpp"
#include "temprel/synthetic.hpp"

using namespace temprel;

namespace {

Document dinner() {
  Document d;
  d.id = "dinner";
  d.sentences = {{"After", "eating", "dinner", ",", "he", "slept", "comfortably"}};
  d.events = {{"e1", 0, 1, "eat"}, {"e2", 0, 5, "sleep"}};
  return d;
}

Document three_sentences() {
  Document d;
  d.id = "three";
  d.sentences = {{"a", "b"}, {"c", "d", "e"}, {"f", "g", "h", "i"}};
  d.events = {{"e1", 1, 2, "x"}, {"e2", 2, 1, "y"}};
  return d;
}

ModelConfig small(EncoderKind kind, std::size_t h = 4) {
  ModelConfig c;
  c.encoder = kind;
  c.lstm_hidden = h;
  c.ffnn_hidden = 5;
  c.cse_bins = 4;
  c.cse_bin_dim = 3;
  return c;
}

void zero(PairClassifier& m) {
  for (auto* p : m.parameters()) p->value.fill(0.0);
}

const EmbeddingProvider kHash(HashFallback{6, 1});

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("PI markers wrap the event tokens") {
    const auto d = dinner();
    const auto in = build_input(d, d.events[0], d.events[1], kHash, small(EncoderKind::PositionIndicators));
    const std::vector<std::string> want{"After", "<e1>",  "eating",      "</e1>", "dinner", ",", "he",
                                        "<e2>",  "slept", "</e2>", "comfortably"};
    CHECK(in.tokens == want);
    CHECK(in.sequence.size() == d.sentences[0].size() + 4);
    CHECK(in.tokens[in.pos1] == "eating");
    CHECK(in.tokens[in.pos2] == "slept");
  }

  TEST_CASE("CONCAT positions equal token indices") {
    const auto d = dinner();
    const auto in = build_input(d, d.events[0], d.events[1], kHash, small(EncoderKind::Concat));
    CHECK(in.embeddings.rows() == 7);
    CHECK(in.pos1 == 1);
    CHECK(in.pos2 == 5);
  }

  TEST_CASE("cross-sentence offsets") {
    const auto d = three_sentences();
    const auto in = build_input(d, d.events[0], d.events[1], kHash, small(EncoderKind::Concat));
    CHECK(in.embeddings.rows() == 7);
    CHECK(in.pos1 == 2);
    CHECK(in.pos2 == 3 + 1);
    const auto rev = build_input(d, d.events[1], d.events[0], kHash, small(EncoderKind::Concat));
    CHECK(rev.pos1 == 4);
    CHECK(rev.pos2 == 2);
  }

  TEST_CASE("truncation keeps both events") {
    Document d;
    d.id = "long";
    d.sentences.emplace_back();
    for (int i = 0; i < 50; ++i) d.sentences[0].push_back("w" + std::to_string(i));
    d.events = {{"a", 0, 20, "a"}, {"b", 0, 25, "b"}};
    auto cfg = small(EncoderKind::Concat);
    cfg.max_tokens = 10;
    const auto in = build_input(d, d.events[0], d.events[1], kHash, cfg);
    CHECK(in.embeddings.rows() == 10);
    CHECK(in.tokens[in.pos1] == "w20");
    CHECK(in.tokens[in.pos2] == "w25");
    CHECK(in.pos1 == 2);

    cfg.max_tokens = 5;
    CHECK_THROWS_AS(build_input(d, d.events[0], d.events[1], kHash, cfg), DataError);
  }

  TEST_CASE("property: markers never displace event tokens") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
      Document d;
      d.id = "p";
      const std::size_t ns = 1 + rng.below(3);
      for (std::size_t s = 0; s < ns; ++s) {
        d.sentences.emplace_back();
        const std::size_t len = 1 + rng.below(8);
        for (std::size_t t = 0; t < len; ++t)
          d.sentences.back().push_back("s" + std::to_string(s) + "t" + std::to_string(t));
      }
      auto pick = [&](const char* id) {
        const std::size_t s = rng.below(ns);
        return Event{id, s, rng.below(d.sentences[s].size()), id};
      };
      d.events = {pick("a"), pick("b")};
      auto cfg = small(EncoderKind::PositionIndicators);
      cfg.max_tokens = 4 + rng.below(30);
      PairInput in;
      try {
        in = build_input(d, d.events[0], d.events[1], kHash, cfg);
      } catch (const DataError&) {
        continue;
      }
      const auto word = [&](const Event& e) { return d.sentences[e.sent][e.tok]; };
      CHECK(in.tokens[in.pos1] == word(d.events[0]));
      CHECK(in.tokens[in.pos2] == word(d.events[1]));
      CHECK(in.sequence.size() == in.embeddings.rows() + 4);
      CHECK(in.embeddings.rows() <= cfg.max_tokens);
      const bool same = d.events[0].sent == d.events[1].sent && d.events[0].tok == d.events[1].tok;
      if (!same) {
        CHECK(in.tokens[in.pos1 - 1] == "<e1>");
        CHECK(in.tokens[in.pos1 + 1] == "</e1>");
        CHECK(in.tokens[in.pos2 - 1] == "<e2>");
        CHECK(in.tokens[in.pos2 + 1] == "</e2>");
      }
    }
  }

  TEST_CASE("representation lengths") {
    const auto d = dinner();
    for (std::size_t h : {1u, 2u, 4u, 64u}) {
      for (auto kind : {EncoderKind::Concat, EncoderKind::PositionIndicators}) {
        const PairClassifier m(small(kind, h), kHash.dim(), 1);
        const auto in = build_input(d, d.events[0], d.events[1], kHash, m.config());
        const std::size_t want = (kind == EncoderKind::Concat ? 4 : 2) * h;
        CHECK(m.representation(in).size() == want);
        CHECK(m.representation_size() == want);
      }
    }
  }

  TEST_CASE("zero weights give zero representations and uniform scores") {
    const auto d = dinner();
    for (auto kind : {EncoderKind::Concat, EncoderKind::PositionIndicators}) {
      PairClassifier m(small(kind), kHash.dim(), 1);
      zero(m);
      const auto in = build_input(d, d.events[0], d.events[1], kHash, m.config());
      for (double v : m.representation(in)) CHECK(v == 0.0);
      for (double s : m.score(in, 2)) CHECK(s == 0.25);
    }
  }

  TEST_CASE("score_labels is a simplex point and depends on the bin") {
    const auto d = dinner();
    const PairClassifier m(small(EncoderKind::Concat), kHash.dim(), 7);
    const auto in = build_input(d, d.events[0], d.events[1], kHash, m.config());
    const auto rep = m.representation(in);
    for (std::size_t b = 0; b < 4; ++b) {
      const auto s = score_labels(m, rep, b);
      for (double v : s) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
      }
      CHECK(std::abs(std::accumulate(s.begin(), s.end(), 0.0) - 1.0) < 1e-12);
    }
    CHECK(score_labels(m, rep, 0) != score_labels(m, rep, 3));
    CHECK(score_labels(m, rep, std::nullopt) == m.score(in, std::nullopt));
    CHECK_THROWS_AS(score_labels(m, rep, 4), std::out_of_range);
  }

  TEST_CASE("end-to-end gradient check") {
    const auto d = three_sentences();
    for (auto kind : {EncoderKind::Concat, EncoderKind::PositionIndicators}) {
      PairClassifier m(small(kind, 3), kHash.dim(), 5);
      const auto in = build_input(d, d.events[0], d.events[1], kHash, m.config());
      const auto params = m.parameters();
      const auto loss = [&](bool g) {
        nn::Tape t;
        const auto l = m.loss(t, in, 1, Label::Equal);
        if (g) t.backward(l);
        return t.value(l)[0];
      };
      CHECK(nn::grad_check(loss, params) < 1e-4);
    }
  }

  TEST_CASE("training and prediction contracts") {
    SyntheticCorpusOptions o;
    o.n_instances = 30;
    const Corpus c = synthetic_corpus(o);
    auto cfg = small(EncoderKind::Concat);
    cfg.train.epochs = 0;
    const PairClassifier init(cfg, kHash.dim(), 3);
    const auto r0 = train(init, c, Corpus{}, kHash, nullptr, cfg);
    CHECK(r0.history.empty());
    CHECK(r0.model.to_json() == init.to_json());

    cfg.train.epochs = 3;
    cfg.train.base_lr = 0.01;
    const auto a = train(init, c, c, kHash, nullptr, cfg);
    const auto b = train(init, c, c, kHash, nullptr, cfg);
    REQUIRE(a.history.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.history[i].train_loss == b.history[i].train_loss);

    const auto t = predict(a.model, c, kHash, nullptr);
    CHECK(t.rows.size() == c.relations.size());
    const auto s = predict_serial(a.model, c, kHash, nullptr);
    for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(t.rows[i].scores == s.rows[i].scores);

    PairClassifier z = init;
    zero(z);
    for (const auto& row : predict(z, c, kHash, nullptr).rows)
      for (double v : row.scores) CHECK(v == 0.25);

    Corpus unlabeled = c;
    for (auto& rel : unlabeled.relations) rel.label.reset();
    CHECK_THROWS_AS(train(init, unlabeled, Corpus{}, kHash, nullptr, cfg), DataError);
    CHECK(predict(a.model, unlabeled, kHash, nullptr).rows.size() == c.relations.size());
  }

  TEST_CASE("checkpoint round trip is bit-exact") {
    const PairClassifier m(small(EncoderKind::PositionIndicators), kHash.dim(), 9);
    const auto copy = PairClassifier::from_json(nlohmann::json::parse(m.to_json().dump()));
    CHECK(copy.to_json() == m.to_json());
    const auto d = dinner();
    const auto in = build_input(d, d.events[0], d.events[1], kHash, m.config());
    CHECK(copy.score(in, 1) == m.score(in, 1));
  }
}
