#include <doctest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "temprel/commands.hpp"
#include "temprel/config.hpp"
#include "temprel/corpus.hpp"
#include "temprel/cse.hpp"
#include "temprel/error.hpp"
#include "temprel/inference.hpp"
#include "temprel/synthetic.hpp"

using namespace temprel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "temprel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Synthetic workspace with a small, quick configuration.
fs::path workspace(const std::string& name) {
  const auto dir = testing::scratch_dir(name);
  SyntheticCorpusOptions tr;
  tr.n_instances = 200;
  tr.seed = 1;
  tr.doc_prefix = "train";
  SyntheticCorpusOptions te = tr;
  te.n_instances = 50;
  te.seed = 1001;
  te.doc_prefix = "test";
  save_corpus(synthetic_corpus(tr), dir / "train.jsonl");
  save_corpus(synthetic_corpus(te), dir / "test.jsonl");
  std::ofstream(dir / "temprob.tsv") << [] {
    std::ostringstream s;
    write_temprob(synthetic_temprob({}).table, s);
    return s.str();
  }();
  const json cfg = {{"corpus", "train.jsonl"},      {"test_corpus", "test.jsonl"},
                    {"temprob", "temprob.tsv"},     {"cse_checkpoint", "cse.json"},
                    {"model_checkpoint", "model.json"}, {"predictions", "pred.jsonl"},
                    {"inferred", "inferred.jsonl"}, {"output_dir", "out"},
                    {"hash_dim", 16},               {"lstm_hidden", 16},
                    {"ffnn_hidden", 16},            {"cse_bin_dim", 8},
                    {"lr", 0.01},                   {"epochs", 10},
                    {"dev_fraction", 0.0},          {"cse_embed_dim", 16},
                    {"cse_branch_hidden", 16},      {"cse_combiner_hidden", 16},
                    {"cse_lr", 0.01},               {"cse_epochs", 100},
                    {"cse_batch_size", 32}};
  std::ofstream(dir / "config.json") << cfg.dump(2);
  return dir;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("parse_config fills defaults") {
    const auto c = parse_config(json{{"corpus", "c.jsonl"}, {"provider", "hash"}});
    CHECK(c.model.lstm_hidden == 64);
    CHECK(c.model.cse_bins == 10);
    CHECK(c.model.ffnn_hidden == 64);
    CHECK(c.model.cse_bin_dim == 32);
    CHECK(c.cse.lr == 1e-4);
    CHECK(c.cse.epochs == 20);
    CHECK(c.cse.batch_size == 500);
    CHECK(c.dev_fraction == 0.2);
    CHECK(c.model.train.lr_decay == 0.5);
    CHECK(c.model.train.lr_period == 10);
    CHECK(c.effective == parse_config(json{{"corpus", "c.jsonl"}, {"provider", "hash"}}).effective);
  }

  TEST_CASE("parse_config rejects bad input") {
    try {
      parse_config(json{{"hiden_size", 3}});
      FAIL("no error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("hiden_size") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(json{{"epochs", "many"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"epochs", -1}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"provider", "static"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"cse_bins", 1}}), ConfigError);
    CHECK_THROWS_AS(parse_config(json{{"encoder", "cnn"}}), ConfigError);
  }

  TEST_CASE("overrides") {
    json j = json::object();
    apply_override(j, "epochs=3");
    apply_override(j, "encoder=pi");
    apply_override(j, "use_cse=true");
    const auto c = parse_config(j);
    CHECK(c.model.train.epochs == 3);
    CHECK(c.model.encoder == EncoderKind::PositionIndicators);
    CHECK(c.use_cse);
    CHECK_THROWS_AS(apply_override(j, "novalue"), ConfigError);
  }

  TEST_CASE("exit codes and error lines") {
    const auto dir = testing::scratch_dir("cli_errors");
    CHECK(cli({"stats"}).code == kExitConfig);
    CHECK(cli({"dance", "--config", "x"}).code == kExitConfig);
    CHECK(cli({"stats", "--config", (dir / "missing.json").string()}).code == kExitConfig);

    std::ofstream(dir / "unknown.json") << R"({"hiden_size": 3})";
    const auto unknown = cli({"stats", "--config", (dir / "unknown.json").string()});
    CHECK(unknown.code == kExitConfig);
    const auto err = json::parse(unknown.err);
    CHECK(err["error"]["type"] == "config");
    CHECK(err["error"]["message"].get<std::string>().find("hiden_size") != std::string::npos);

    std::ofstream(dir / "bad.jsonl") << "{\"id\":\"d\",\"sentences\":[]}\n";
    std::ofstream(dir / "bad.json") << R"({"corpus": "bad.jsonl"})";
    const auto data = cli({"stats", "--config", (dir / "bad.json").string()});
    CHECK(data.code == kExitData);
    CHECK(json::parse(data.err)["error"]["line"] == 1);
  }

  TEST_CASE("graph command") {
    const auto dir = testing::scratch_dir("cli_graph");
    std::ofstream(dir / "g.json") << R"({"nodes":["A","B","C"],"edges":[{"src":"A","dst":"B","label":"BEFORE"},{"src":"B","dst":"C","label":"BEFORE"}]})";
    std::ofstream(dir / "c.json") << R"({"graph_input": "g.json", "graph_op": "closure"})";
    const auto r = cli({"graph", "--config", (dir / "c.json").string()});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["consistent"] == true);
    CHECK(j["graph"]["edges"].size() == 3);
    const auto ok = cli({"graph", "--config", (dir / "c.json").string(), "--set", "graph_op=is_consistent"});
    CHECK(json::parse(ok.out)["consistent"] == true);
  }

  TEST_CASE("full pipeline on the synthetic corpus") {
    const auto dir = workspace("cli_pipeline");
    const auto cfg = (dir / "config.json").string();
    const auto stats = cli({"stats", "--config", cfg});
    REQUIRE(stats.code == 0);
    CHECK(json::parse(stats.out)["corpus"]["n_relations"] == 200);
    CHECK(json::parse(stats.out)["test_corpus"]["n_relations"] == 50);

    for (const char* step : {"train-cse", "train", "predict", "infer", "evaluate"}) {
      const auto r = cli({step, "--config", cfg, "--set", "use_cse=true"});
      CAPTURE(step);
      CAPTURE(r.err);
      REQUIRE(r.code == 0);
    }
    const auto report = json::parse(slurp(dir / "out" / "eval_report.json"));
    CHECK(report["avg"].get<double>() >= 90.0);
    const auto inferred = assignment_from_table(load_predictions(dir / "inferred.jsonl"));
    CHECK(verify_transitivity(inferred).empty());
    CHECK(fs::exists(dir / "out" / "config.train.json"));

    // pred = gold
    const Corpus gold = load_corpus(dir / "test.jsonl");
    ConfidenceTable perfect;
    for (const auto& r : gold.relations) {
      ConfidenceRow row{r.doc_id, r.src, r.dst, {}, *r.label};
      row.scores[index_of(*r.label)] = 1.0;
      perfect.rows.push_back(row);
    }
    save_predictions(perfect, dir / "perfect.jsonl");
    const auto e = cli({"evaluate", "--config", cfg, "--set", "eval_predictions=perfect.jsonl"});
    REQUIRE(e.code == 0);
    const auto j = json::parse(e.out);
    for (const char* k : {"acc", "f1", "f_aware", "avg"}) CHECK(j[k].get<double>() == 100.0);

    const auto cmp = cli({"compare", "--config", cfg, "--set", "compare_a=perfect.jsonl", "--set",
                          "compare_b=pred.jsonl"});
    REQUIRE(cmp.code == 0);
    CHECK(json::parse(cmp.out)["test"] == "mcnemar");
  }

  TEST_CASE("grid mode writes a results table") {
    const auto dir = workspace("cli_grid");
    std::ofstream(dir / "grid.json") << R"({"runs": [
      {"system": "CONCAT", "embedding": "hash16", "set": {"encoder": "concat", "epochs": 2}},
      {"system": "P.I.", "embedding": "hash16", "set": {"encoder": "pi", "epochs": 2}}]})";
    const auto r = cli({"train", "--config", (dir / "config.json").string(), "--grid",
                        (dir / "grid.json").string()});
    CAPTURE(r.err);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("| P.I. | hash16 |") != std::string::npos);
    const auto report = json::parse(slurp(dir / "out" / "grid_report.json"));
    CHECK(report["rows"].size() == 2);
    CHECK(fs::exists(dir / "out" / "1" / "eval_report.json"));
    CHECK(cli({"predict", "--config", (dir / "config.json").string(), "--grid",
               (dir / "grid.json").string()}).code == kExitConfig);
  }
}
