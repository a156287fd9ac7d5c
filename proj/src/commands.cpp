#include "temprel/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "temprel/checkpoint.hpp"
#include "temprel/corpus.hpp"
#include "temprel/cse.hpp"
#include "temprel/error.hpp"
#include "temprel/inference.hpp"
#include "temprel/metrics.hpp"
#include "temprel/pair_model.hpp"
#include "temprel/significance.hpp"
#include "temprel/tempgraph.hpp"

namespace temprel {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"train-cse", "train",   "predict", "infer",
                                                 "evaluate",  "compare", "graph",   "stats"};
  return names;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(DataErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::optional<SiameseModel> maybe_cse(const RunConfig& c) {
  if (!c.use_cse) return std::nullopt;
  return SiameseModel::load(require_input(c, c.cse_checkpoint, "cse_checkpoint"));
}

json stats_json(const Corpus& corpus) {
  const auto s = corpus_stats(corpus);
  json hist = json::object();
  for (std::size_t l = 0; l < kNumLabels; ++l)
    hist[std::string(to_string(label_at(l)))] = s.label_histogram[l];
  return {{"n_docs", s.n_docs},
          {"n_events", s.n_events},
          {"n_relations", s.n_relations},
          {"labels", hist},
          {"unlabeled", s.unlabeled}};
}

json cmd_train_cse(const RunConfig& c) {
  const auto table = load_temprob(require_input(c, c.temprob, "temprob"));
  const auto& out_path = require_output(c.cse_checkpoint, "cse_checkpoint");
  const auto result = train_cse(table, c.cse);
  result.model.save(out_path);
  json history = json::array();
  for (const auto& e : result.history)
    history.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}});
  const json summary = {{"command", "train-cse"},
                        {"checkpoint", out_path.string()},
                        {"best_epoch", result.best_epoch},
                        {"train_examples", result.train_examples.size()},
                        {"val_examples", result.val_examples.size()},
                        {"history", history}};
  write_json(c.output_dir / "cse_history.json", summary);
  return summary;
}

json cmd_train(const RunConfig& c) {
  const Corpus corpus = load_corpus(require_input(c, c.corpus, "corpus"));
  const auto& out_path = require_output(c.model_checkpoint, "model_checkpoint");
  Corpus train_set, dev_set;
  std::string dev_source;
  if (c.dev_corpus) {
    train_set = corpus;
    dev_set = load_corpus(require_input(c, c.dev_corpus, "dev_corpus"));
    dev_source = "file";
  } else if (c.dev_fraction > 0.0 && corpus.documents.size() >= 2) {
    std::tie(train_set, dev_set) = split_dev(corpus, c.dev_fraction, c.seed);
    dev_source = "split";
  } else {
    train_set = corpus;
    dev_source = "none";
  }
  const auto provider = make_provider(c);
  const auto cse = maybe_cse(c);
  const PairClassifier init(c.model, provider.dim(), c.seed);
  const auto result = train(init, train_set, dev_set, provider, cse ? &*cse : nullptr, c.model);
  result.model.save(out_path);
  json history = json::array();
  for (const auto& e : result.history)
    history.push_back({{"epoch", e.epoch},
                       {"lr", e.lr},
                       {"train_loss", e.train_loss},
                       {"train_acc", e.train_accuracy},
                       {"dev_acc", e.dev_accuracy}});
  json dev_docs = json::array();
  for (const auto& d : dev_set.documents) dev_docs.push_back(d.id);
  const json summary = {{"command", "train"},
                        {"checkpoint", out_path.string()},
                        {"best_epoch", result.best_epoch},
                        {"train_relations", train_set.relations.size()},
                        {"dev_relations", dev_set.relations.size()},
                        {"dev_source", dev_source},
                        {"dev_documents", dev_docs},
                        {"split_seed", c.seed},
                        {"provider", std::string(provider.kind())},
                        {"history", history}};
  write_json(c.output_dir / "train_history.json", summary);
  return summary;
}

json cmd_predict(const RunConfig& c) {
  const auto model = PairClassifier::load(require_input(c, c.model_checkpoint, "model_checkpoint"));
  const Corpus corpus = load_corpus(require_input(c, c.test_corpus, "test_corpus"));
  const auto& out_path = require_output(c.predictions, "predictions");
  const auto provider = make_provider(c);
  if (provider.dim() != model.embed_dim())
    throw DataError(DataErrorKind::DimensionMismatch,
                    "embedding dimension " + std::to_string(provider.dim()) +
                        " does not match the checkpoint's " + std::to_string(model.embed_dim()));
  const auto cse = maybe_cse(c);
  const auto table = predict(model, corpus, provider, cse ? &*cse : nullptr);
  save_predictions(table, out_path);
  return {{"command", "predict"}, {"predictions", out_path.string()}, {"rows", table.rows.size()}};
}

json cmd_infer(const RunConfig& c) {
  const auto table = load_predictions(require_input(c, c.predictions, "predictions"));
  const auto& out_path = require_output(c.inferred, "inferred");
  InferenceOptions options;
  options.space = c.score_space;
  const auto assignment = ilp_infer(table, options);
  const auto violations = verify_transitivity(assignment);
  if (!violations.empty())
    throw std::runtime_error("inference produced an inconsistent assignment in document '" +
                             violations.front().doc_id + "'");
  save_predictions(relabel(table, assignment), out_path);
  json report = inference_report(table, assignment);
  report["score_space"] = c.score_space == ScoreSpace::Log ? "log" : "probability";
  write_json(c.output_dir / "infer_report.json", report);
  return {{"command", "infer"},
          {"inferred", out_path.string()},
          {"total_objective", assignment.objective},
          {"violations", 0}};
}

const fs::path& eval_input(const RunConfig& c) {
  if (c.eval_predictions) return require_input(c, c.eval_predictions, "eval_predictions");
  if (c.inferred) return require_input(c, c.inferred, "inferred");
  return require_input(c, c.predictions, "predictions");
}

json cmd_evaluate(const RunConfig& c) {
  const Corpus gold = load_corpus(require_input(c, c.test_corpus, "test_corpus"));
  const auto& pred_path = eval_input(c);
  const auto pred = assignment_from_table(load_predictions(pred_path));
  json report = to_json(evaluate(gold, pred));
  report["metadata"]["predictions"] = pred_path.filename().string();
  write_json(c.output_dir / "eval_report.json", report);
  return report;
}

json cmd_compare(const RunConfig& c) {
  const Corpus gold = load_corpus(require_input(c, c.test_corpus, "test_corpus"));
  const auto a = assignment_from_table(load_predictions(require_input(c, c.compare_a, "compare_a")));
  const auto b = assignment_from_table(load_predictions(require_input(c, c.compare_b, "compare_b")));
  const auto ca = correctness(gold, a);
  const auto cb = correctness(gold, b);
  json report = to_json(mcnemar(ca, cb));
  report["acc_a"] = 100.0 * accuracy(confusion(gold, a));
  report["acc_b"] = 100.0 * accuracy(confusion(gold, b));
  write_json(c.output_dir / "compare_report.json", report);
  return report;
}

json cmd_graph(const RunConfig& c) {
  const auto j = nn::read_json_file(require_input(c, c.graph_input, "graph_input"));
  const TemporalGraph g = TemporalGraph::from_json(j);
  json result;
  if (c.graph_op == "is_consistent") {
    result = {{"op", "is_consistent"}, {"consistent", is_consistent(g)}};
  } else if (c.graph_op == "reduce") {
    result = {{"op", "reduce"}, {"graph", reduce(g).to_json()}};
  } else {
    const auto closed = closure(g);
    if (const auto* bad = std::get_if<Inconsistency>(&closed)) {
      result = {{"op", "closure"},
                {"consistent", false},
                {"triple", {bad->a, bad->b, bad->c}},
                {"ab", to_string(bad->ab)},
                {"bc", to_string(bad->bc)}};
    } else {
      result = {{"op", "closure"},
                {"consistent", true},
                {"graph", std::get<TemporalGraph>(closed).to_json()}};
    }
  }
  write_json(c.output_dir / "graph_output.json", result);
  return result;
}

json cmd_stats(const RunConfig& c) {
  if (!c.corpus && !c.test_corpus) throw ConfigError("stats needs 'corpus' or 'test_corpus'");
  json out = {{"command", "stats"}};
  if (c.corpus) out["corpus"] = stats_json(load_corpus(require_input(c, c.corpus, "corpus")));
  if (c.test_corpus)
    out["test_corpus"] = stats_json(load_corpus(require_input(c, c.test_corpus, "test_corpus")));
  return out;
}

}  // namespace

json run_command(const std::string& command, const RunConfig& config) {
  using Fn = json (*)(const RunConfig&);
  static const std::map<std::string, Fn> table = {
      {"train-cse", cmd_train_cse}, {"train", cmd_train},     {"predict", cmd_predict},
      {"infer", cmd_infer},         {"evaluate", cmd_evaluate}, {"compare", cmd_compare},
      {"graph", cmd_graph},         {"stats", cmd_stats}};
  const auto it = table.find(command);
  if (it == table.end()) throw ConfigError("unknown command '" + command + "'");
  fs::create_directories(config.output_dir);
  write_json(config.output_dir / ("config." + command + ".json"), config.effective);
  return it->second(config);
}

json run_grid(const json& base, const json& grid, const fs::path& base_dir) {
  if (!grid.is_object() || !grid.contains("runs") || !grid["runs"].is_array() || grid["runs"].empty())
    throw ConfigError("grid file needs a non-empty 'runs' array");
  const RunConfig base_config = parse_config(base, base_dir);
  json rows = json::array();
  std::size_t index = 0;
  for (const auto& run : grid["runs"]) {
    if (!run.is_object()) throw ConfigError("grid run " + std::to_string(index) + " is not an object");
    for (const auto& [key, value] : run.items())
      if (key != "system" && key != "embedding" && key != "set")
        throw ConfigError("unknown grid run key '" + key + "'");
    json j = base;
    if (run.contains("set")) {
      if (!run["set"].is_object()) throw ConfigError("grid 'set' must be an object");
      for (const auto& [key, value] : run["set"].items()) j[key] = value;
    }
    const fs::path dir = fs::absolute(base_config.output_dir / std::to_string(index));
    j["output_dir"] = dir.string();
    j["model_checkpoint"] = (dir / "model.json").string();
    j["predictions"] = (dir / "predictions.jsonl").string();
    j["inferred"] = (dir / "inferred.jsonl").string();
    j.erase("eval_predictions");
    const RunConfig c = parse_config(j, base_dir);
    run_command("train", c);
    run_command("predict", c);
    run_command("infer", c);
    const json report = run_command("evaluate", c);
    rows.push_back({{"system", run.value("system", std::string(to_string(c.model.encoder)) +
                                                       (c.use_cse ? "+CSE" : ""))},
                    {"embedding", run.value("embedding", j.value("provider", "hash"))},
                    {"acc", report["acc"]},
                    {"f1", report["f1"]},
                    {"f_aware", report["f_aware"]},
                    {"avg", report["avg"]},
                    {"dir", std::to_string(index)}});
    ++index;
  }
  const json report = {{"rows", rows}, {"columns", {"acc", "f1", "f_aware", "avg"}}};
  write_json(base_config.output_dir / "grid_report.json", report);
  write_text(base_config.output_dir / "grid_report.md", grid_table(report));
  return report;
}

std::string grid_table(const json& report) {
  std::ostringstream s;
  s << "| System | Emb. | Acc. | F1 | F_aware | Avg. |\n";
  s << "|---|---|---|---|---|---|\n";
  s << std::fixed << std::setprecision(1);
  for (const auto& r : report.at("rows")) {
    s << "| " << r.at("system").get<std::string>() << " | " << r.at("embedding").get<std::string>()
      << " | " << r.at("acc").get<double>() << " | " << r.at("f1").get<double>() << " | "
      << r.at("f_aware").get<double>() << " | " << r.at("avg").get<double>() << " |\n";
  }
  return s.str();
}

namespace {

void error_line(std::ostream& err, const std::string& type, const std::string& kind,
                const std::string& message, std::size_t line = 0) {
  json e = {{"type", type}, {"kind", kind}, {"message", message}};
  if (line) e["line"] = line;
  err << json{{"error", e}}.dump() << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal relation classification toolkit"};
  std::string command, config_path, grid_path;
  std::vector<std::string> overrides;
  app.add_option("command", command, "train-cse|train|predict|infer|evaluate|compare|graph|stats")
      ->required()
      ->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--set", overrides, "key=value override, repeatable");
  app.add_option("--grid", grid_path, "grid file; with 'train' runs the full pipeline per entry");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_line(err, "config", "usage", e.what());
    return kExitConfig;
  }

  try {
    if (!grid_path.empty()) {
      if (command != "train") throw ConfigError("--grid is only valid with the train command");
      const auto read = [](const std::string& p) {
        std::ifstream in(p);
        if (!in) throw ConfigError("cannot open '" + p + "'");
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw ConfigError("'" + p + "' is not valid JSON");
        return j;
      };
      json base = read(config_path);
      if (!base.is_object()) throw ConfigError("config must be a JSON object");
      for (const auto& o : overrides) apply_override(base, o);
      const json report = run_grid(base, read(grid_path), fs::path(config_path).parent_path());
      out << grid_table(report);
      return kExitOk;
    }
    const RunConfig config = load_config(config_path, overrides);
    out << run_command(command, config).dump() << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    error_line(err, "config", "config", e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    error_line(err, "data", to_string(e.kind()), e.what(), e.line());
    return kExitData;
  } catch (const std::exception& e) {
    error_line(err, "runtime", "runtime", e.what());
    return kExitRuntime;
  }
}

}  // namespace temprel
