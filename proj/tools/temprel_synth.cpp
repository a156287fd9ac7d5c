// Writes the synthetic separable corpus, a lemma-family TemProb file and a
// ready-to-run config into one directory.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "temprel/corpus.hpp"
#include "temprel/cse.hpp"
#include "temprel/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic data generator"};
  std::string out_dir = "synthetic";
  std::size_t n_train = 200, n_test = 50;
  std::uint64_t seed = 1;
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--train", n_train, "training relations");
  app.add_option("--test", n_test, "test relations");
  app.add_option("--seed", seed, "generator seed");
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  const fs::path dir = out_dir;
  fs::create_directories(dir);
  temprel::SyntheticCorpusOptions train_opts;
  train_opts.n_instances = n_train;
  train_opts.seed = seed;
  train_opts.doc_prefix = "train";
  temprel::SyntheticCorpusOptions test_opts = train_opts;
  test_opts.n_instances = n_test;
  test_opts.seed = seed + 1000;
  test_opts.doc_prefix = "test";
  temprel::save_corpus(temprel::synthetic_corpus(train_opts), dir / "train.jsonl");
  temprel::save_corpus(temprel::synthetic_corpus(test_opts), dir / "test.jsonl");

  temprel::SyntheticTemProbOptions tp;
  tp.seed = seed;
  {
    std::ofstream out(dir / "temprob.tsv");
    temprel::write_temprob(temprel::synthetic_temprob(tp).table, out);
  }

  const nlohmann::json config = {{"corpus", "train.jsonl"},
                                 {"test_corpus", "test.jsonl"},
                                 {"temprob", "temprob.tsv"},
                                 {"cse_checkpoint", "cse.json"},
                                 {"model_checkpoint", "model.json"},
                                 {"predictions", "predictions.jsonl"},
                                 {"inferred", "inferred.jsonl"},
                                 {"output_dir", "out"},
                                 {"provider", "hash"},
                                 {"hash_dim", 16},
                                 {"lstm_hidden", 16},
                                 {"ffnn_hidden", 16},
                                 {"cse_bin_dim", 8},
                                 {"lr", 0.01},
                                 {"epochs", 30},
                                 {"dev_fraction", 0.0},
                                 {"cse_embed_dim", 16},
                                 {"cse_branch_hidden", 16},
                                 {"cse_combiner_hidden", 16},
                                 {"cse_lr", 0.01},
                                 {"cse_epochs", 200},
                                 {"cse_batch_size", 32},
                                 {"seed", seed}};
  std::ofstream(dir / "config.json") << config.dump(2) << "\n";
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}
