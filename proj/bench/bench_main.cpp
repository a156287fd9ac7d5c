// Parallel kernels against their serial references.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "temprel/inference.hpp"
#include "temprel/pair_model.hpp"
#include "temprel/rng.hpp"
#include "temprel/synthetic.hpp"

using namespace temprel;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

ConfidenceTable random_table(std::size_t docs, std::size_t events, std::uint64_t seed) {
  Rng rng(seed);
  ConfidenceTable t;
  for (std::size_t d = 0; d < docs; ++d)
    for (std::size_t i = 0; i < events; ++i)
      for (std::size_t j = i + 1; j < events; ++j) {
        ConfidenceRow r;
        r.doc_id = "d" + std::to_string(d);
        r.src = "e" + std::to_string(i);
        r.dst = "e" + std::to_string(j);
        double sum = 0.0;
        for (auto& s : r.scores) sum += s = rng.uniform();
        for (auto& s : r.scores) s /= sum;
        r.label = argmax_label(r.scores);
        t.rows.push_back(r);
      }
  t.sort();
  return t;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());

  SyntheticCorpusOptions opts;
  opts.n_instances = 600;
  const Corpus corpus = synthetic_corpus(opts);
  const EmbeddingProvider provider(HashFallback{32, kDefaultHashSeed});
  ModelConfig mc;
  mc.lstm_hidden = 32;
  mc.ffnn_hidden = 32;
  const PairClassifier model(mc, provider.dim(), 1);
  const double p_par = seconds([&] { predict(model, corpus, provider, nullptr); }, 3);
  const double p_ser = seconds([&] { predict_serial(model, corpus, provider, nullptr); }, 3);
  std::printf("predict          parallel %.4fs  serial %.4fs  speedup %.2fx\n", p_par, p_ser,
              p_ser / p_par);

  const auto table = random_table(64, 6, 7);
  const double i_par = seconds([&] { ilp_infer(table); }, 3);
  const double i_ser = seconds([&] { ilp_infer_serial(table); }, 3);
  std::printf("ilp_infer        parallel %.4fs  serial %.4fs  speedup %.2fx\n", i_par, i_ser,
              i_ser / i_par);
  const bool same = ilp_infer(table).labels == ilp_infer_serial(table).labels;
  std::printf("ilp results identical: %s\n", same ? "yes" : "no");
  return same ? 0 : 1;
}
