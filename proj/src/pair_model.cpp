#include "temprel/pair_model.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <stdexcept>

#include "temprel/checkpoint.hpp"
#include "temprel/error.hpp"
#include "temprel/rng.hpp"

namespace temprel {

using nlohmann::json;

std::string_view to_string(EncoderKind kind) {
  return kind == EncoderKind::Concat ? "concat" : "pi";
}

std::optional<EncoderKind> parse_encoder(std::string_view text) {
  if (text == "concat" || text == "CONCAT") return EncoderKind::Concat;
  if (text == "pi" || text == "PI") return EncoderKind::PositionIndicators;
  return std::nullopt;
}

void ModelConfig::validate() const {
  if (lstm_hidden == 0 || ffnn_hidden == 0 || cse_bin_dim == 0 || max_tokens == 0)
    throw ConfigError("model sizes must be positive");
  if (cse_bins < 2) throw ConfigError("cse_bins must be at least 2");
  if (!(train.base_lr > 0.0)) throw ConfigError("lr must be positive");
  if (train.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (train.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (train.lr_period < 1) throw ConfigError("lr_period must be >= 1");
}

std::string_view marker_text(Marker m) {
  switch (m) {
    case Marker::E1Open: return "<e1>";
    case Marker::E1Close: return "</e1>";
    case Marker::E2Open: return "<e2>";
    case Marker::E2Close: return "</e2>";
  }
  return "?";
}

PairInput build_input(const Document& doc, const Event& e1, const Event& e2,
                      const EmbeddingProvider& provider, const ModelConfig& config) {
  const SentenceRange range{std::min(e1.sent, e2.sent), std::max(e1.sent, e2.sent)};
  auto offset_of = [&](const Event& e) {
    std::size_t off = 0;
    for (std::size_t s = range.first; s < e.sent; ++s) off += doc.sentences[s].size();
    return off + e.tok;
  };
  std::vector<std::string> words;
  for (std::size_t s = range.first; s <= range.last; ++s)
    words.insert(words.end(), doc.sentences[s].begin(), doc.sentences[s].end());
  const nn::Tensor full = embed_sequence(provider, doc, range);

  std::size_t p1 = offset_of(e1), p2 = offset_of(e2);
  const std::size_t T = words.size();
  std::size_t lo = 0, hi = T;
  if (T > config.max_tokens) {
    const std::size_t a = std::min(p1, p2), b = std::max(p1, p2);
    const std::size_t span = b - a + 1;
    if (span > config.max_tokens)
      throw DataError(DataErrorKind::Precondition,
                      "events '" + e1.eid + "' and '" + e2.eid + "' in '" + doc.id + "' are " +
                          std::to_string(span) + " tokens apart; max_tokens is " +
                          std::to_string(config.max_tokens));
    const std::size_t budget = config.max_tokens - span;
    std::size_t left = std::min(a, budget / 2);
    const std::size_t right = std::min(T - 1 - b, budget - left);
    left = std::min(a, budget - right);
    lo = a - left;
    hi = b + right + 1;
  }
  p1 -= lo;
  p2 -= lo;

  PairInput in;
  in.encoder = config.encoder;
  in.embeddings = nn::Tensor({hi - lo, full.cols()});
  for (std::size_t r = lo; r < hi; ++r)
    std::copy(full.row(r).begin(), full.row(r).end(), in.embeddings.row(r - lo).begin());

  auto push_token = [&](std::size_t r) {
    in.sequence.push_back({false, r});
    in.tokens.push_back(words[lo + r]);
  };
  auto push_marker = [&](Marker m) {
    in.sequence.push_back({true, static_cast<std::size_t>(m)});
    in.tokens.emplace_back(marker_text(m));
  };

  for (std::size_t r = 0; r < hi - lo; ++r) {
    if (config.encoder == EncoderKind::Concat) {
      if (r == p1) in.pos1 = in.sequence.size();
      if (r == p2) in.pos2 = in.sequence.size();
      push_token(r);
      continue;
    }
    if (r == p1) push_marker(Marker::E1Open);
    if (r == p2) push_marker(Marker::E2Open);
    if (r == p1) in.pos1 = in.sequence.size();
    if (r == p2) in.pos2 = in.sequence.size();
    push_token(r);
    if (r == p2) push_marker(Marker::E2Close);
    if (r == p1) push_marker(Marker::E1Close);
  }
  return in;
}

PairClassifier::PairClassifier(const ModelConfig& config, std::size_t embed_dim,
                               std::uint64_t seed)
    : config_(config),
      embed_dim_(embed_dim),
      seed_(seed),
      forward_("lstm.fwd", embed_dim, config.lstm_hidden),
      backward_("lstm.bwd", embed_dim, config.lstm_hidden),
      markers_("markers", {4, embed_dim}),
      bins_("cse.bins", {config.cse_bins, config.cse_bin_dim}),
      head_("head", representation_size() + config.cse_bin_dim, config.ffnn_hidden, kNumLabels) {
  config_.validate();
  if (embed_dim == 0) throw ConfigError("embedding dimension must be positive");
  Rng rng(seed);
  forward_.init(rng);
  backward_.init(rng);
  nn::init_uniform(markers_, embed_dim, rng);
  nn::init_uniform(bins_, config.cse_bin_dim, rng);
  head_.init(rng);
}

std::size_t PairClassifier::representation_size() const {
  return (config_.encoder == EncoderKind::Concat ? 4 : 2) * config_.lstm_hidden;
}

nn::Var PairClassifier::encode_pair(nn::Tape& t, const PairInput& input) {
  if (input.encoder != config_.encoder)
    throw std::invalid_argument("encode_pair: input built for a different encoder");
  const std::size_t L = input.sequence.size();
  if (input.pos1 >= L || input.pos2 >= L)
    throw std::out_of_range("encode_pair: event position outside the sequence");
  if (input.embeddings.cols() != embed_dim_)
    throw std::invalid_argument("encode_pair: embedding dimension mismatch");

  const nn::Var emb = t.constant(input.embeddings);
  const nn::Var marks = t.parameter(markers_);
  std::vector<nn::RowRef> rows;
  rows.reserve(L);
  for (const auto& item : input.sequence) rows.push_back({item.is_marker ? marks : emb, item.index});
  const nn::Var x = nn::gather_rows(t, rows);
  const nn::Var fwd = forward_.forward(t, x, false);
  const nn::Var bwd = backward_.forward(t, x, true);
  if (config_.encoder == EncoderKind::Concat) {
    const nn::Var parts[] = {nn::row(t, fwd, input.pos1), nn::row(t, bwd, input.pos1),
                             nn::row(t, fwd, input.pos2), nn::row(t, bwd, input.pos2)};
    return nn::concat(t, parts);
  }
  const nn::Var parts[] = {nn::row(t, fwd, L - 1), nn::row(t, bwd, 0)};
  return nn::concat(t, parts);
}

nn::Var PairClassifier::logits(nn::Tape& t, nn::Var representation,
                               std::optional<std::size_t> cse_bin) {
  nn::Var bin;
  if (cse_bin) {
    if (*cse_bin >= config_.cse_bins)
      throw std::out_of_range("CSE bin " + std::to_string(*cse_bin) + " outside [0, " +
                              std::to_string(config_.cse_bins) + ")");
    bin = nn::row(t, t.parameter(bins_), *cse_bin);
  } else {
    bin = t.constant(nn::Tensor({config_.cse_bin_dim}));
  }
  const nn::Var parts[] = {representation, bin};
  return head_.forward(t, nn::concat(t, parts));
}

nn::Var PairClassifier::loss(nn::Tape& t, const PairInput& input,
                             std::optional<std::size_t> cse_bin, Label gold) {
  std::array<double, kNumLabels> target{};
  target[index_of(gold)] = 1.0;
  return nn::softmax_cross_entropy(t, logits(t, encode_pair(t, input), cse_bin), target);
}

std::vector<double> PairClassifier::representation(const PairInput& input) const {
  // Forward-only: the tape reads the parameters and never writes gradients.
  auto& self = const_cast<PairClassifier&>(*this);
  nn::Tape t;
  const auto d = t.value(self.encode_pair(t, input)).data();
  return {d.begin(), d.end()};
}

std::array<double, kNumLabels> PairClassifier::score(const PairInput& input,
                                                     std::optional<std::size_t> cse_bin) const {
  auto& self = const_cast<PairClassifier&>(*this);
  nn::Tape t;
  const auto p = nn::softmax(t.value(self.logits(t, self.encode_pair(t, input), cse_bin)).data());
  return {p[0], p[1], p[2], p[3]};
}

std::array<double, kNumLabels> score_labels(const PairClassifier& model,
                                            std::span<const double> representation,
                                            std::optional<std::size_t> cse_bin) {
  if (representation.size() != model.representation_size())
    throw std::invalid_argument("score_labels: representation size mismatch");
  auto& self = const_cast<PairClassifier&>(model);
  nn::Tape t;
  const nn::Var rep =
      t.constant(nn::Tensor::vector({representation.begin(), representation.end()}));
  const auto p = nn::softmax(t.value(self.logits(t, rep, cse_bin)).data());
  return {p[0], p[1], p[2], p[3]};
}

std::vector<nn::Parameter*> PairClassifier::parameters() {
  std::vector<nn::Parameter*> p;
  for (auto* q : forward_.parameters()) p.push_back(q);
  for (auto* q : backward_.parameters()) p.push_back(q);
  p.push_back(&markers_);
  p.push_back(&bins_);
  for (auto* q : head_.parameters()) p.push_back(q);
  return p;
}

std::vector<const nn::Parameter*> PairClassifier::parameters() const {
  auto p = const_cast<PairClassifier*>(this)->parameters();
  return {p.begin(), p.end()};
}

json PairClassifier::to_json() const {
  const auto& c = config_;
  return {{"format_version", nn::kCheckpointFormatVersion},
          {"kind", "pair_classifier"},
          {"seed", seed_},
          {"embed_dim", embed_dim_},
          {"hyperparameters",
           {{"encoder", std::string(to_string(c.encoder))},
            {"lstm_hidden", c.lstm_hidden},
            {"ffnn_hidden", c.ffnn_hidden},
            {"cse_bins", c.cse_bins},
            {"cse_bin_dim", c.cse_bin_dim},
            {"max_tokens", c.max_tokens},
            {"lr", c.train.base_lr},
            {"epochs", c.train.epochs},
            {"batch_size", c.train.batch_size},
            {"lr_decay", c.train.lr_decay},
            {"lr_period", c.train.lr_period},
            {"clip_norm", c.train.clip_norm},
            {"train_seed", c.train.seed}}},
          {"parameters", nn::parameters_to_json(parameters())}};
}

PairClassifier PairClassifier::from_json(const json& j) {
  try {
    if (j.at("kind").get<std::string>() != "pair_classifier")
      throw DataError(DataErrorKind::Schema, "checkpoint is not a pair classifier");
    if (j.at("format_version").get<int>() != nn::kCheckpointFormatVersion)
      throw DataError(DataErrorKind::Schema, "unsupported checkpoint format version");
    const auto& h = j.at("hyperparameters");
    ModelConfig c;
    const auto enc = parse_encoder(h.at("encoder").get<std::string>());
    if (!enc) throw DataError(DataErrorKind::Schema, "unknown encoder in checkpoint");
    c.encoder = *enc;
    c.lstm_hidden = h.at("lstm_hidden").get<std::size_t>();
    c.ffnn_hidden = h.at("ffnn_hidden").get<std::size_t>();
    c.cse_bins = h.at("cse_bins").get<std::size_t>();
    c.cse_bin_dim = h.at("cse_bin_dim").get<std::size_t>();
    c.max_tokens = h.at("max_tokens").get<std::size_t>();
    c.train.base_lr = h.at("lr").get<double>();
    c.train.epochs = h.at("epochs").get<int>();
    c.train.batch_size = h.at("batch_size").get<int>();
    c.train.lr_decay = h.at("lr_decay").get<double>();
    c.train.lr_period = h.at("lr_period").get<int>();
    c.train.clip_norm = h.at("clip_norm").get<double>();
    c.train.seed = h.at("train_seed").get<std::uint64_t>();
    PairClassifier m(c, j.at("embed_dim").get<std::size_t>(), j.at("seed").get<std::uint64_t>());
    const auto params = m.parameters();
    nn::parameters_from_json(j.at("parameters"), params);
    return m;
  } catch (const json::exception& e) {
    throw DataError(DataErrorKind::Schema, std::string("bad classifier checkpoint: ") + e.what());
  }
}

void PairClassifier::save(const std::filesystem::path& path) const {
  nn::write_json_file(path, to_json());
}

PairClassifier PairClassifier::load(const std::filesystem::path& path) {
  return from_json(nn::read_json_file(path));
}

namespace {

std::vector<const RelationInstance*> sorted_relations(const Corpus& corpus) {
  std::vector<const RelationInstance*> rels;
  for (const auto& r : corpus.relations) rels.push_back(&r);
  std::stable_sort(rels.begin(), rels.end(), [](const auto* a, const auto* b) {
    return std::tie(a->doc_id, a->src, a->dst) < std::tie(b->doc_id, b->src, b->dst);
  });
  return rels;
}

Instance make_instance(const Corpus& corpus, const RelationInstance& r,
                       const EmbeddingProvider& provider, const SiameseModel* cse,
                       const ModelConfig& config) {
  const Document& doc = corpus.document(r.doc_id);
  const Event& e1 = doc.event(r.src);
  const Event& e2 = doc.event(r.dst);
  Instance inst;
  inst.key = {r.doc_id, r.src, r.dst};
  inst.input = build_input(doc, e1, e2, provider, config);
  if (cse) inst.cse_bin = discretize(cse->score(e1.lemma, e2.lemma), config.cse_bins);
  inst.gold = r.label;
  return inst;
}

ConfidenceRow score_instance(const PairClassifier& model, const Instance& inst) {
  ConfidenceRow row;
  row.doc_id = inst.key.doc_id;
  row.src = inst.key.src;
  row.dst = inst.key.dst;
  row.scores = model.score(inst.input, inst.cse_bin);
  row.label = argmax_label(row.scores);
  return row;
}

}  // namespace

std::vector<Instance> prepare_instances(const Corpus& corpus, const EmbeddingProvider& provider,
                                        const SiameseModel* cse, const ModelConfig& config) {
  std::vector<Instance> out;
  for (const auto* r : sorted_relations(corpus))
    out.push_back(make_instance(corpus, *r, provider, cse, config));
  return out;
}

double accuracy_on(const PairClassifier& model, const std::vector<Instance>& instances) {
  std::size_t labeled = 0, correct = 0;
  for (const auto& inst : instances) {
    if (!inst.gold) continue;
    ++labeled;
    if (argmax_label(model.score(inst.input, inst.cse_bin)) == *inst.gold) ++correct;
  }
  return labeled ? static_cast<double>(correct) / static_cast<double>(labeled) : 0.0;
}

TrainResult train(const PairClassifier& init, const Corpus& train_corpus, const Corpus& dev_corpus,
                  const EmbeddingProvider& provider, const SiameseModel* cse,
                  const ModelConfig& config) {
  config.validate();
  TrainResult result;
  result.model = init;
  if (config.train.epochs == 0) return result;

  std::vector<Instance> train_set;
  for (auto& inst : prepare_instances(train_corpus, provider, cse, config))
    if (inst.gold) train_set.push_back(std::move(inst));
  if (train_set.empty())
    throw DataError(DataErrorKind::Precondition, "training corpus has no labeled relations");
  const auto dev_set = prepare_instances(dev_corpus, provider, cse, config);
  const bool has_dev = std::any_of(dev_set.begin(), dev_set.end(),
                                   [](const Instance& i) { return i.gold.has_value(); });

  PairClassifier model = init;
  const auto params = model.parameters();
  nn::zero_grad(params);
  nn::Adam adam;
  Rng rng(config.train.seed);
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto batch = static_cast<std::size_t>(config.train.batch_size);
  double best_dev = -1.0;

  for (int epoch = 1; epoch <= config.train.epochs; ++epoch) {
    const double lr = nn::step_lr(config.train, epoch - 1);
    rng.shuffle(order);
    double total_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const double w = 1.0 / static_cast<double>(end - start);
      nn::zero_grad(params);
      for (std::size_t k = start; k < end; ++k) {
        const Instance& inst = train_set[order[k]];
        nn::Tape tape;
        const nn::Var l = model.loss(tape, inst.input, inst.cse_bin, *inst.gold);
        total_loss += tape.value(l)[0];
        tape.backward(l, w);
      }
      nn::clip_grad_norm(params, config.train.clip_norm);
      adam.step(params, lr);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = total_loss / static_cast<double>(train_set.size());
    rec.train_accuracy = accuracy_on(model, train_set);
    rec.dev_accuracy = has_dev ? accuracy_on(model, dev_set) : 0.0;
    result.history.push_back(rec);
    if (has_dev ? rec.dev_accuracy > best_dev : true) {
      best_dev = rec.dev_accuracy;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  nn::zero_grad(result.model.parameters());
  return result;
}

namespace {

ConfidenceTable predict_impl(const PairClassifier& model, const Corpus& corpus,
                             const EmbeddingProvider& provider, const SiameseModel* cse,
                             bool parallel) {
  const auto rels = sorted_relations(corpus);
  ConfidenceTable table;
  table.rows.resize(rels.size());
  std::exception_ptr error;
  const auto n = static_cast<std::ptrdiff_t>(rels.size());
#pragma omp parallel for schedule(dynamic, 4) if (parallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto inst = make_instance(corpus, *rels[static_cast<std::size_t>(i)], provider, cse,
                                      model.config());
      table.rows[static_cast<std::size_t>(i)] = score_instance(model, inst);
    } catch (...) {
#pragma omp critical(temprel_predict_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return table;
}

}  // namespace

ConfidenceTable predict(const PairClassifier& model, const Corpus& corpus,
                        const EmbeddingProvider& provider, const SiameseModel* cse) {
  return predict_impl(model, corpus, provider, cse, true);
}

ConfidenceTable predict_serial(const PairClassifier& model, const Corpus& corpus,
                               const EmbeddingProvider& provider, const SiameseModel* cse) {
  return predict_impl(model, corpus, provider, cse, false);
}

}  // namespace temprel
