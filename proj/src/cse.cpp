#include "temprel/cse.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "temprel/checkpoint.hpp"
#include "temprel/error.hpp"
#include "temprel/optim.hpp"
#include "temprel/rng.hpp"

namespace temprel {

using nlohmann::json;

bool TemProbTable::add(TemProbEntry entry) {
  const auto key = std::make_pair(entry.v1, entry.v2);
  auto& seen = seen_[key];
  const std::size_t r = index_of(entry.relation);
  if (seen[r]) return false;
  seen[r] = true;
  counts_[key][r] += entry.count;
  entries_.push_back(std::move(entry));
  return true;
}

std::vector<std::string> TemProbTable::vocabulary() const {
  std::set<std::string> v;
  for (const auto& e : entries_) {
    v.insert(e.v1);
    v.insert(e.v2);
  }
  return {v.begin(), v.end()};
}

std::array<std::uint64_t, kNumLabels> TemProbTable::counts(const std::string& v1,
                                                           const std::string& v2) const {
  auto it = counts_.find({v1, v2});
  return it == counts_.end() ? std::array<std::uint64_t, kNumLabels>{} : it->second;
}

std::vector<std::pair<std::string, std::string>> TemProbTable::pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, _] : counts_) out.push_back(k);
  return out;
}

TemProbTable read_temprob(std::istream& in) {
  TemProbTable table;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(text);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() != 4)
      throw DataError(DataErrorKind::Parse, "expected 4 tab-separated fields", line);
    const auto label = parse_label(fields[2]);
    if (!label) throw DataError(DataErrorKind::BadLabel, "unknown label '" + fields[2] + "'", line);
    if (!fields[3].empty() && fields[3][0] == '-')
      throw DataError(DataErrorKind::NegativeCount, "negative count " + fields[3], line);
    std::uint64_t count = 0;
    const auto* end = fields[3].data() + fields[3].size();
    auto [ptr, ec] = std::from_chars(fields[3].data(), end, count);
    if (ec != std::errc() || ptr != end)
      throw DataError(DataErrorKind::Parse, "bad count '" + fields[3] + "'", line);
    if (!table.add({fields[0], fields[1], *label, count}))
      throw DataError(DataErrorKind::DuplicateEntry,
                      "duplicate tuple (" + fields[0] + ", " + fields[1] + ", " + fields[2] + ")",
                      line);
  }
  return table;
}

TemProbTable load_temprob(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorKind::Io, "cannot open TemProb file '" + path.string() + "'");
  return read_temprob(in);
}

void write_temprob(const TemProbTable& table, std::ostream& out) {
  for (const auto& e : table.entries())
    out << e.v1 << '\t' << e.v2 << '\t' << to_string(e.relation) << '\t' << e.count << '\n';
}

std::optional<double> target_before_prob(const TemProbTable& table, const std::string& v1,
                                         const std::string& v2) {
  const auto c = table.counts(v1, v2);
  const auto b = c[index_of(Label::Before)], a = c[index_of(Label::After)];
  if (a + b == 0) return std::nullopt;
  return static_cast<double>(b) / static_cast<double>(a + b);
}

SiameseModel::SiameseModel(std::vector<std::string> vocabulary, const CseConfig& config)
    : config_(config),
      vocab_(std::move(vocabulary)),
      embed_("cse.embed", {vocab_.size() + 1, config.embed_dim}),
      branch_w_("cse.branch.w", {config.branch_hidden, config.embed_dim}),
      branch_b_("cse.branch.b", {config.branch_hidden}),
      combiner_("cse.combiner", 2 * config.branch_hidden, config.combiner_hidden, 1) {
  for (std::size_t i = 0; i < vocab_.size(); ++i) index_.emplace(vocab_[i], i + 1);
  Rng rng(config.seed);
  for (auto& v : embed_.value.data()) v = rng.uniform(-0.5, 0.5);
  nn::init_uniform(branch_w_, config.embed_dim, rng);
  nn::init_uniform(branch_b_, config.embed_dim, rng);
  combiner_.init(rng);
}

std::size_t SiameseModel::lemma_index(const std::string& lemma) const {
  auto it = index_.find(lemma);
  return it == index_.end() ? 0 : it->second;
}

nn::Var SiameseModel::branch(nn::Tape& t, nn::Var embed, nn::Var w, nn::Var b,
                             std::size_t index) {
  return nn::tanh(t, nn::linear(t, nn::row(t, embed, index), w, b));
}

nn::Var SiameseModel::logit(nn::Tape& t, const std::string& v1, const std::string& v2) {
  // A single tape leaf per shared parameter: both branches read and write
  // the same storage.
  const nn::Var embed = t.parameter(embed_);
  const nn::Var w = t.parameter(branch_w_);
  const nn::Var b = t.parameter(branch_b_);
  const nn::Var parts[] = {branch(t, embed, w, b, lemma_index(v1)),
                           branch(t, embed, w, b, lemma_index(v2))};
  return combiner_.forward(t, nn::concat(t, parts));
}

std::vector<double> SiameseModel::branch_output(const std::string& lemma) const {
  const auto e = embed_.value.row(lemma_index(lemma));
  std::vector<double> out(branch_w_.value.rows());
  for (std::size_t o = 0; o < out.size(); ++o) {
    double acc = branch_b_.value[o];
    const auto w = branch_w_.value.row(o);
    for (std::size_t i = 0; i < e.size(); ++i) acc += w[i] * e[i];
    out[o] = std::tanh(acc);
  }
  return out;
}

double SiameseModel::score(const std::string& v1, const std::string& v2) const {
  auto joined = branch_output(v1);
  const auto second = branch_output(v2);
  joined.insert(joined.end(), second.begin(), second.end());
  return nn::sigmoid(nn::ffnn_forward(combiner_, joined)[0]);
}

std::vector<nn::Parameter*> SiameseModel::parameters() {
  std::vector<nn::Parameter*> p = {&embed_, &branch_w_, &branch_b_};
  for (auto* q : combiner_.parameters()) p.push_back(q);
  return p;
}

std::vector<const nn::Parameter*> SiameseModel::parameters() const {
  auto p = const_cast<SiameseModel*>(this)->parameters();
  return {p.begin(), p.end()};
}

json SiameseModel::to_json() const {
  const auto params = parameters();
  return {{"format_version", nn::kCheckpointFormatVersion},
          {"kind", "cse"},
          {"seed", config_.seed},
          {"hyperparameters",
           {{"embed_dim", config_.embed_dim},
            {"branch_hidden", config_.branch_hidden},
            {"combiner_hidden", config_.combiner_hidden},
            {"lr", config_.lr},
            {"epochs", config_.epochs},
            {"batch_size", config_.batch_size},
            {"val_fraction", config_.val_fraction},
            {"clip_norm", config_.clip_norm}}},
          {"vocabulary", vocab_},
          {"parameters", nn::parameters_to_json(params)}};
}

SiameseModel SiameseModel::from_json(const json& j) {
  try {
    if (j.at("kind").get<std::string>() != "cse")
      throw DataError(DataErrorKind::Schema, "checkpoint is not a CSE model");
    if (j.at("format_version").get<int>() != nn::kCheckpointFormatVersion)
      throw DataError(DataErrorKind::Schema, "unsupported checkpoint format version");
    const auto& h = j.at("hyperparameters");
    CseConfig c;
    c.embed_dim = h.at("embed_dim").get<std::size_t>();
    c.branch_hidden = h.at("branch_hidden").get<std::size_t>();
    c.combiner_hidden = h.at("combiner_hidden").get<std::size_t>();
    c.lr = h.at("lr").get<double>();
    c.epochs = h.at("epochs").get<int>();
    c.batch_size = h.at("batch_size").get<int>();
    c.val_fraction = h.at("val_fraction").get<double>();
    c.clip_norm = h.at("clip_norm").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    SiameseModel m(j.at("vocabulary").get<std::vector<std::string>>(), c);
    const auto params = m.parameters();
    nn::parameters_from_json(j.at("parameters"), params);
    return m;
  } catch (const json::exception& e) {
    throw DataError(DataErrorKind::Schema, std::string("bad CSE checkpoint: ") + e.what());
  }
}

void SiameseModel::save(const std::filesystem::path& path) const {
  nn::write_json_file(path, to_json());
}

SiameseModel SiameseModel::load(const std::filesystem::path& path) {
  return from_json(nn::read_json_file(path));
}

double cse_score(const SiameseModel& model, const std::string& v1, const std::string& v2) {
  return model.score(v1, v2);
}

std::size_t discretize(double score, std::size_t n_bins) {
  if (n_bins < 2) throw std::domain_error("discretize: need at least 2 bins");
  if (!(score >= 0.0 && score <= 1.0))
    throw std::domain_error("discretize: score outside [0,1]");
  const auto bin = static_cast<std::size_t>(std::floor(score * static_cast<double>(n_bins)));
  return std::min(bin, n_bins - 1);
}

std::vector<CseExample> cse_examples(const TemProbTable& table) {
  std::vector<CseExample> out;
  for (const auto& [v1, v2] : table.pairs()) {
    const auto c = table.counts(v1, v2);
    const auto total = c[index_of(Label::Before)] + c[index_of(Label::After)];
    if (total == 0) continue;
    out.push_back({v1, v2, *target_before_prob(table, v1, v2), static_cast<double>(total)});
  }
  if (out.empty())
    throw DataError(DataErrorKind::Precondition,
                    "TemProb table has no pair with BEFORE/AFTER mass to train on");
  return out;
}

double cse_loss(SiameseModel& model, const std::vector<CseExample>& examples, bool with_grad) {
  double total_w = 0.0;
  for (const auto& e : examples) total_w += e.weight;
  if (total_w <= 0.0) return 0.0;
  double loss = 0.0;
  for (const auto& e : examples) {
    nn::Tape tape;
    const nn::Var l = nn::sigmoid_bce(tape, model.logit(tape, e.v1, e.v2), e.target);
    loss += e.weight * tape.value(l)[0];
    if (with_grad) tape.backward(l, e.weight / total_w);
  }
  return loss / total_w;
}

CseTrainResult train_cse(const TemProbTable& table, const CseConfig& config) {
  if (config.batch_size < 1) throw ConfigError("cse batch_size must be >= 1");
  if (config.epochs < 0) throw ConfigError("cse epochs must be >= 0");
  auto examples = cse_examples(table);

  CseTrainResult result;
  result.model = SiameseModel(table.vocabulary(), config);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  rng.shuffle(examples);
  const auto n_val = static_cast<std::size_t>(
      std::llround(config.val_fraction * static_cast<double>(examples.size())));
  result.val_examples.assign(examples.begin(), examples.begin() + static_cast<std::ptrdiff_t>(n_val));
  result.train_examples.assign(examples.begin() + static_cast<std::ptrdiff_t>(n_val), examples.end());
  if (result.train_examples.empty()) result.train_examples = result.val_examples;

  SiameseModel model = result.model;
  const auto params = model.parameters();
  nn::Adam adam;
  double best = std::numeric_limits<double>::infinity();
  auto order = result.train_examples;
  const auto& selection = result.val_examples.empty() ? result.train_examples : result.val_examples;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0, epoch_w = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::vector<CseExample> chunk(
          order.begin() + static_cast<std::ptrdiff_t>(start),
          order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + batch)));
      nn::zero_grad(params);
      double w = 0.0;
      for (const auto& e : chunk) w += e.weight;
      epoch_loss += w * cse_loss(model, chunk, true);
      epoch_w += w;
      nn::clip_grad_norm(params, config.clip_norm);
      adam.step(params, config.lr);
    }
    CseEpoch rec{epoch, epoch_w > 0 ? epoch_loss / epoch_w : 0.0, cse_loss(model, selection, false)};
    result.history.push_back(rec);
    if (rec.val_loss < best) {
      best = rec.val_loss;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  for (auto* p : result.model.parameters()) p->grad.fill(0.0);
  return result;
}

}  // namespace temprel
