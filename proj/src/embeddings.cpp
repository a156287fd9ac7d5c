#include "temprel/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "temprel/error.hpp"

namespace temprel {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::vector<double> hash_embed(std::string_view token, std::size_t dim, std::uint64_t seed) {
  std::uint64_t state = fnv1a(token);
  std::uint64_t mix = seed;
  state ^= splitmix64(mix);
  std::vector<double> v(dim);
  for (auto& x : v) x = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53 - 0.5;
  return v;
}

StaticTable::StaticTable(std::size_t dim, std::uint64_t hash_seed)
    : dim_(dim), hash_seed_(hash_seed) {}

bool StaticTable::insert(std::string token, std::vector<float> vector) {
  if (vector.size() != dim_)
    throw DataError(DataErrorKind::DimensionMismatch, "vector for '" + token + "' has length " +
                                                          std::to_string(vector.size()));
  return entries_.emplace(std::move(token), std::move(vector)).second;
}

std::vector<double> StaticTable::lookup(const std::string& token) const {
  auto it = entries_.find(token);
  if (it == entries_.end()) return hash_embed(token, dim_, hash_seed_);
  return {it->second.begin(), it->second.end()};
}

void ContextualStore::insert(Key key, std::vector<std::vector<float>> vectors) {
  for (const auto& v : vectors) {
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_ || dim_ == 0)
      throw DataError(DataErrorKind::DimensionMismatch,
                      "inconsistent contextual dimension for (" + key.first + ", " +
                          std::to_string(key.second) + "): " + std::to_string(v.size()) +
                          " vs " + std::to_string(dim_));
  }
  const std::string name = key.first;
  const std::size_t sent = key.second;
  if (!sentences_.emplace(std::move(key), std::move(vectors)).second)
    throw DataError(DataErrorKind::DuplicateEntry,
                    "duplicate contextual key (" + name + ", " + std::to_string(sent) + ")");
}

const std::vector<std::vector<float>>* ContextualStore::find(const Key& key) const {
  auto it = sentences_.find(key);
  return it == sentences_.end() ? nullptr : &it->second;
}

StaticTable read_static(std::istream& in, std::uint64_t hash_seed) {
  std::string text;
  if (!std::getline(in, text))
    throw DataError(DataErrorKind::HeaderMismatch, "missing \"N d\" header", 1);
  const auto header = split_ws(text);
  std::size_t n = 0, dim = 0;
  if (header.size() != 2 || !parse_number(header[0], n) || !parse_number(header[1], dim) ||
      dim == 0)
    throw DataError(DataErrorKind::HeaderMismatch, "malformed header '" + text + "'", 1);

  StaticTable table(dim, hash_seed);
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    const auto fields = split_ws(text);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1)
      throw DataError(DataErrorKind::DimensionMismatch,
                      "expected " + std::to_string(dim) + " values, found " +
                          std::to_string(fields.size() - 1),
                      line);
    std::vector<float> vec(dim);
    for (std::size_t i = 0; i < dim; ++i)
      if (!parse_number(fields[i + 1], vec[i]))
        throw DataError(DataErrorKind::Parse,
                        "bad number '" + std::string(fields[i + 1]) + "'", line);
    if (!table.insert(std::string(fields[0]), std::move(vec)))
      throw DataError(DataErrorKind::DuplicateEntry,
                      "duplicate token '" + std::string(fields[0]) + "'", line);
  }
  if (table.size() != n)
    throw DataError(DataErrorKind::HeaderMismatch, "header declares " + std::to_string(n) +
                                                       " entries, file has " +
                                                       std::to_string(table.size()));
  return table;
}

StaticTable load_static(const std::filesystem::path& path, std::uint64_t hash_seed) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorKind::Io, "cannot open embeddings '" + path.string() + "'");
  return read_static(in, hash_seed);
}

ContextualStore read_contextual(std::istream& in) {
  ContextualStore store;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(text);
      auto doc = obj.at("doc").get<std::string>();
      auto sent = obj.at("sent").get<std::size_t>();
      auto vectors = obj.at("vectors").get<std::vector<std::vector<float>>>();
      store.insert({std::move(doc), sent}, std::move(vectors));
    } catch (const DataError& e) {
      throw DataError(e.kind(), e.what(), line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(DataErrorKind::Parse, e.what(), line);
    }
  }
  return store;
}

ContextualStore load_contextual(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataErrorKind::Io, "cannot open contextual store '" + path.string() + "'");
  return read_contextual(in);
}

std::size_t EmbeddingProvider::dim() const {
  return std::visit([](const auto& b) -> std::size_t {
    if constexpr (std::is_same_v<std::decay_t<decltype(b)>, HashFallback>)
      return b.dim;
    else
      return b.dim();
  }, backend_);
}

std::string_view EmbeddingProvider::kind() const {
  switch (backend_.index()) {
    case 0: return "static";
    case 1: return "contextual";
    default: return "hash";
  }
}

nn::Tensor embed_sequence(const EmbeddingProvider& provider, const Document& doc,
                          SentenceRange range) {
  if (range.first > range.last || range.last >= doc.sentences.size())
    throw DataError(DataErrorKind::TokenOutOfRange,
                    "sentence range outside document '" + doc.id + "'");
  std::size_t T = 0;
  for (std::size_t s = range.first; s <= range.last; ++s) T += doc.sentences[s].size();
  const std::size_t dim = provider.dim();
  nn::Tensor out({T, dim});
  std::size_t row = 0;
  for (std::size_t s = range.first; s <= range.last; ++s) {
    const auto& tokens = doc.sentences[s];
    if (const auto* store = std::get_if<ContextualStore>(&provider.backend())) {
      const auto* vecs = store->find({doc.id, s});
      if (!vecs)
        throw DataError(DataErrorKind::MissingContext,
                        "no contextual vectors for (" + doc.id + ", " + std::to_string(s) + ")");
      if (vecs->size() != tokens.size())
        throw DataError(DataErrorKind::DimensionMismatch,
                        "contextual vectors for (" + doc.id + ", " + std::to_string(s) +
                            ") cover " + std::to_string(vecs->size()) + " of " +
                            std::to_string(tokens.size()) + " tokens");
      for (const auto& v : *vecs) {
        std::copy(v.begin(), v.end(), out.row(row).begin());
        ++row;
      }
      continue;
    }
    for (const auto& tok : tokens) {
      const auto v = std::holds_alternative<StaticTable>(provider.backend())
                         ? std::get<StaticTable>(provider.backend()).lookup(tok)
                         : hash_embed(tok, dim, std::get<HashFallback>(provider.backend()).seed);
      std::copy(v.begin(), v.end(), out.row(row).begin());
      ++row;
    }
  }
  return out;
}

}  // namespace temprel
