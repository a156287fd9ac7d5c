#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "temprel/corpus.hpp"
#include "temprel/tensor.hpp"

namespace temprel {

inline constexpr std::uint64_t kDefaultHashSeed = 0x5eed;

/// Deterministic pseudo-random vector for `token`, components in [-0.5, 0.5].
std::vector<double> hash_embed(std::string_view token, std::size_t dim, std::uint64_t seed);

struct HashFallback {
  std::size_t dim = 32;
  std::uint64_t seed = kDefaultHashSeed;
};

/// Word -> vector table; out-of-vocabulary tokens fall back to hash_embed.
class StaticTable {
 public:
  StaticTable(std::size_t dim, std::uint64_t hash_seed = kDefaultHashSeed);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  std::uint64_t hash_seed() const { return hash_seed_; }
  bool contains(const std::string& token) const { return entries_.count(token) > 0; }

  /// Returns false if the token is already present.
  bool insert(std::string token, std::vector<float> vector);
  std::vector<double> lookup(const std::string& token) const;

 private:
  std::size_t dim_;
  std::uint64_t hash_seed_;
  std::unordered_map<std::string, std::vector<float>> entries_;
};

/// Precomputed per-token vectors keyed by (document id, sentence index).
class ContextualStore {
 public:
  using Key = std::pair<std::string, std::size_t>;

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return sentences_.size(); }
  void insert(Key key, std::vector<std::vector<float>> vectors);
  const std::vector<std::vector<float>>* find(const Key& key) const;

 private:
  std::size_t dim_ = 0;
  std::map<Key, std::vector<std::vector<float>>> sentences_;
};

/// First line "N d", then N lines "token f1 ... fd".
StaticTable read_static(std::istream& in, std::uint64_t hash_seed = kDefaultHashSeed);
StaticTable load_static(const std::filesystem::path& path,
                        std::uint64_t hash_seed = kDefaultHashSeed);

/// JSON-lines {"doc": str, "sent": int, "vectors": [[...], ...]}.
ContextualStore read_contextual(std::istream& in);
ContextualStore load_contextual(const std::filesystem::path& path);

class EmbeddingProvider {
 public:
  using Backend = std::variant<StaticTable, ContextualStore, HashFallback>;

  explicit EmbeddingProvider(Backend backend) : backend_(std::move(backend)) {}

  std::size_t dim() const;
  std::string_view kind() const;
  const Backend& backend() const { return backend_; }

 private:
  Backend backend_;
};

struct SentenceRange {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
};

/// One row per token of the concatenated sentences, upcast to 64-bit.
/// Throws DataError(MissingContext) when a contextual store lacks a sentence.
nn::Tensor embed_sequence(const EmbeddingProvider& provider, const Document& doc,
                          SentenceRange range);

}  // namespace temprel
