#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "temprel/label.hpp"

namespace temprel {

/// Bitset over labels, bit i = label_at(i).
class LabelSet {
 public:
  constexpr LabelSet() = default;
  constexpr explicit LabelSet(std::uint8_t bits) : bits_(bits) {}
  static constexpr LabelSet all() { return LabelSet(0b1111); }
  static constexpr LabelSet of(Label l) { return LabelSet(static_cast<std::uint8_t>(1u << index_of(l))); }

  constexpr bool contains(Label l) const { return bits_ & (1u << index_of(l)); }
  constexpr void insert(Label l) { bits_ |= static_cast<std::uint8_t>(1u << index_of(l)); }
  constexpr std::size_t size() const { return static_cast<std::size_t>(__builtin_popcount(bits_)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  /// The only member of a singleton set.
  std::optional<Label> single() const;
  std::vector<Label> labels() const;

  constexpr bool operator==(const LabelSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

/// Point-order composition over event start points: the labels allowed on
/// (a, c) given r1 on (a, b) and r2 on (b, c).
LabelSet compose(Label r1, Label r2);

struct Edge {
  std::string src;
  std::string dst;
  Label label;

  bool operator==(const Edge&) const = default;
};

/// Event graph with one label per unordered pair, stored as (min, max) by id.
class TemporalGraph {
 public:
  void add_node(const std::string& id) { nodes_.insert(id); }
  /// Sets the relation of (src, dst), replacing any previous one. Throws
  /// std::invalid_argument on self-loops.
  void set(const std::string& src, const std::string& dst, Label label);
  void erase(const std::string& src, const std::string& dst);
  /// Label of (src, dst), reversed when stored the other way round.
  std::optional<Label> get(const std::string& src, const std::string& dst) const;

  const std::set<std::string>& nodes() const { return nodes_; }
  /// Edges in canonical (src, dst) order with src < dst.
  std::vector<Edge> edges() const;
  std::size_t edge_count() const { return edges_.size(); }
  /// Copy keeping only non-VAGUE edges (nodes kept).
  TemporalGraph without_vague() const;

  nlohmann::json to_json() const;
  static TemporalGraph from_json(const nlohmann::json& j);

  bool operator==(const TemporalGraph&) const = default;

 private:
  std::set<std::string> nodes_;
  std::map<std::pair<std::string, std::string>, Label> edges_;
};

/// Triple (a, b, c) whose derived (a, c) label clashes with the stored one.
struct Inconsistency {
  std::string a, b, c;
  Label ab, bc;
  Label derived;
  Label existing;
};

/// Fixpoint of adding every uniquely implied non-VAGUE relation. An implied
/// label overrides VAGUE; a clash with a different non-VAGUE label yields the
/// first Inconsistency in canonical triple order.
std::variant<TemporalGraph, Inconsistency> closure(const TemporalGraph& g);

bool is_consistent(const TemporalGraph& g);

namespace detail {
/// In-place closure over a dense n*n label matrix (label index, or -1 for no
/// edge; both directions filled). Returns the clashing (a, b, c) node indices.
std::optional<std::array<std::size_t, 3>> dense_closure(std::size_t n,
                                                        std::vector<std::int8_t>& cells);
}  // namespace detail

/// Greedy transitive reduction of the non-VAGUE edges in canonical order.
/// Throws DataError(Inconsistent) for graphs whose closure fails.
TemporalGraph reduce(const TemporalGraph& g);

}  // namespace temprel
