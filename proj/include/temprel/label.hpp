#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace temprel {

/// Temporal relation between the start points of two events.
/// The enumerator order is the tie-break order used throughout.
enum class Label : std::uint8_t { Before = 0, After = 1, Equal = 2, Vague = 3 };

inline constexpr std::size_t kNumLabels = 4;
inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::Before, Label::After, Label::Equal, Label::Vague};

constexpr std::size_t index_of(Label l) { return static_cast<std::size_t>(l); }
constexpr Label label_at(std::size_t i) { return kAllLabels.at(i); }

constexpr Label reverse(Label l) {
  switch (l) {
    case Label::Before: return Label::After;
    case Label::After: return Label::Before;
    default: return l;
  }
}

std::string_view to_string(Label l);
std::optional<Label> parse_label(std::string_view s);

}  // namespace temprel
