#include "temprel/label.hpp"

namespace temprel {

std::string_view to_string(Label l) {
  switch (l) {
    case Label::Before: return "BEFORE";
    case Label::After: return "AFTER";
    case Label::Equal: return "EQUAL";
    case Label::Vague: return "VAGUE";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view s) {
  for (Label l : kAllLabels)
    if (to_string(l) == s) return l;
  return std::nullopt;
}

}  // namespace temprel
