#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace cyclebench::analysis {

struct SelectAll {
  friend bool operator==(SelectAll const&, SelectAll const&) = default;
};
struct SelectInterval {
  std::int64_t start = 1;
  std::int64_t step = 1;
  friend bool operator==(SelectInterval const&, SelectInterval const&) = default;
};
struct SelectExplicit {
  std::vector<std::int64_t> cycles;
  friend bool operator==(SelectExplicit const&, SelectExplicit const&) = default;
};
struct SelectRange {
  std::int64_t lo = 1;
  std::int64_t hi = 1;
  friend bool operator==(SelectRange const&, SelectRange const&) = default;
};

using CycleSelector = std::variant<SelectAll, SelectInterval, SelectExplicit, SelectRange>;

// Throws InvalidSelector for step < 1, start < 1 or lo > hi.
void ValidateSelector(CycleSelector const& sel);

// Sorted, deduplicated indices in [1, available]. Throws EmptySelection.
std::vector<std::int64_t> ResolveCycles(CycleSelector const& sel, std::int64_t available);

// {"mode": "all"|"interval"|"explicit"|"range", ...}
nlohmann::json SelectorToJson(CycleSelector const& sel);
CycleSelector SelectorFromJson(nlohmann::json const& j);

// Command-line form: "all", "every:START:STEP", "A-B", or "1,5,9".
CycleSelector ParseSelector(std::string_view text);
std::string SelectorToString(CycleSelector const& sel);

}  // namespace cyclebench::analysis
