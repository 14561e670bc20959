#include "cyclebench/analysis/selector.hpp"

#include <algorithm>

#include "cyclebench/core/error.hpp"
#include "cyclebench/core/text.hpp"

namespace cyclebench::analysis {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::int64_t RequireInt(std::string_view s, std::string_view what) {
  auto v = text::ParseInt(text::Trim(s));
  if (!v) {
    throw Error(ErrorCode::kInvalidSelector,
                "bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return *v;
}

}  // namespace

void ValidateSelector(CycleSelector const& sel) {
  std::visit(Overloaded{
                 [](SelectAll const&) {},
                 [](SelectInterval const& s) {
                   if (s.start < 1) throw Error(ErrorCode::kInvalidSelector, "interval start < 1");
                   if (s.step < 1) throw Error(ErrorCode::kInvalidSelector, "interval step < 1");
                 },
                 [](SelectExplicit const& s) {
                   if (s.cycles.empty()) {
                     throw Error(ErrorCode::kInvalidSelector, "explicit list is empty");
                   }
                 },
                 [](SelectRange const& s) {
                   if (s.lo > s.hi) {
                     throw Error(ErrorCode::kInvalidSelector,
                                 "range " + std::to_string(s.lo) + ".." + std::to_string(s.hi) +
                                     " has lo > hi");
                   }
                 },
             },
             sel);
}

std::vector<std::int64_t> ResolveCycles(CycleSelector const& sel, std::int64_t available) {
  ValidateSelector(sel);
  std::vector<std::int64_t> out;
  std::visit(Overloaded{
                 [&](SelectAll const&) {
                   for (std::int64_t k = 1; k <= available; ++k) out.push_back(k);
                 },
                 [&](SelectInterval const& s) {
                   for (std::int64_t k = s.start; k <= available; k += s.step) out.push_back(k);
                 },
                 [&](SelectExplicit const& s) {
                   for (auto k : s.cycles) {
                     if (k >= 1 && k <= available) out.push_back(k);
                   }
                   std::sort(out.begin(), out.end());
                   out.erase(std::unique(out.begin(), out.end()), out.end());
                 },
                 [&](SelectRange const& s) {
                   for (std::int64_t k = std::max<std::int64_t>(s.lo, 1);
                        k <= std::min(s.hi, available); ++k) {
                     out.push_back(k);
                   }
                 },
             },
             sel);
  if (out.empty()) {
    throw Error(ErrorCode::kEmptySelection,
                "selector " + SelectorToString(sel) + " matches none of " +
                    std::to_string(available) + " cycles");
  }
  return out;
}

nlohmann::json SelectorToJson(CycleSelector const& sel) {
  return std::visit(Overloaded{
                        [](SelectAll const&) { return nlohmann::json{{"mode", "all"}}; },
                        [](SelectInterval const& s) {
                          return nlohmann::json{{"mode", "interval"}, {"start", s.start},
                                                {"step", s.step}};
                        },
                        [](SelectExplicit const& s) {
                          return nlohmann::json{{"mode", "explicit"}, {"cycles", s.cycles}};
                        },
                        [](SelectRange const& s) {
                          return nlohmann::json{{"mode", "range"}, {"lo", s.lo}, {"hi", s.hi}};
                        },
                    },
                    sel);
}

CycleSelector SelectorFromJson(nlohmann::json const& j) {
  if (!j.is_object() || !j.contains("mode") || !j["mode"].is_string()) {
    throw Error(ErrorCode::kInvalidSelector, "selector needs a string 'mode'");
  }
  auto int_field = [&](char const* key) -> std::int64_t {
    if (!j.contains(key) || !j[key].is_number_integer()) {
      throw Error(ErrorCode::kInvalidSelector, std::string("selector needs integer '") + key + "'");
    }
    return j[key].get<std::int64_t>();
  };
  auto mode = j["mode"].get<std::string>();
  CycleSelector sel;
  if (mode == "all") {
    sel = SelectAll{};
  } else if (mode == "interval") {
    sel = SelectInterval{int_field("start"), int_field("step")};
  } else if (mode == "range") {
    sel = SelectRange{int_field("lo"), int_field("hi")};
  } else if (mode == "explicit") {
    if (!j.contains("cycles") || !j["cycles"].is_array()) {
      throw Error(ErrorCode::kInvalidSelector, "explicit selector needs 'cycles'");
    }
    SelectExplicit e;
    for (auto const& v : j["cycles"]) {
      if (!v.is_number_integer()) throw Error(ErrorCode::kInvalidSelector, "non-integer cycle");
      e.cycles.push_back(v.get<std::int64_t>());
    }
    sel = std::move(e);
  } else {
    throw Error(ErrorCode::kInvalidSelector, "unknown selector mode '" + mode + "'");
  }
  ValidateSelector(sel);
  return sel;
}

CycleSelector ParseSelector(std::string_view raw) {
  auto s = text::Trim(raw);
  CycleSelector sel;
  if (s == "all") {
    sel = SelectAll{};
  } else if (s.starts_with("every:")) {
    auto parts = text::Split(s.substr(6), ':');
    if (parts.size() != 2) throw Error(ErrorCode::kInvalidSelector, "expected every:START:STEP");
    sel = SelectInterval{RequireInt(parts[0], "start"), RequireInt(parts[1], "step")};
  } else if (s.find('-') != std::string_view::npos && s.find(',') == std::string_view::npos) {
    auto dash = s.find('-');
    sel = SelectRange{RequireInt(s.substr(0, dash), "range start"),
                      RequireInt(s.substr(dash + 1), "range end")};
  } else {
    SelectExplicit e;
    for (auto const& part : text::Split(s, ',')) e.cycles.push_back(RequireInt(part, "cycle"));
    sel = std::move(e);
  }
  ValidateSelector(sel);
  return sel;
}

std::string SelectorToString(CycleSelector const& sel) {
  return std::visit(Overloaded{
                        [](SelectAll const&) { return std::string("all"); },
                        [](SelectInterval const& s) {
                          return "every:" + std::to_string(s.start) + ":" + std::to_string(s.step);
                        },
                        [](SelectExplicit const& s) {
                          std::string out;
                          for (auto k : s.cycles) {
                            if (!out.empty()) out += ',';
                            out += std::to_string(k);
                          }
                          return out;
                        },
                        [](SelectRange const& s) {
                          return std::to_string(s.lo) + "-" + std::to_string(s.hi);
                        },
                    },
                    sel);
}

}  // namespace cyclebench::analysis
