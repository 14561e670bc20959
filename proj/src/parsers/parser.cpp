#include "cyclebench/parsers/parser.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>

#include "cyclebench/core/csv.hpp"
#include "cyclebench/core/error.hpp"
#include "cyclebench/core/text.hpp"
#include "cyclebench/parsers/units.hpp"

namespace cyclebench::parsers {

namespace {

struct LabelRow {
  std::size_t offset = 0;  // byte offset of the label row
  std::size_t line = 1;    // 1-based line number of the label row
};

LabelRow LocateLabelRow(std::string_view bytes, VendorProfile const& profile) {
  std::optional<std::regex> locator;
  if (!profile.header_locator.empty()) locator.emplace(profile.header_locator);
  std::size_t pos = 0;
  std::size_t line = 1;
  while (pos < bytes.size()) {
    auto nl = bytes.find('\n', pos);
    auto end = nl == std::string_view::npos ? bytes.size() : nl;
    std::string_view content = bytes.substr(pos, end - pos);
    if (!content.empty() && content.back() == '\r') content.remove_suffix(1);
    if (line > static_cast<std::size_t>(profile.header_row_count)) {
      if (!locator ||
          std::regex_search(content.begin(), content.end(), *locator)) {
        return {pos, line};
      }
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
    ++line;
  }
  throw ParseError(line, "column header row not found");
}

bool IsBlank(csv::Record const& rec) {
  return std::all_of(rec.fields.begin(), rec.fields.end(),
                     [](std::string const& f) { return text::Trim(f).empty(); });
}

std::optional<std::int64_t> ParseIntegral(std::string_view s, char decimal) {
  auto v = text::ParseDouble(s, decimal);
  if (!v || std::floor(*v) != *v || std::abs(*v) > 9.0e15) return std::nullopt;
  return static_cast<std::int64_t>(*v);
}

// Parsed numeric value of a mapped cell, before unit conversion.
struct CellValue {
  bool ok = true;
  bool empty = false;
  double number = 0.0;
  std::optional<Timestamp> stamp;
};

CellValue ReadCell(std::string_view raw, ColumnMapping const& m, char decimal) {
  CellValue out;
  auto s = text::Trim(raw);
  if (s.empty()) {
    out.empty = true;
    return out;
  }
  if (m.field == PointField::kWallTime) {
    out.stamp = text::ParseTimestamp(s, m.unit);
    out.ok = out.stamp.has_value();
    return out;
  }
  if (m.field == PointField::kTime && m.unit == "hms") {
    auto v = ParseDuration(s, decimal);
    out.ok = v.has_value();
    if (v) out.number = *v;
    return out;
  }
  if (IsOrdinal(m.field)) {
    auto v = ParseIntegral(s, decimal);
    out.ok = v.has_value();
    if (v) out.number = static_cast<double>(*v);
    return out;
  }
  auto v = text::ParseDouble(s, decimal);
  out.ok = v.has_value();
  if (v) out.number = *v;
  return out;
}

int FindColumn(std::vector<std::string> const& cols, std::string_view label) {
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == label) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

std::optional<std::int64_t> ChannelFromExtension(std::string_view file_name) {
  auto dot = file_name.rfind('.');
  if (dot == std::string_view::npos || dot + 1 >= file_name.size()) {
    return std::nullopt;
  }
  auto ext = file_name.substr(dot + 1);
  if (!std::all_of(ext.begin(), ext.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return text::ParseInt(ext);
}

ParseResult Parse(std::string_view bytes, VendorProfile const& profile,
                  ParseOptions const& opts) {
  if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") {
    bytes.remove_prefix(3);
  }
  if (text::Trim(bytes).empty()) {
    throw Error(ErrorCode::kEmptyFile, "'" + opts.file_name + "' is empty");
  }
  auto label = LocateLabelRow(bytes, profile);
  csv::Reader reader(bytes.substr(label.offset), profile.delimiter);
  auto to_file_line = [&](std::size_t l) { return l + label.line - 1; };

  csv::Record rec;
  reader.Next(rec);
  std::vector<std::string> columns;
  for (auto const& f : rec.fields) columns.emplace_back(text::Trim(f));
  while (!columns.empty() && columns.back().empty()) columns.pop_back();
  if (columns.empty()) throw ParseError(label.line, "empty column header row");

  int channel_col = -1;
  std::int64_t fixed_channel = profile.fixed_channel;
  if (profile.channel_source == ChannelSource::kColumn) {
    channel_col = FindColumn(columns, profile.channel_column);
    if (channel_col < 0) {
      throw Error(ErrorCode::kMissingRequiredColumn,
                  "channel column '" + profile.channel_column + "' not present");
    }
  } else if (profile.channel_source == ChannelSource::kFileExtension) {
    fixed_channel = ChannelFromExtension(opts.file_name).value_or(profile.fixed_channel);
  }

  std::vector<std::pair<int, ColumnMapping const*>> checks;
  for (auto const& m : profile.columns) {
    int idx = FindColumn(columns, m.source);
    if (idx >= 0) checks.emplace_back(idx, &m);
  }

  ParseResult result;
  std::map<std::int64_t, RawChannelSeries> by_channel;
  auto series_for = [&](std::int64_t ch) -> RawChannelSeries& {
    auto& s = by_channel[ch];
    if (s.columns.empty()) {
      s.channel = ch;
      s.source_name = opts.file_name;
      s.columns = columns;
    }
    return s;
  };

  while (reader.Next(rec)) {
    if (IsBlank(rec)) continue;
    ++result.data_rows;
    std::size_t line = to_file_line(rec.line);
    auto& f = rec.fields;
    while (f.size() > columns.size() && text::Trim(f.back()).empty()) f.pop_back();

    std::optional<std::int64_t> channel;
    if (channel_col < 0) {
      channel = fixed_channel;
    } else if (static_cast<std::size_t>(channel_col) < f.size()) {
      channel = ParseIntegral(f[channel_col], profile.decimal_separator);
    }

    std::string reason;
    if (rec.unterminated_quote) {
      reason = "unterminated quoted field";
    } else if (f.size() != columns.size()) {
      reason = "expected " + std::to_string(columns.size()) + " fields, got " +
               std::to_string(f.size());
    } else if (!channel) {
      reason = "unreadable channel '" + f[channel_col] + "'";
    } else {
      for (auto const& [idx, m] : checks) {
        auto cell = ReadCell(f[idx], *m, profile.decimal_separator);
        if (cell.empty && IsRequired(m->field)) {
          reason = "missing " + std::string(PointFieldName(m->field));
          break;
        }
        if (!cell.ok) {
          reason = "bad " + std::string(PointFieldName(m->field)) + " value '" +
                   f[idx] + "'";
          break;
        }
      }
    }

    if (!reason.empty()) {
      if (channel) {
        series_for(*channel).malformed.push_back({line, reason});
      } else {
        result.unattributed.push_back({line, reason});
      }
      continue;
    }
    auto& s = series_for(*channel);
    s.rows.push_back(std::move(f));
    s.source_lines.push_back(line);
  }

  if (result.data_rows == 0) {
    throw Error(ErrorCode::kEmptyFile, "'" + opts.file_name + "' has no data rows");
  }

  std::vector<MalformedLine> all_bad = result.unattributed;
  for (auto& [ch, s] : by_channel) {
    all_bad.insert(all_bad.end(), s.malformed.begin(), s.malformed.end());
  }
  if (!all_bad.empty()) {
    double allowed = opts.malformed_tolerance * static_cast<double>(result.data_rows);
    if (static_cast<double>(all_bad.size()) > allowed) {
      auto first = std::min_element(
          all_bad.begin(), all_bad.end(),
          [](auto const& a, auto const& b) { return a.line < b.line; });
      throw ParseError(first->line, first->reason);
    }
  }
  for (auto& [ch, s] : by_channel) result.series.push_back(std::move(s));
  return result;
}

CanonicalDataset Normalize(RawChannelSeries const& raw, VendorProfile const& profile) {
  for (auto f : {PointField::kTime, PointField::kVoltage, PointField::kCurrent}) {
    if (profile.FindMapping(f) == nullptr) {
      throw Error(ErrorCode::kMissingRequiredColumn,
                  profile.format_id + " has no mapping for " +
                      std::string(PointFieldName(f)));
    }
  }

  struct Bound {
    ColumnMapping const* mapping;
    int column;
    UnitConversion unit;
  };
  std::vector<Bound> bound;
  std::set<int> consumed;
  for (auto const& m : profile.columns) {
    int idx = FindColumn(raw.columns, m.source);
    if (idx < 0) {
      if (IsRequired(m.field)) {
        throw Error(ErrorCode::kMissingRequiredColumn,
                    "column '" + m.source + "' (" +
                        std::string(PointFieldName(m.field)) + ") not present");
      }
      continue;
    }
    UnitConversion conv;
    if (m.field == PointField::kWallTime) {
      if (m.unit.empty()) {
        throw Error(ErrorCode::kUnitError, "wall_time column '" + m.source +
                                               "' has no timestamp format");
      }
    } else {
      auto u = LookupUnit(m.field, m.unit);
      if (!u) {
        throw Error(ErrorCode::kUnitError,
                    "unit '" + m.unit + "' of column '" + m.source +
                        "' cannot be converted to " +
                        std::string(CanonicalUnit(m.field)));
      }
      conv = *u;
    }
    bound.push_back({&m, idx, conv});
    consumed.insert(idx);
  }
  for (auto const& ig : profile.ignore_columns) {
    int idx = FindColumn(raw.columns, ig);
    if (idx >= 0) consumed.insert(idx);
  }
  if (profile.channel_source == ChannelSource::kColumn) {
    int idx = FindColumn(raw.columns, profile.channel_column);
    if (idx >= 0) consumed.insert(idx);
  }
  int sign_col = -1;
  if (profile.current_sign) {
    sign_col = FindColumn(raw.columns, profile.current_sign->column);
    if (sign_col < 0) {
      throw Error(ErrorCode::kMissingRequiredColumn,
                  "current sign column '" + profile.current_sign->column +
                      "' not present");
    }
    consumed.insert(sign_col);
  }
  std::vector<int> extra_cols;
  for (int i = 0; i < static_cast<int>(raw.columns.size()); ++i) {
    if (!consumed.count(i)) extra_cols.push_back(i);
  }

  CanonicalDataset d;
  d.channel = raw.channel;
  d.source_format = profile.format_id;
  if (!raw.source_name.empty()) d.source_names.push_back(raw.source_name);
  for (auto const& b : bound) {
    d.unit_provenance[std::string(PointFieldName(b.mapping->field))] = b.mapping->unit;
  }
  d.points.reserve(raw.rows.size());

  std::vector<std::optional<std::string>> last_extra(extra_cols.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    auto const& row = raw.rows[r];
    std::size_t line = r < raw.source_lines.size() ? raw.source_lines[r] : r + 1;
    if (row.size() != raw.columns.size()) throw ParseError(line, "ragged row");
    DataPoint p;
    p.index = static_cast<std::int64_t>(r);
    for (auto const& b : bound) {
      auto cell = ReadCell(row[b.column], *b.mapping, profile.decimal_separator);
      if (!cell.ok || (cell.empty && IsRequired(b.mapping->field))) {
        throw ParseError(line, "bad " + std::string(PointFieldName(b.mapping->field)) +
                                   " value '" + row[b.column] + "'");
      }
      if (cell.empty) continue;
      double v = cell.number * b.unit.scale + b.unit.offset;
      switch (b.mapping->field) {
        case PointField::kTime: p.time = v; break;
        case PointField::kWallTime: p.wall_time = cell.stamp; break;
        case PointField::kVoltage: p.voltage = v; break;
        case PointField::kCurrent: p.current = v; break;
        case PointField::kCapacity: p.capacity = v; break;
        case PointField::kEnergy: p.energy = v; break;
        case PointField::kPower: p.power = v; break;
        case PointField::kTemperature: p.temperature = v; break;
        case PointField::kResistance: p.resistance = v; break;
        case PointField::kCycleIndex: p.cycle_index = std::llround(v); break;
        case PointField::kStepIndex: p.step_index = std::llround(v); break;
        case PointField::kCycleStep: p.cycle_step = std::llround(v); break;
      }
    }
    if (sign_col >= 0) {
      std::string state(text::Trim(row[sign_col]));
      auto const& rule = *profile.current_sign;
      if (std::find(rule.charge.begin(), rule.charge.end(), state) != rule.charge.end()) {
        p.current = std::abs(p.current);
      } else if (std::find(rule.discharge.begin(), rule.discharge.end(), state) !=
                 rule.discharge.end()) {
        p.current = -std::abs(p.current);
      }
    }
    for (std::size_t e = 0; e < extra_cols.size(); ++e) {
      auto const& value = row[extra_cols[e]];
      if (!last_extra[e] || *last_extra[e] != value) {
        d.extra.push_back({p.index, raw.columns[extra_cols[e]], value});
        last_extra[e] = value;
      }
    }
    d.points.push_back(p);
  }
  return d;
}

CanonicalDataset Stitch(std::vector<CanonicalDataset> const& parts) {
  if (parts.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to stitch");
  if (parts.size() == 1) return parts.front();
  for (auto const& p : parts) {
    if (p.channel != parts.front().channel) {
      throw Error(ErrorCode::kChannelMismatch,
                  "cannot stitch channel " + std::to_string(p.channel) +
                      " onto channel " + std::to_string(parts.front().channel));
    }
  }

  CanonicalDataset out;
  out.channel = parts.front().channel;
  out.source_format = parts.front().source_format;
  for (auto const& p : parts) {
    if (p.source_format != out.source_format) out.source_format = "stitched";
    out.source_names.insert(out.source_names.end(), p.source_names.begin(),
                            p.source_names.end());
    for (auto const& [k, v] : p.unit_provenance) out.unit_provenance.emplace(k, v);
  }

  std::map<std::string, std::string> last_extra;
  std::optional<std::int64_t> last_cycle;
  for (auto const& part : parts) {
    double time_offset = out.points.empty() ? 0.0 : out.points.back().time;
    auto index_offset = static_cast<std::int64_t>(out.points.size());
    std::optional<std::int64_t> first_cycle;
    for (auto const& p : part.points) {
      if (p.cycle_index) {
        first_cycle = p.cycle_index;
        break;
      }
    }
    std::int64_t cycle_shift = 0;
    if (first_cycle) cycle_shift = last_cycle.value_or(0) - *first_cycle + 1;

    std::map<std::int64_t, std::int64_t> position;  // old index -> new index
    for (std::size_t i = 0; i < part.points.size(); ++i) {
      DataPoint p = part.points[i];
      position[p.index] = index_offset + static_cast<std::int64_t>(i);
      p.index = index_offset + static_cast<std::int64_t>(i);
      p.time += time_offset;
      if (p.cycle_index) {
        p.cycle_index = *p.cycle_index + cycle_shift;
        last_cycle = p.cycle_index;
      }
      out.points.push_back(p);
    }
    for (auto const& e : part.extra) {
      auto it = last_extra.find(e.name);
      if (it != last_extra.end() && it->second == e.value) continue;
      auto pos = position.find(e.point_index);
      ExtraDataValue moved = e;
      moved.point_index = pos != position.end() ? pos->second : e.point_index + index_offset;
      out.extra.push_back(std::move(moved));
      last_extra[e.name] = e.value;
    }
  }
  return out;
}

ConvertedFile ConvertBytesWithProfile(VendorProfile const& profile,
                                      std::string_view file_name,
                                      std::string_view bytes, ParseOptions opts) {
  opts.file_name = std::string(file_name);
  ConvertedFile out;
  out.format_id = profile.format_id;
  out.parse = Parse(bytes, profile, opts);
  for (auto const& s : out.parse.series) {
    out.datasets.push_back(Normalize(s, profile));
  }
  return out;
}

ConvertedFile ConvertBytes(ProfileSnapshot const& profiles, std::string_view file_name,
                           std::string_view bytes, ParseOptions opts) {
  auto id = profiles.DetectFormat(file_name, bytes.substr(0, std::min(bytes.size(), kSniffBytes)));
  return ConvertBytesWithProfile(*profiles.Find(id), file_name, bytes, std::move(opts));
}

}  // namespace cyclebench::parsers
