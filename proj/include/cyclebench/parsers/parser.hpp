#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cyclebench/core/model.hpp"
#include "cyclebench/parsers/profile.hpp"
#include "cyclebench/parsers/registry.hpp"

namespace cyclebench::parsers {

struct MalformedLine {
  std::size_t line = 0;
  std::string reason;
};

struct RawChannelSeries {
  std::int64_t channel = 1;
  std::string source_name;
  std::vector<std::string> columns;            // shared by every row
  std::vector<std::vector<std::string>> rows;  // values in column order
  std::vector<std::size_t> source_lines;       // 1-based, parallel to rows
  std::vector<MalformedLine> malformed;        // rejected rows of this channel
};

struct ParseOptions {
  std::string file_name;
  // Fraction of data rows allowed to be malformed before the whole parse
  // fails. 0 means any malformed row fails the file.
  double malformed_tolerance = 0.0;
};

struct ParseResult {
  std::vector<RawChannelSeries> series;  // ascending channel
  std::vector<MalformedLine> unattributed;  // malformed with no readable channel
  std::size_t data_rows = 0;
};

// Throws EmptyFile, ParseError.
ParseResult Parse(std::string_view bytes, VendorProfile const& profile,
                  ParseOptions const& opts);

// Throws MissingRequiredColumn, UnitError.
CanonicalDataset Normalize(RawChannelSeries const& raw, VendorProfile const& profile);

// Time of each part is shifted by the previous part's final time; cycle
// indices continue; provenance is concatenated. Throws ChannelMismatch,
// EmptyInput.
CanonicalDataset Stitch(std::vector<CanonicalDataset> const& parts);

// Channel from a numeric file extension ("cellA.017" -> 17).
std::optional<std::int64_t> ChannelFromExtension(std::string_view file_name);

// detect -> parse -> normalize for every channel in the file.
struct ConvertedFile {
  std::string format_id;
  std::vector<CanonicalDataset> datasets;
  ParseResult parse;
};
ConvertedFile ConvertBytes(ProfileSnapshot const& profiles, std::string_view file_name,
                           std::string_view bytes, ParseOptions opts = {});
ConvertedFile ConvertBytesWithProfile(VendorProfile const& profile,
                                      std::string_view file_name,
                                      std::string_view bytes, ParseOptions opts = {});

}  // namespace cyclebench::parsers
