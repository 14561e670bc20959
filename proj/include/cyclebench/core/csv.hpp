#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cyclebench::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line on which the record starts
  bool unterminated_quote = false;
};

// RFC 4180 record reader over an in-memory buffer. Quoted fields may contain
// delimiters, doubled quotes and line breaks. Accepts LF or CRLF.
class Reader {
 public:
  explicit Reader(std::string_view text, char delimiter = ',');

  // Returns false at end of input.
  bool Next(Record& out);
  std::size_t line() const { return line_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  char delim_;
};

std::string Escape(std::string_view field, char delimiter = ',');
void AppendRow(std::string& out, std::span<std::string const> fields,
               char delimiter = ',');

std::vector<std::string> SplitLines(std::string_view text);

}  // namespace cyclebench::csv
