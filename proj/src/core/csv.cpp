#include "cyclebench/core/csv.hpp"

namespace cyclebench::csv {

Reader::Reader(std::string_view text, char delimiter)
    : text_(text), delim_(delimiter) {
  // UTF-8 byte order mark
  if (text_.size() >= 3 && text_.substr(0, 3) == "\xEF\xBB\xBF") {
    pos_ = 3;
  }
}

bool Reader::Next(Record& out) {
  out.fields.clear();
  out.unterminated_quote = false;
  if (pos_ >= text_.size()) return false;
  out.line = line_;

  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  while (pos_ < text_.size()) {
    char c = text_[pos_];
    if (in_quotes) {
      if (c == '"') {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
          field.push_back('"');
          pos_ += 2;
          continue;
        }
        in_quotes = false;
        ++pos_;
        continue;
      }
      if (c == '\n') ++line_;
      field.push_back(c);
      ++pos_;
      continue;
    }
    if (c == '"' && field.empty() && !field_was_quoted) {
      in_quotes = true;
      field_was_quoted = true;
      ++pos_;
      continue;
    }
    if (c == delim_) {
      out.fields.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
      ++pos_;
      continue;
    }
    if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
      ++pos_;
      continue;
    }
    if (c == '\n') {
      ++pos_;
      ++line_;
      out.fields.push_back(std::move(field));
      return true;
    }
    field.push_back(c);
    ++pos_;
  }
  out.unterminated_quote = in_quotes;
  out.fields.push_back(std::move(field));
  return true;
}

std::string Escape(std::string_view field, char delimiter) {
  bool needs = field.find_first_of("\"\r\n") != std::string_view::npos ||
               field.find(delimiter) != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void AppendRow(std::string& out, std::span<std::string const> fields,
               char delimiter) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(delimiter);
    out += Escape(fields[i], delimiter);
  }
  out.push_back('\n');
}

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    auto end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

}  // namespace cyclebench::csv
