#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qana::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields may contain separators, doubled quotes and
/// newlines. A UTF-8 BOM is skipped. Throws ParseError on an unterminated
/// quote or stray characters after a closing quote.
std::vector<Row> parse(std::string_view content, const std::string& source_name);

/// Quotes a field only when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace qana::csv
