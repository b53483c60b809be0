#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace refspect::csv {

struct Row {
  std::size_t line = 0;  // 1-based line on which the row starts
  std::vector<std::string> fields;
};

// RFC 4180 reader. Accepts LF or CRLF row endings; throws kBadFormat on an
// unterminated quoted field or stray quote inside an unquoted field.
std::vector<Row> Parse(std::string_view data);

std::string Escape(std::string_view field);
std::string FormatRow(const std::vector<std::string>& fields);

}  // namespace refspect::csv
