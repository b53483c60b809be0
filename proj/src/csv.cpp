#include "refspect/csv.hpp"

#include "refspect/error.hpp"

namespace refspect::csv {

std::vector<Row> Parse(std::string_view data) {
  std::vector<Row> rows;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = data.size();

  while (i < n) {
    Row row;
    row.line = line;
    std::string field;
    bool end_of_row = false;
    while (!end_of_row) {
      field.clear();
      if (i < n && data[i] == '"') {
        const std::size_t open_line = line;
        ++i;
        bool closed = false;
        while (i < n) {
          char c = data[i];
          if (c == '"') {
            if (i + 1 < n && data[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            closed = true;
            break;
          }
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        if (!closed) {
          throw Error(ErrorCode::kBadFormat,
                      "unterminated quoted field starting at line " + std::to_string(open_line));
        }
        if (i < n && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
          throw Error(ErrorCode::kBadFormat,
                      "unexpected character after quoted field at line " + std::to_string(line));
        }
      } else {
        while (i < n && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
          if (data[i] == '"') {
            throw Error(ErrorCode::kBadFormat,
                        "stray quote in unquoted field at line " + std::to_string(line));
          }
          field.push_back(data[i]);
          ++i;
        }
      }
      row.fields.push_back(field);
      if (i >= n) {
        end_of_row = true;
      } else if (data[i] == ',') {
        ++i;
      } else {
        if (data[i] == '\r') ++i;
        if (i < n && data[i] == '\n') ++i;
        ++line;
        end_of_row = true;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string Escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string FormatRow(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += Escape(fields[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace refspect::csv
