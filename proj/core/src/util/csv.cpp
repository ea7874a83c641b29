#include "coi/util/csv.hpp"

#include "coi/error.hpp"

namespace coi::csv {

std::optional<Row> Reader::next() {
  int c = in_.get();
  if (c == std::char_traits<char>::eof()) return std::nullopt;

  record_line_ = line_;
  Row row;
  std::string field;
  bool quoted = false;
  bool field_started_quoted = false;

  auto finish_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started_quoted = false;
  };

  for (;; c = in_.get()) {
    if (c == std::char_traits<char>::eof()) {
      if (quoted) {
        throw ValidationError("csv: unterminated quoted field starting on line " +
                              std::to_string(record_line_));
      }
      finish_field();
      return row;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line_;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field.empty() && !field_started_quoted) {
          quoted = true;
          field_started_quoted = true;
        } else {
          field.push_back(ch);
        }
        break;
      case ',':
        finish_field();
        break;
      case '\r':
        if (in_.peek() == '\n') in_.get();
        ++line_;
        finish_field();
        return row;
      case '\n':
        ++line_;
        finish_field();
        return row;
      default:
        field.push_back(ch);
    }
  }
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i != 0) out << ',';
    out << escape(row[i]);
  }
  out << '\n';
}

}  // namespace coi::csv
