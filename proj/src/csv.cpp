#include "logprep/csv.hpp"

#include "logprep/error.hpp"

namespace logprep::csv {

namespace {

void write_cell(std::ostream& out, const Cell& cell) {
  if (!cell) return;
  const std::string& s = *cell;
  const bool quote = s.empty() || s.find_first_of(",\"\r\n") != std::string::npos;
  if (!quote) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    write_cell(out, row[i]);
  }
  out << "\r\n";
}

void write_header(std::ostream& out, const std::vector<std::string>& names) {
  Row row(names.begin(), names.end());
  write_row(out, row);
}

bool Reader::next(Row& row) {
  row.clear();
  int c = in_.get();
  if (c == EOF) return false;

  std::string text;
  bool quoted = false;
  bool any = false;
  auto finish_cell = [&] {
    if (quoted || any) {
      row.emplace_back(std::move(text));
    } else {
      row.emplace_back(std::nullopt);
    }
    text.clear();
    quoted = false;
    any = false;
  };

  for (;; c = in_.get()) {
    if (c == EOF) {
      finish_cell();
      return true;
    }
    if (c == '"' && !any && !quoted) {
      quoted = true;
      for (;;) {
        c = in_.get();
        if (c == EOF) throw Error(ErrorCode::MalformedTable, "unterminated quoted cell");
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            text.push_back('"');
            continue;
          }
          break;
        }
        text.push_back(static_cast<char>(c));
      }
      continue;
    }
    if (c == ',') {
      finish_cell();
      continue;
    }
    if (c == '\r' && in_.peek() == '\n') continue;
    if (c == '\n') {
      finish_cell();
      return true;
    }
    text.push_back(static_cast<char>(c));
    any = true;
  }
}

}  // namespace logprep::csv
