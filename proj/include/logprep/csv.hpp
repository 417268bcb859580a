#pragma once

// RFC-4180 rows where a cell is either absent (empty, unquoted) or present
// text. Present-but-empty text is written as "" so the two stay distinct.

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace logprep::csv {

using Cell = std::optional<std::string>;
using Row = std::vector<Cell>;

void write_row(std::ostream& out, const Row& row);
void write_header(std::ostream& out, const std::vector<std::string>& names);

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Reads the next row; false at end of input. Throws Error(MalformedTable)
  /// on an unterminated quoted cell.
  bool next(Row& row);

 private:
  std::istream& in_;
};

}  // namespace logprep::csv
