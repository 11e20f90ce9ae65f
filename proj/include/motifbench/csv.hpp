#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace motifbench::csv {

// One parsed record and the 1-based line it starts on.
struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// RFC-4180 reader over an in-memory buffer. Quoted fields may span lines.
class Reader {
 public:
  explicit Reader(std::string_view text, std::size_t first_line = 1)
      : text_(text), line_(first_line) {}

  // Next record, or nullopt at end of input. Throws ParseError on an
  // unterminated quote or stray characters after a closing quote.
  std::optional<Record> next();

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

// Quote a field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace motifbench::csv
