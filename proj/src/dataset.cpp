#include "motifbench/dataset.hpp"

#include <cmath>
#include <set>

#include "motifbench/error.hpp"

namespace motifbench {

namespace {

void require_finite(std::span<const double> values, std::string_view what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw InvalidArgument(std::string(what) + ": non-finite value at index " +
                            std::to_string(i));
    }
  }
}

bool has_line_break(std::string_view s) {
  return s.find_first_of("\r\n") != std::string_view::npos;
}

}  // namespace

std::string_view kind_name(PayloadKind kind) {
  switch (kind) {
    case PayloadKind::Text: return "text";
    case PayloadKind::Table: return "table";
    case PayloadKind::Matrix: return "matrix";
    case PayloadKind::Tensor: return "tensor";
    case PayloadKind::Graph: return "graph";
    case PayloadKind::KeyValue: return "kv";
  }
  return "?";
}

std::optional<PayloadKind> parse_kind(std::string_view name) {
  for (auto k : {PayloadKind::Text, PayloadKind::Table, PayloadKind::Matrix,
                 PayloadKind::Tensor, PayloadKind::Graph, PayloadKind::KeyValue}) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)) ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

TextCorpus::TextCorpus(std::vector<std::string> documents)
    : documents_(std::move(documents)) {
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    if (!is_valid_utf8(documents_[i])) {
      throw InvalidArgument("text corpus: document " + std::to_string(i) +
                            " is not valid UTF-8");
    }
    if (has_line_break(documents_[i])) {
      throw InvalidArgument("text corpus: document " + std::to_string(i) +
                            " contains a line break");
    }
  }
}

std::string_view column_kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::Integer: return "integer";
    case ColumnKind::Real: return "real";
    case ColumnKind::String: return "string";
  }
  return "?";
}

std::optional<ColumnKind> parse_column_kind(std::string_view name) {
  if (name == "integer") return ColumnKind::Integer;
  if (name == "real") return ColumnKind::Real;
  if (name == "string") return ColumnKind::String;
  return std::nullopt;
}

Table::Table(std::vector<Column> schema, std::vector<Row> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  std::set<std::string_view> seen;
  for (const auto& col : schema_) {
    if (col.name.empty() || col.name.find_first_of(",:\"\r\n") != std::string::npos) {
      throw InvalidArgument("table: illegal column name '" + col.name + "'");
    }
    if (!seen.insert(col.name).second) {
      throw InvalidArgument("table: duplicate column '" + col.name + "'");
    }
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const Row& row = rows_[r];
    if (row.size() != schema_.size()) {
      throw InvalidArgument("table: row " + std::to_string(r) + " has arity " +
                            std::to_string(row.size()) + ", schema has " +
                            std::to_string(schema_.size()));
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      const bool ok = (schema_[c].kind == ColumnKind::Integer &&
                       std::holds_alternative<std::int64_t>(row[c])) ||
                      (schema_[c].kind == ColumnKind::Real &&
                       std::holds_alternative<double>(row[c])) ||
                      (schema_[c].kind == ColumnKind::String &&
                       std::holds_alternative<std::string>(row[c]));
      if (!ok) {
        throw InvalidArgument("table: row " + std::to_string(r) + " column '" +
                              schema_[c].name + "' does not match kind " +
                              std::string(column_kind_name(schema_[c].kind)));
      }
      if (const double* d = std::get_if<double>(&row[c]); d && !std::isfinite(*d)) {
        throw InvalidArgument("table: row " + std::to_string(r) + " column '" +
                              schema_[c].name + "' is not finite");
      }
      if (const auto* s = std::get_if<std::string>(&row[c]); s && !is_valid_utf8(*s)) {
        throw InvalidArgument("table: row " + std::to_string(r) + " column '" +
                              schema_[c].name + "' is not valid UTF-8");
      }
    }
  }
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::column_index(std::string_view name) const {
  if (auto i = find_column(name)) return *i;
  throw InvalidArgument("unknown column '" + std::string(name) + "'");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ == 0 || cols_ == 0) {
    throw InvalidArgument("matrix: dimensions must be positive");
  }
  if (data_.size() != rows_ * cols_) {
    throw InvalidArgument("matrix: data length " + std::to_string(data_.size()) +
                          " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  require_finite(data_, "matrix");
}

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : Matrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

namespace {

std::size_t shape_volume(const std::vector<std::size_t>& shape) {
  if (shape.empty()) throw InvalidArgument("tensor: rank must be at least 1");
  std::size_t n = 1;
  for (auto d : shape) {
    if (d == 0) throw InvalidArgument("tensor: dimensions must be positive");
    n *= d;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  const std::size_t n = shape_volume(shape_);
  if (data_.size() != n) {
    throw InvalidArgument("tensor: data length " + std::to_string(data_.size()) +
                          " != shape volume " + std::to_string(n));
  }
  require_finite(data_, "tensor");
}

Tensor::Tensor(std::vector<std::size_t> shape)
    : Tensor(shape, std::vector<double>(shape_volume(shape), 0.0)) {}

Graph::Graph(std::uint64_t vertex_count, std::vector<Edge> edges, bool directed)
    : vertex_count_(vertex_count), edges_(std::move(edges)), directed_(directed) {
  if (vertex_count_ == 0) throw InvalidArgument("graph: vertex_count must be positive");
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (edges_[i].source >= vertex_count_ || edges_[i].target >= vertex_count_) {
      throw InvalidArgument("graph: edge " + std::to_string(i) + " (" +
                            std::to_string(edges_[i].source) + "," +
                            std::to_string(edges_[i].target) +
                            ") endpoint out of range");
    }
  }
}

std::size_t Graph::self_loop_count() const {
  std::size_t n = 0;
  for (const auto& e : edges_) n += (e.source == e.target);
  return n;
}

KeyValueSet::KeyValueSet(std::map<std::string, std::string> entries)
    : entries_(std::move(entries)) {
  for (const auto& [k, v] : entries_) {
    if (k.find_first_of("\t\r\n") != std::string::npos ||
        v.find_first_of("\t\r\n") != std::string::npos) {
      throw InvalidArgument("kv: key or value for '" + k +
                            "' contains TAB or a line break");
    }
    if (!is_valid_utf8(k) || !is_valid_utf8(v)) {
      throw InvalidArgument("kv: entry is not valid UTF-8");
    }
  }
}

PayloadKind kind_of(const Payload& p) {
  return static_cast<PayloadKind>(p.index());
}

void throw_kind_mismatch(PayloadKind expected, PayloadKind actual) {
  throw InvalidArgument("expected " + std::string(kind_name(expected)) +
                        " payload, got " + std::string(kind_name(actual)));
}

}  // namespace motifbench
