#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace motifbench {

enum class PayloadKind { Text, Table, Matrix, Tensor, Graph, KeyValue };

// "text", "table", "matrix", "tensor", "graph", "kv".
std::string_view kind_name(PayloadKind kind);
std::optional<PayloadKind> parse_kind(std::string_view name);

// True when `s` is well-formed UTF-8 (no overlongs, no surrogates).
bool is_valid_utf8(std::string_view s);

/// Ordered list of documents, one line each.
class TextCorpus {
 public:
  TextCorpus() = default;
  // Throws InvalidArgument for invalid UTF-8 or an embedded CR/LF.
  explicit TextCorpus(std::vector<std::string> documents);

  const std::vector<std::string>& documents() const { return documents_; }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  friend bool operator==(const TextCorpus&, const TextCorpus&) = default;

 private:
  std::vector<std::string> documents_;
};

enum class ColumnKind { Integer, Real, String };

std::string_view column_kind_name(ColumnKind kind);
std::optional<ColumnKind> parse_column_kind(std::string_view name);

struct Column {
  std::string name;
  ColumnKind kind;
  friend bool operator==(const Column&, const Column&) = default;
};

using Value = std::variant<std::int64_t, double, std::string>;
using Row = std::vector<Value>;

/// Relational table with a typed schema. Row order is significant.
class Table {
 public:
  Table() = default;
  // Throws InvalidArgument on arity or kind mismatch, non-finite reals, or
  // duplicate/illegal column names.
  Table(std::vector<Column> schema, std::vector<Row> rows);

  const std::vector<Column>& schema() const { return schema_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t row_count() const { return rows_.size(); }
  std::size_t column_count() const { return schema_.size(); }

  std::optional<std::size_t> find_column(std::string_view name) const;
  // Throws InvalidArgument naming the column when absent.
  std::size_t column_index(std::string_view name) const;

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::vector<Column> schema_;
  std::vector<Row> rows_;
};

/// Dense row-major matrix of finite reals.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::size_t rows, std::size_t cols);  // zero-filled

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> data() const { return data_; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

/// Dense row-major tensor of finite reals. Rank is at least one.
class Tensor {
 public:
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);
  explicit Tensor(std::vector<std::size_t> shape);  // zero-filled

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

struct Edge {
  std::uint64_t source;
  std::uint64_t target;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Edge-list graph. Self-loops and parallel edges are kept as given.
class Graph {
 public:
  Graph(std::uint64_t vertex_count, std::vector<Edge> edges, bool directed);

  std::uint64_t vertex_count() const { return vertex_count_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool directed() const { return directed_; }
  std::size_t self_loop_count() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::uint64_t vertex_count_;
  std::vector<Edge> edges_;
  bool directed_;
};

/// String-to-string map. Keys and values may not contain TAB, CR or LF.
class KeyValueSet {
 public:
  KeyValueSet() = default;
  explicit KeyValueSet(std::map<std::string, std::string> entries);

  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  friend bool operator==(const KeyValueSet&, const KeyValueSet&) = default;

 private:
  std::map<std::string, std::string> entries_;
};

using Payload = std::variant<TextCorpus, Table, Matrix, Tensor, Graph, KeyValueSet>;

PayloadKind kind_of(const Payload& p);

/// Where a dataset came from. Absent on a Dataset means "external".
struct Provenance {
  std::string generator;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> parameters;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// A payload plus provenance. Copies share the immutable payload.
class Dataset {
 public:
  Dataset(Payload payload, std::optional<Provenance> provenance = std::nullopt)
      : payload_(std::make_shared<const Payload>(std::move(payload))),
        provenance_(std::move(provenance)) {}

  const Payload& payload() const { return *payload_; }
  PayloadKind kind() const { return kind_of(*payload_); }
  const std::optional<Provenance>& provenance() const { return provenance_; }
  bool generated() const { return provenance_.has_value(); }

  template <typename T>
  const T& as() const;

 private:
  std::shared_ptr<const Payload> payload_;
  std::optional<Provenance> provenance_;
};

// Throws InvalidArgument naming the expected and actual kinds.
[[noreturn]] void throw_kind_mismatch(PayloadKind expected, PayloadKind actual);

template <typename T>
const T& Dataset::as() const {
  if (const T* p = std::get_if<T>(payload_.get())) return *p;
  constexpr PayloadKind expected =
      std::is_same_v<T, TextCorpus> ? PayloadKind::Text
      : std::is_same_v<T, Table>    ? PayloadKind::Table
      : std::is_same_v<T, Matrix>   ? PayloadKind::Matrix
      : std::is_same_v<T, Tensor>   ? PayloadKind::Tensor
      : std::is_same_v<T, Graph>    ? PayloadKind::Graph
                                    : PayloadKind::KeyValue;
  throw_kind_mismatch(expected, kind());
}

}  // namespace motifbench
