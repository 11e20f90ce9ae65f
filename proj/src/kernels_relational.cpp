// Sort and Set motifs.

#include <algorithm>
#include <map>
#include <set>

#include "motifbench/error.hpp"
#include "motifbench/kernels.hpp"
#include "motifbench/strings.hpp"

namespace motifbench::kernels {

namespace {

// Total order on values of one column kind.
bool value_less(const Value& a, const Value& b) {
  if (auto* x = std::get_if<std::int64_t>(&a)) return *x < std::get<std::int64_t>(b);
  if (auto* x = std::get_if<double>(&a)) return *x < std::get<double>(b);
  return std::get<std::string>(a) < std::get<std::string>(b);
}

std::string_view field_or_empty(std::string_view line, std::size_t key) {
  const auto fields = split_whitespace(line);
  return key < fields.size() ? fields[key] : std::string_view{};
}

}  // namespace

TextCorpus sort_records(const TextCorpus& input, std::optional<std::size_t> key) {
  std::vector<std::string> docs = input.documents();
  if (!key) {
    std::stable_sort(docs.begin(), docs.end());
  } else {
    const std::size_t k = *key;
    std::stable_sort(docs.begin(), docs.end(), [k](const auto& a, const auto& b) {
      return field_or_empty(a, k) < field_or_empty(b, k);
    });
  }
  return TextCorpus(std::move(docs));
}

Table sort_records(const Table& input, std::size_t key) {
  if (key >= input.column_count()) {
    throw InvalidArgument("sort: key column " + std::to_string(key) +
                          " out of range (table has " +
                          std::to_string(input.column_count()) + " columns)");
  }
  std::vector<Row> rows = input.rows();
  std::stable_sort(rows.begin(), rows.end(), [key](const Row& a, const Row& b) {
    return value_less(a[key], b[key]);
  });
  return Table(input.schema(), std::move(rows));
}

Matrix sort_records(const Matrix& input, std::size_t key) {
  if (key >= input.cols()) {
    throw InvalidArgument("sort: key column " + std::to_string(key) +
                          " out of range (matrix has " + std::to_string(input.cols()) +
                          " columns)");
  }
  std::vector<std::size_t> order(input.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return input.at(a, key) < input.at(b, key);
  });
  std::vector<double> data;
  data.reserve(input.data().size());
  for (auto r : order) {
    const auto row = input.row(r);
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(input.rows(), input.cols(), std::move(data));
}

TextCorpus grep(const TextCorpus& input, std::string_view pattern) {
  if (pattern.empty()) throw InvalidArgument("grep: pattern must be non-empty");
  std::vector<std::string> out;
  for (const auto& d : input.documents()) {
    if (d.find(pattern) != std::string::npos) out.push_back(d);
  }
  return TextCorpus(std::move(out));
}

KeyValueSet set_op(const KeyValueSet& a, const KeyValueSet& b, SetOp op) {
  std::map<std::string, std::string> out;
  switch (op) {
    case SetOp::Union:
      out = a.entries();
      for (const auto& [k, v] : b.entries()) out.emplace(k, v);
      break;
    case SetOp::Intersect:
      for (const auto& [k, v] : a.entries()) {
        if (b.entries().contains(k)) out.emplace(k, v);
      }
      break;
    case SetOp::Difference:
      for (const auto& [k, v] : a.entries()) {
        if (!b.entries().contains(k)) out.emplace(k, v);
      }
      break;
  }
  return KeyValueSet(std::move(out));
}

Predicate parse_predicate(std::string_view text) {
  static constexpr std::pair<std::string_view, CompareOp> kOps[] = {
      {"==", CompareOp::Eq}, {"!=", CompareOp::Ne}, {"<=", CompareOp::Le},
      {">=", CompareOp::Ge}, {"=", CompareOp::Eq},  {"<", CompareOp::Lt},
      {">", CompareOp::Gt}};
  std::size_t best = std::string_view::npos;
  std::pair<std::string_view, CompareOp> found{};
  for (const auto& entry : kOps) {
    const auto pos = text.find(entry.first);
    if (pos != std::string_view::npos && pos < best) {
      best = pos;
      found = entry;
    } else if (pos == best && entry.first.size() > found.first.size()) {
      found = entry;
    }
  }
  if (best == std::string_view::npos) {
    throw InvalidArgument("predicate '" + std::string(text) +
                          "': expected <column> <op> <value>");
  }
  Predicate p;
  p.column = std::string(trim(text.substr(0, best)));
  p.op = found.second;
  std::string_view lit = trim(text.substr(best + found.first.size()));
  if (lit.size() >= 2 && (lit.front() == '\'' || lit.front() == '"') &&
      lit.back() == lit.front()) {
    lit = lit.substr(1, lit.size() - 2);
  }
  p.literal = std::string(lit);
  if (p.column.empty()) {
    throw InvalidArgument("predicate '" + std::string(text) + "': missing column");
  }
  return p;
}

namespace {

template <typename T>
bool compare(const T& a, CompareOp op, const T& b) {
  switch (op) {
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
  }
  return false;
}

}  // namespace

RowPredicate bind_predicate(const Table& table, const Predicate& p) {
  const std::size_t col = table.column_index(p.column);
  const CompareOp op = p.op;
  switch (table.schema()[col].kind) {
    case ColumnKind::Integer: {
      if (auto v = parse_int64(p.literal)) {
        const std::int64_t rhs = *v;
        return [=](const Row& r) { return compare(std::get<std::int64_t>(r[col]), op, rhs); };
      }
      if (auto v = parse_double(p.literal)) {
        const double rhs = *v;
        return [=](const Row& r) {
          return compare(static_cast<double>(std::get<std::int64_t>(r[col])), op, rhs);
        };
      }
      break;
    }
    case ColumnKind::Real: {
      if (auto v = parse_double(p.literal)) {
        const double rhs = *v;
        return [=](const Row& r) { return compare(std::get<double>(r[col]), op, rhs); };
      }
      break;
    }
    case ColumnKind::String: {
      const std::string rhs = p.literal;
      return [=](const Row& r) { return compare(std::get<std::string>(r[col]), op, rhs); };
    }
  }
  throw InvalidArgument("predicate: '" + p.literal + "' is not a valid " +
                        std::string(column_kind_name(table.schema()[col].kind)) +
                        " for column '" + p.column + "'");
}

Table project(const Table& t, std::span<const std::string> columns) {
  if (columns.empty()) throw InvalidArgument("project: no columns given");
  std::vector<std::size_t> idx;
  std::vector<Column> schema;
  for (const auto& name : columns) {
    idx.push_back(t.column_index(name));
    schema.push_back(t.schema()[idx.back()]);
  }
  std::vector<Row> rows;
  rows.reserve(t.row_count());
  for (const auto& row : t.rows()) {
    Row r;
    r.reserve(idx.size());
    for (auto i : idx) r.push_back(row[i]);
    rows.push_back(std::move(r));
  }
  return Table(std::move(schema), std::move(rows));
}

Table filter(const Table& t, const RowPredicate& keep) {
  std::vector<Row> rows;
  for (const auto& row : t.rows()) {
    if (keep(row)) rows.push_back(row);
  }
  return Table(t.schema(), std::move(rows));
}

Table filter(const Table& t, const Predicate& keep) {
  return filter(t, bind_predicate(t, keep));
}

Table select(const Table& t, const std::optional<Predicate>& where,
             std::span<const std::string> columns) {
  Table rows = where ? filter(t, *where) : t;
  if (columns.empty()) return rows;
  return project(rows, columns);
}

Table union_all(const Table& a, const Table& b) {
  if (a.schema() != b.schema()) throw InvalidArgument("union: schema mismatch");
  std::vector<Row> rows = a.rows();
  rows.insert(rows.end(), b.rows().begin(), b.rows().end());
  return Table(a.schema(), std::move(rows));
}

}  // namespace motifbench::kernels
