#include "motifbench/dataset_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "motifbench/csv.hpp"
#include "motifbench/error.hpp"
#include "motifbench/strings.hpp"

namespace motifbench {

namespace {

const std::regex& header_pattern() {
  static const std::regex re(R"(^#([a-z]+) v([0-9]+)(.*)$)");
  return re;
}

void append_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(bits >> (8 * i)));
}

double read_f64(std::string_view bytes, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i]))
            << (8 * i);
  }
  return std::bit_cast<double>(bits);
}

std::string format_value(const Value& v) {
  if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (auto* d = std::get_if<double>(&v)) return format_double(*d);
  return std::get<std::string>(v);
}

// --- encoders ---------------------------------------------------------------

std::string encode(const TextCorpus& t, SaveOptions) {
  if (!t.empty() && std::regex_match(t.documents().front(), header_pattern())) {
    throw InvalidArgument(
        "text corpus: first document looks like a format header and would not "
        "reload as text");
  }
  std::string out;
  for (const auto& d : t.documents()) {
    out += d;
    out.push_back('\n');
  }
  return out;
}

std::string encode(const Table& t, SaveOptions) {
  if (t.column_count() == 0 && t.row_count() > 0) {
    throw InvalidArgument("table: cannot encode rows of a zero-column table");
  }
  std::string out = "#table v1\n";
  for (std::size_t i = 0; i < t.column_count(); ++i) {
    if (i) out.push_back(',');
    out += t.schema()[i].name;
    out.push_back(':');
    out += column_kind_name(t.schema()[i].kind);
  }
  out.push_back('\n');
  std::vector<std::string> fields;
  for (const auto& row : t.rows()) {
    fields.clear();
    for (const auto& v : row) fields.push_back(format_value(v));
    out += csv::join(fields);
    out.push_back('\n');
  }
  return out;
}

std::string encode(const Matrix& m, SaveOptions options) {
  std::string out = "#matrix v1 " + std::to_string(m.rows()) + " " +
                    std::to_string(m.cols());
  if (options.text_matrix) {
    out += " text\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (c) out.push_back(',');
        out += format_double(m.at(r, c));
      }
      out.push_back('\n');
    }
    return out;
  }
  out.push_back('\n');
  out.reserve(out.size() + 8 * m.data().size());
  for (double v : m.data()) append_f64(out, v);
  return out;
}

std::string encode(const Tensor& t, SaveOptions) {
  std::string out = "#tensor v1";
  for (auto d : t.shape()) out += " " + std::to_string(d);
  out.push_back('\n');
  out.reserve(out.size() + 8 * t.size());
  for (double v : t.data()) append_f64(out, v);
  return out;
}

std::string encode(const Graph& g, SaveOptions) {
  std::string out = "#graph v1 " + std::to_string(g.vertex_count()) + " " +
                    (g.directed() ? "1" : "0") + "\n";
  for (const auto& e : g.edges()) {
    out += std::to_string(e.source);
    out.push_back(' ');
    out += std::to_string(e.target);
    out.push_back('\n');
  }
  return out;
}

std::string encode(const KeyValueSet& kv, SaveOptions) {
  std::string out = "#kv v1\n";
  for (const auto& [k, v] : kv.entries()) {
    out += k;
    out.push_back('\t');
    out += v;
    out.push_back('\n');
  }
  return out;
}

// --- decoders ---------------------------------------------------------------

// Splits the body into lines (LF, optional trailing CR stripped). A final
// line without LF is accepted.
std::vector<std::string_view> body_lines(std::string_view body) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < body.size()) {
    auto end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    std::string_view line = body.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::size_t> parse_dims(std::string_view rest, std::size_t expected,
                                    bool allow_more, std::string_view what) {
  std::vector<std::size_t> dims;
  for (auto tok : split_whitespace(rest)) {
    auto v = parse_uint64(tok);
    if (!v) break;
    dims.push_back(*v);
  }
  if (dims.size() < expected || (!allow_more && dims.size() != expected)) {
    throw ParseError(std::string(what) + " header: expected " +
                         std::to_string(expected) + " dimensions",
                     1);
  }
  return dims;
}

std::vector<double> decode_binary(std::string_view body, std::size_t count,
                                  std::string_view what) {
  if (body.size() != count * 8) {
    throw ParseError(std::string(what) + " body: expected " +
                     std::to_string(count * 8) + " bytes of binary64, found " +
                     std::to_string(body.size()) + " (byte offset after header)");
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) data[i] = read_f64(body, 8 * i);
  return data;
}

Payload decode_text(std::string_view bytes) {
  std::vector<std::string> docs;
  for (auto line : body_lines(bytes)) docs.emplace_back(line);
  return TextCorpus(std::move(docs));
}

Value parse_value(const std::string& field, ColumnKind kind, std::size_t line,
                  const std::string& column) {
  switch (kind) {
    case ColumnKind::Integer:
      if (auto v = parse_int64(field)) return *v;
      break;
    case ColumnKind::Real:
      if (auto v = parse_double(field)) return *v;
      break;
    case ColumnKind::String:
      return field;
  }
  throw ParseError("column '" + column + "': cannot parse '" + field + "' as " +
                       std::string(column_kind_name(kind)),
                   line);
}

Payload decode_table(std::string_view body) {
  const auto nl = body.find('\n');
  std::string_view schema_line = body.substr(0, nl);
  if (!schema_line.empty() && schema_line.back() == '\r') schema_line.remove_suffix(1);
  const std::string_view rows_text =
      nl == std::string_view::npos ? std::string_view{} : body.substr(nl + 1);
  if (nl == std::string_view::npos && schema_line.empty()) {
    throw ParseError("table: missing schema line", 2);
  }
  std::vector<Column> schema;
  if (!schema_line.empty()) {
    for (auto item : split(schema_line, ',')) {
      if (item.empty()) continue;  // tolerate a trailing comma
      const auto colon = item.rfind(':');
      if (colon == std::string_view::npos) {
        throw ParseError("table schema: expected name:kind, got '" +
                             std::string(item) + "'",
                         2);
      }
      auto kind = parse_column_kind(item.substr(colon + 1));
      if (!kind) {
        throw ParseError("table schema: unknown column kind '" +
                             std::string(item.substr(colon + 1)) + "'",
                         2);
      }
      schema.push_back({std::string(item.substr(0, colon)), *kind});
    }
  }
  std::vector<Row> rows;
  csv::Reader reader(rows_text, 3);
  while (auto rec = reader.next()) {
    if (rec->fields.size() != schema.size()) {
      throw ParseError("table row has arity " + std::to_string(rec->fields.size()) +
                           ", schema has " + std::to_string(schema.size()),
                       rec->line);
    }
    Row row;
    row.reserve(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      row.push_back(parse_value(rec->fields[c], schema[c].kind, rec->line, schema[c].name));
    }
    rows.push_back(std::move(row));
  }
  return Table(std::move(schema), std::move(rows));
}

Payload decode_matrix(std::string_view rest, std::string_view body) {
  const auto toks = split_whitespace(rest);
  const bool text_mode = toks.size() == 3 && toks[2] == "text";
  if (!(toks.size() == 2 || text_mode)) {
    throw ParseError("matrix header: expected '<rows> <cols> [text]'", 1);
  }
  const auto dims = parse_dims(rest, 2, text_mode, "matrix");
  const std::size_t rows = dims[0], cols = dims[1];
  if (!text_mode) {
    return Matrix(rows, cols, decode_binary(body, rows * cols, "matrix"));
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  const auto lines = body_lines(body);
  if (lines.size() != rows) {
    throw ParseError("matrix: expected " + std::to_string(rows) + " rows, found " +
                         std::to_string(lines.size()),
                     lines.size() + 2);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const auto fields = split(lines[r], ',');
    if (fields.size() != cols) {
      throw ParseError("matrix: row has " + std::to_string(fields.size()) +
                           " values, expected " + std::to_string(cols),
                       r + 2);
    }
    for (auto f : fields) {
      auto v = parse_double(trim(f));
      if (!v) throw ParseError("matrix: bad number '" + std::string(f) + "'", r + 2);
      data.push_back(*v);
    }
  }
  return Matrix(rows, cols, std::move(data));
}

Payload decode_tensor(std::string_view rest, std::string_view body) {
  auto shape = parse_dims(rest, 1, true, "tensor");
  if (shape.size() != split_whitespace(rest).size()) {
    throw ParseError("tensor header: dimensions must be non-negative integers", 1);
  }
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return Tensor(std::move(shape), decode_binary(body, n, "tensor"));
}

Payload decode_graph(std::string_view rest, std::string_view body) {
  const auto toks = split_whitespace(rest);
  if (toks.size() != 2) throw ParseError("graph header: expected '<vertex_count> <0|1>'", 1);
  auto n = parse_uint64(toks[0]);
  if (!n || (toks[1] != "0" && toks[1] != "1")) {
    throw ParseError("graph header: expected '<vertex_count> <0|1>'", 1);
  }
  std::vector<Edge> edges;
  const auto lines = body_lines(body);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto parts = split_whitespace(lines[i]);
    if (parts.empty()) continue;
    std::optional<std::uint64_t> s, t;
    if (parts.size() == 2) {
      s = parse_uint64(parts[0]);
      t = parse_uint64(parts[1]);
    }
    if (!s || !t) throw ParseError("graph: expected 'src tgt'", i + 2);
    if (*s >= *n || *t >= *n) {
      throw ParseError("graph: endpoint out of range (vertex_count=" +
                           std::to_string(*n) + ")",
                       i + 2);
    }
    edges.push_back({*s, *t});
  }
  return Graph(*n, std::move(edges), toks[1] == "1");
}

Payload decode_kv(std::string_view body) {
  std::map<std::string, std::string> entries;
  const auto lines = body_lines(body);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto tab = lines[i].find('\t');
    if (tab == std::string_view::npos) {
      throw ParseError("kv: expected key<TAB>value", i + 2);
    }
    std::string key(lines[i].substr(0, tab));
    if (!entries.emplace(key, std::string(lines[i].substr(tab + 1))).second) {
      throw ParseError("kv: duplicate key '" + key + "'", i + 2);
    }
  }
  return KeyValueSet(std::move(entries));
}

}  // namespace

std::string encode_payload(const Payload& payload, SaveOptions options) {
  return std::visit([&](const auto& p) { return encode(p, options); }, payload);
}

Payload decode_payload(std::string_view bytes) {
  const auto nl = bytes.find('\n');
  std::string first(bytes.substr(0, nl));
  if (!first.empty() && first.back() == '\r') first.pop_back();
  std::smatch m;
  if (first.empty() || first.front() != '#' ||
      !std::regex_match(first, m, header_pattern())) {
    return decode_text(bytes);
  }
  const std::string kind = m[1];
  if (m[2] != "1") {
    throw ParseError("unsupported " + kind + " format version v" + m[2].str(), 1);
  }
  const std::string rest = m[3];
  const std::string_view body =
      nl == std::string_view::npos ? std::string_view{} : bytes.substr(nl + 1);
  if (kind == "table") {
    if (!trim(rest).empty()) throw ParseError("table header takes no arguments", 1);
    return decode_table(body);
  }
  if (kind == "matrix") return decode_matrix(rest, body);
  if (kind == "tensor") return decode_tensor(rest, body);
  if (kind == "graph") return decode_graph(rest, body);
  if (kind == "kv") {
    if (!trim(rest).empty()) throw ParseError("kv header takes no arguments", 1);
    return decode_kv(body);
  }
  throw ParseError("unknown header '#" + kind + "'", 1);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  SaveOptions options) {
  const auto parent = path.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw IoError("directory '" + parent.string() + "' does not exist");
  }
  write_file(path, encode_payload(d.payload(), options));
}

Dataset load_dataset(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    return Dataset(decode_payload(bytes));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": ", e);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

}  // namespace motifbench
