#include "motifbench/datagen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <set>

#include "motifbench/dataset_io.hpp"
#include "motifbench/error.hpp"
#include "motifbench/fft.hpp"
#include "motifbench/rng.hpp"
#include "motifbench/strings.hpp"

namespace motifbench::datagen {

namespace {

// Cumulative-count sampler over token ids.
struct Sampler {
  std::vector<std::uint32_t> ids;
  std::vector<std::uint64_t> cumulative;

  void add(std::uint32_t id, std::uint64_t count) {
    ids.push_back(id);
    cumulative.push_back((cumulative.empty() ? 0 : cumulative.back()) + count);
  }
  bool empty() const { return ids.empty(); }
  std::uint32_t draw(SplitMix64& rng) const {
    const std::uint64_t r = rng.below(cumulative.back());
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return ids[static_cast<std::size_t>(it - cumulative.begin())];
  }
};

std::vector<double> draw_values(std::size_t n, const Distribution& dist, std::uint64_t seed) {
  if (dist.kind == Distribution::Kind::Uniform && dist.b < dist.a) {
    throw InvalidArgument("uniform distribution needs hi >= lo");
  }
  if (dist.kind == Distribution::Kind::Gaussian && !(dist.b > 0)) {
    throw InvalidArgument("gaussian distribution needs sigma > 0");
  }
  if (!std::isfinite(dist.a) || !std::isfinite(dist.b)) {
    throw InvalidArgument("distribution parameters must be finite");
  }
  SplitMix64 rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) {
    v = dist.kind == Distribution::Kind::Uniform ? rng.uniform(dist.a, dist.b)
                                                 : rng.gaussian(dist.a, dist.b);
  }
  return out;
}

std::string date_string(int day_of_year) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int month = 0;
  while (day_of_year >= kDays[month]) day_of_year -= kDays[month++];
  char buf[16];
  std::snprintf(buf, sizeof buf, "2017-%02d-%02d", month + 1, day_of_year + 1);
  return buf;
}

}  // namespace

Distribution Distribution::parse(std::string_view text) {
  const auto colon = text.find(':');
  const auto name = trim(text.substr(0, colon));
  Distribution d;
  if (name == "uniform") {
    d = uniform(0.0, 1.0);
  } else if (name == "gaussian" || name == "normal") {
    d = gaussian(0.0, 1.0);
  } else {
    throw InvalidArgument("unknown distribution '" + std::string(name) +
                          "' (expected uniform or gaussian)");
  }
  if (colon != std::string_view::npos) {
    const auto parts = split(text.substr(colon + 1), ',');
    std::optional<double> a, b;
    if (parts.size() == 2) {
      a = parse_double(trim(parts[0]));
      b = parse_double(trim(parts[1]));
    }
    if (!a || !b) {
      throw InvalidArgument("distribution '" + std::string(text) +
                            "': expected two numbers after ':'");
    }
    d.a = *a;
    d.b = *b;
  }
  return d;
}

std::string Distribution::to_string() const {
  return std::string(kind == Kind::Uniform ? "uniform:" : "gaussian:") + format_double(a) +
         "," + format_double(b);
}

Dataset gen_text(const TextCorpus& seed_corpus, const TextSpec& spec) {
  if (spec.target_bytes == 0) throw InvalidArgument("gen_text: target_bytes must be positive");

  // Vocabulary in sorted order so token ids do not depend on corpus order.
  std::map<std::string, std::uint64_t> unigram;
  std::vector<std::vector<std::string_view>> docs;
  for (const auto& d : seed_corpus.documents()) {
    auto toks = split_whitespace(d);
    for (auto t : toks) ++unigram[std::string(t)];
    if (!toks.empty()) docs.push_back(std::move(toks));
  }
  if (unigram.empty()) throw InvalidArgument("gen_text: seed corpus has no tokens");

  std::vector<std::string> vocab;
  std::map<std::string_view, std::uint32_t> id_of;
  for (const auto& [tok, n] : unigram) {
    id_of.emplace(tok, static_cast<std::uint32_t>(vocab.size()));
    vocab.push_back(tok);
  }
  Sampler unigram_sampler;
  for (const auto& [tok, n] : unigram) unigram_sampler.add(id_of.at(tok), n);

  // Bigrams over the seed read as one cyclic token stream, so every token has
  // a successor and the chain's stationary law is the seed unigram law.
  std::vector<std::uint32_t> stream;
  std::vector<std::size_t> lengths;
  for (const auto& toks : docs) {
    lengths.push_back(toks.size());
    for (auto t : toks) stream.push_back(id_of.at(t));
  }
  std::vector<std::map<std::uint32_t, std::uint64_t>> successor_counts(vocab.size());
  for (std::size_t i = 0; i < stream.size(); ++i) {
    ++successor_counts[stream[i]][stream[(i + 1) % stream.size()]];
  }
  std::vector<Sampler> bigram(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    for (const auto& [next, n] : successor_counts[i]) bigram[i].add(next, n);
  }

  SplitMix64 rng(spec.seed);
  std::vector<std::string> out;
  std::uint64_t total = 0;
  bool done = false;
  bool started = false;
  std::uint32_t prev = 0;
  while (!done) {
    const std::size_t len = lengths[rng.below(lengths.size())];
    std::string line;
    for (std::size_t i = 0; i < len; ++i) {
      const bool use_bigram = started && !bigram[prev].empty();
      started = true;
      const std::uint32_t tok = use_bigram ? bigram[prev].draw(rng) : unigram_sampler.draw(rng);
      if (!line.empty()) line.push_back(' ');
      line += vocab[tok];
      prev = tok;
      if (total + line.size() + 1 >= spec.target_bytes) {
        done = true;
        break;
      }
    }
    total += line.size() + 1;
    out.push_back(std::move(line));
  }
  Provenance prov{"gen_text", spec.seed,
                  {{"target_bytes", std::to_string(spec.target_bytes)},
                   {"seed_tokens", std::to_string(unigram.size())}}};
  return Dataset(TextCorpus(std::move(out)), std::move(prov));
}

Dataset gen_graph(const GraphSpec& spec) {
  if (spec.vertices == 0) throw InvalidArgument("gen_graph: vertices must be positive");
  if (spec.edges == 0) throw InvalidArgument("gen_graph: edges must be positive");
  SplitMix64 rng(spec.seed);
  std::vector<Edge> edges;
  edges.reserve(spec.edges);
  Provenance prov{"gen_graph", spec.seed,
                  {{"vertices", std::to_string(spec.vertices)},
                   {"edges", std::to_string(spec.edges)},
                   {"directed", spec.directed ? "1" : "0"}}};
  if (spec.model == GraphModel::Uniform) {
    prov.parameters["model"] = "uniform";
    for (std::uint64_t i = 0; i < spec.edges; ++i) {
      const auto s = rng.below(spec.vertices);
      const auto t = rng.below(spec.vertices);
      edges.push_back({s, t});
    }
  } else {
    if (!is_power_of_two(spec.vertices)) {
      throw InvalidArgument("gen_graph: rmat needs a power-of-two vertex count, got " +
                            std::to_string(spec.vertices));
    }
    const auto& p = spec.rmat;
    if (p.a < 0 || p.b < 0 || p.c < 0 || p.d < 0 ||
        std::fabs(p.a + p.b + p.c + p.d - 1.0) > 1e-9) {
      throw InvalidArgument("gen_graph: rmat probabilities must be non-negative and sum to 1");
    }
    prov.parameters["model"] = "rmat:" + format_double(p.a) + "," + format_double(p.b) + "," +
                               format_double(p.c) + "," + format_double(p.d);
    const int levels = std::countr_zero(spec.vertices);
    const double ab = p.a + p.b, abc = p.a + p.b + p.c;
    for (std::uint64_t i = 0; i < spec.edges; ++i) {
      std::uint64_t s = 0, t = 0;
      for (int level = 0; level < levels; ++level) {
        const double r = rng.uniform();
        s <<= 1;
        t <<= 1;
        if (r < p.a) {
        } else if (r < ab) {
          t |= 1;
        } else if (r < abc) {
          s |= 1;
        } else {
          s |= 1;
          t |= 1;
        }
      }
      edges.push_back({s, t});
    }
  }
  return Dataset(Graph(spec.vertices, std::move(edges), spec.directed), std::move(prov));
}

Dataset gen_matrix(const MatrixSpec& spec) {
  if (spec.rows == 0 || spec.cols == 0) {
    throw InvalidArgument("gen_matrix: rows and cols must be positive");
  }
  auto values = draw_values(spec.rows * spec.cols, spec.dist, spec.seed);
  Provenance prov{"gen_matrix", spec.seed,
                  {{"rows", std::to_string(spec.rows)},
                   {"cols", std::to_string(spec.cols)},
                   {"dist", spec.dist.to_string()}}};
  return Dataset(Matrix(spec.rows, spec.cols, std::move(values)), std::move(prov));
}

Dataset gen_tensor(const TensorSpec& spec) {
  std::size_t n = 1;
  std::string shape;
  for (auto d : spec.shape) {
    if (d == 0) throw InvalidArgument("gen_tensor: dimensions must be positive");
    n *= d;
    shape += (shape.empty() ? "" : "x") + std::to_string(d);
  }
  if (spec.shape.empty()) throw InvalidArgument("gen_tensor: shape must be non-empty");
  auto values = draw_values(n, spec.dist, spec.seed);
  Provenance prov{"gen_tensor", spec.seed, {{"shape", shape}, {"dist", spec.dist.to_string()}}};
  return Dataset(Tensor(spec.shape, std::move(values)), std::move(prov));
}

OrderItemTables gen_table(const TableSpec& spec) {
  if (spec.order_rows == 0 || spec.item_rows == 0) {
    throw InvalidArgument("gen_table: row counts must be positive");
  }
  SplitMix64 rng(spec.seed);
  const std::uint64_t buyers = std::max<std::uint64_t>(1, spec.order_rows / 4);

  std::vector<Row> orders;
  orders.reserve(spec.order_rows);
  for (std::size_t i = 0; i < spec.order_rows; ++i) {
    orders.push_back({static_cast<std::int64_t>(i + 1),
                      static_cast<std::int64_t>(1 + rng.below(buyers)),
                      date_string(static_cast<int>(rng.below(365)))});
  }
  std::vector<Row> items;
  items.reserve(spec.item_rows);
  for (std::size_t j = 0; j < spec.item_rows; ++j) {
    const auto order_id = static_cast<std::int64_t>(1 + rng.below(spec.order_rows));
    const auto goods_id = static_cast<std::int64_t>(1 + rng.below(1000));
    const auto number = static_cast<std::int64_t>(1 + rng.below(10));
    const double price = static_cast<double>(1 + rng.below(99999)) / 100.0;
    items.push_back({static_cast<std::int64_t>(j + 1), order_id, goods_id, number, price,
                     static_cast<double>(number) * price});
  }
  const std::map<std::string, std::string> params{
      {"orders", std::to_string(spec.order_rows)}, {"items", std::to_string(spec.item_rows)}};
  Table order({{"order_id", ColumnKind::Integer},
               {"buyer_id", ColumnKind::Integer},
               {"create_date", ColumnKind::String}},
              std::move(orders));
  Table item({{"item_id", ColumnKind::Integer},
              {"order_id", ColumnKind::Integer},
              {"goods_id", ColumnKind::Integer},
              {"goods_number", ColumnKind::Integer},
              {"goods_price", ColumnKind::Real},
              {"goods_amount", ColumnKind::Real}},
             std::move(items));
  return {Dataset(std::move(order), Provenance{"gen_table.order", spec.seed, params}),
          Dataset(std::move(item), Provenance{"gen_table.item", spec.seed, params})};
}

std::vector<std::string> check_order_item(const Table& order, const Table& item,
                                          std::size_t limit) {
  std::vector<std::string> out;
  auto report = [&](std::string msg) {
    if (out.size() < limit) out.push_back(std::move(msg));
  };
  const std::vector<Column> order_schema{{"order_id", ColumnKind::Integer},
                                         {"buyer_id", ColumnKind::Integer},
                                         {"create_date", ColumnKind::String}};
  const std::vector<Column> item_schema{{"item_id", ColumnKind::Integer},
                                        {"order_id", ColumnKind::Integer},
                                        {"goods_id", ColumnKind::Integer},
                                        {"goods_number", ColumnKind::Integer},
                                        {"goods_price", ColumnKind::Real},
                                        {"goods_amount", ColumnKind::Real}};
  if (order.schema() != order_schema) report("ORDER schema does not match");
  if (item.schema() != item_schema) report("ITEM schema does not match");
  if (!out.empty()) return out;

  std::set<std::int64_t> order_ids;
  for (std::size_t r = 0; r < order.row_count(); ++r) {
    const auto id = std::get<std::int64_t>(order.rows()[r][0]);
    if (!order_ids.insert(id).second) report("ORDER row " + std::to_string(r + 1) +
                                             ": duplicate order_id " + std::to_string(id));
  }
  std::set<std::int64_t> item_ids;
  for (std::size_t r = 0; r < item.row_count(); ++r) {
    const auto& row = item.rows()[r];
    const auto id = std::get<std::int64_t>(row[0]);
    const auto fk = std::get<std::int64_t>(row[1]);
    const auto number = std::get<std::int64_t>(row[3]);
    const double price = std::get<double>(row[4]);
    const double amount = std::get<double>(row[5]);
    const std::string where = "ITEM row " + std::to_string(r + 1) + ": ";
    if (!item_ids.insert(id).second) report(where + "duplicate item_id " + std::to_string(id));
    if (!order_ids.count(fk)) report(where + "order_id " + std::to_string(fk) + " has no ORDER row");
    if (amount != static_cast<double>(number) * price) {
      report(where + "goods_amount differs from goods_number * goods_price");
    }
  }
  return out;
}

const TextCorpus& default_seed_corpus() {
  static const TextCorpus corpus({
      "the city library opened a new reading room on the north side of the river",
      "visitors can borrow books music and maps for up to three weeks at a time",
      "the river flows past the old mill and the market square before reaching the sea",
      "a small market opens every morning and sells bread fish fruit and flowers",
      "many people walk along the river in the evening when the air is cool",
      "the museum holds a collection of maps drawn by sailors who crossed the sea",
      "children learn to read in the library and play in the park near the mill",
      "the old bridge was built of stone and it still carries people across the river",
      "in winter the square is quiet but in summer it is full of music and light",
      "the school teaches history science and art to students from the whole city",
      "a train leaves the station every hour and travels along the coast to the north",
      "farmers bring fruit and grain to the market from the hills above the city",
      "the harbour is busy with boats that carry fish and goods to other towns",
      "scientists study the weather the sea and the birds that live along the coast",
      "the park has tall trees a lake and a path that leads up to the hills",
      "every year the city holds a festival with music food and stories in the square",
      "the newspaper reports on the market the school and the work of the city council",
      "at night the lights of the harbour can be seen from the hills above the town",
      "students read old letters in the museum to learn how people lived long ago",
      "the council plans to build a new school and a second bridge across the river",
      "travellers arrive by train and by boat and many of them stay near the square",
      "the bakery on the corner opens before the market and closes in the afternoon",
      "a map of the city shows the river the park the station and the old mill",
      "people in the city talk about the weather the festival and the price of bread",
  });
  return corpus;
}

namespace {

std::uint64_t get_u64(const std::map<std::string, std::string>& p, const std::string& key,
                      std::optional<std::uint64_t> def = {}) {
  auto it = p.find(key);
  if (it == p.end()) {
    if (def) return *def;
    throw InvalidArgument("generator: missing parameter '" + key + "'");
  }
  if (auto v = parse_uint64(it->second)) return *v;
  throw InvalidArgument("generator: parameter '" + key + "' must be a non-negative integer");
}

double get_real(const std::map<std::string, std::string>& p, const std::string& key,
                double def) {
  auto it = p.find(key);
  if (it == p.end()) return def;
  if (auto v = parse_double(it->second)) return *v;
  throw InvalidArgument("generator: parameter '" + key + "' must be a number");
}

void reject_unknown(const std::map<std::string, std::string>& p,
                    std::initializer_list<std::string_view> known, std::string_view kind) {
  for (const auto& [k, v] : p) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw InvalidArgument("generate." + std::string(kind) + ": unknown parameter '" + k + "'");
    }
  }
}

std::string get_str(const std::map<std::string, std::string>& p, const std::string& key,
                    std::string def) {
  auto it = p.find(key);
  return it == p.end() ? def : it->second;
}

}  // namespace

std::optional<PayloadKind> generator_kind(std::string_view name) {
  if (name == "text") return PayloadKind::Text;
  if (name == "graph") return PayloadKind::Graph;
  if (name == "matrix") return PayloadKind::Matrix;
  if (name == "tensor") return PayloadKind::Tensor;
  if (name == "table") return PayloadKind::Table;
  return std::nullopt;
}

GenRequest parse_gen_request(std::string_view kind,
                             const std::map<std::string, std::string>& p) {
  GenRequest req;
  if (kind == "text") {
    reject_unknown(p, {"bytes", "seed", "corpus"}, kind);
    req.spec = TextSpec{get_u64(p, "bytes"), get_u64(p, "seed", 0)};
    req.seed_corpus_path = get_str(p, "corpus", "");
  } else if (kind == "graph") {
    reject_unknown(p, {"vertices", "edges", "model", "a", "b", "c", "d", "directed", "seed"},
                   kind);
    GraphSpec g;
    g.vertices = get_u64(p, "vertices");
    g.edges = get_u64(p, "edges");
    const std::string model = get_str(p, "model", "rmat");
    if (model == "rmat") g.model = GraphModel::Rmat;
    else if (model == "uniform") g.model = GraphModel::Uniform;
    else throw InvalidArgument("generate.graph: model must be rmat or uniform");
    g.rmat = {get_real(p, "a", 0.57), get_real(p, "b", 0.19), get_real(p, "c", 0.19),
              get_real(p, "d", 0.05)};
    g.directed = get_u64(p, "directed", 1) != 0;
    g.seed = get_u64(p, "seed", 0);
    req.spec = g;
  } else if (kind == "matrix") {
    reject_unknown(p, {"rows", "cols", "dist", "seed"}, kind);
    req.spec = MatrixSpec{get_u64(p, "rows"), get_u64(p, "cols"),
                          Distribution::parse(get_str(p, "dist", "uniform")),
                          get_u64(p, "seed", 0)};
  } else if (kind == "tensor") {
    reject_unknown(p, {"shape", "dist", "seed"}, kind);
    TensorSpec t;
    for (auto part : split(get_str(p, "shape", ""), 'x')) {
      auto v = parse_uint64(trim(part));
      if (!v || *v == 0) {
        throw InvalidArgument("generate.tensor: shape must look like 4x8x8x3");
      }
      t.shape.push_back(*v);
    }
    t.dist = Distribution::parse(get_str(p, "dist", "uniform"));
    t.seed = get_u64(p, "seed", 0);
    req.spec = t;
  } else if (kind == "table") {
    reject_unknown(p, {"orders", "items", "table", "seed"}, kind);
    req.spec = TableSpec{get_u64(p, "orders"), get_u64(p, "items"), get_u64(p, "seed", 0)};
    req.table_role = get_str(p, "table", "item");
    if (req.table_role != "order" && req.table_role != "item") {
      throw InvalidArgument("generate.table: table must be order or item");
    }
  } else {
    throw InvalidArgument("unknown generator '" + std::string(kind) + "'");
  }
  return req;
}

PayloadKind gen_result_kind(const GenRequest& request) {
  return std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TextSpec>) return PayloadKind::Text;
        else if constexpr (std::is_same_v<T, GraphSpec>) return PayloadKind::Graph;
        else if constexpr (std::is_same_v<T, MatrixSpec>) return PayloadKind::Matrix;
        else if constexpr (std::is_same_v<T, TensorSpec>) return PayloadKind::Tensor;
        else return PayloadKind::Table;
      },
      request.spec);
}

Dataset run_gen_request(const GenRequest& request) {
  return std::visit(
      [&](const auto& s) -> Dataset {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TextSpec>) {
          if (request.seed_corpus_path.empty()) return gen_text(default_seed_corpus(), s);
          const Dataset seed = load_dataset(request.seed_corpus_path);
          return gen_text(seed.as<TextCorpus>(), s);
        } else if constexpr (std::is_same_v<T, GraphSpec>) {
          return gen_graph(s);
        } else if constexpr (std::is_same_v<T, MatrixSpec>) {
          return gen_matrix(s);
        } else if constexpr (std::is_same_v<T, TensorSpec>) {
          return gen_tensor(s);
        } else {
          auto tables = gen_table(s);
          return request.table_role == "order" ? tables.order : tables.item;
        }
      },
      request.spec);
}

}  // namespace motifbench::datagen
