#pragma once

// Seeded, scalable data generators. Every generator is a pure function of its
// spec: the same spec yields a checksum-identical dataset on any platform.

#include <cstdint>
#include <optional>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "motifbench/dataset.hpp"

namespace motifbench::datagen {

struct Distribution {
  enum class Kind { Uniform, Gaussian };
  Kind kind = Kind::Uniform;
  double a = 0.0;  // lo or mu
  double b = 1.0;  // hi or sigma

  static Distribution uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static Distribution gaussian(double mu, double sigma) { return {Kind::Gaussian, mu, sigma}; }
  // "uniform:LO,HI" or "gaussian:MU,SIGMA"; bare "uniform" is [0,1),
  // bare "gaussian" is N(0,1).
  static Distribution parse(std::string_view text);
  std::string to_string() const;
};

struct RmatParams {
  double a = 0.57;
  double b = 0.19;
  double c = 0.19;
  double d = 0.05;
};

enum class GraphModel { Rmat, Uniform };

struct TextSpec {
  std::uint64_t target_bytes = 0;
  std::uint64_t seed = 0;
};

struct GraphSpec {
  std::uint64_t vertices = 0;
  std::uint64_t edges = 0;
  GraphModel model = GraphModel::Rmat;
  RmatParams rmat;
  bool directed = true;
  std::uint64_t seed = 0;
};

struct MatrixSpec {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Distribution dist;
  std::uint64_t seed = 0;
};

struct TensorSpec {
  std::vector<std::size_t> shape;
  Distribution dist;
  std::uint64_t seed = 0;
};

struct TableSpec {
  std::size_t order_rows = 0;
  std::size_t item_rows = 0;
  std::uint64_t seed = 0;
};

// Bigram model over the seed corpus read as one cyclic token stream; the
// chain carries across document breaks and falls back to unigrams only for
// the first token. Output size is the first token boundary at or past
// target_bytes, counting one LF per document. Throws InvalidArgument when the
// seed corpus has no tokens or target_bytes is zero.
Dataset gen_text(const TextCorpus& seed_corpus, const TextSpec& spec);

// Exactly spec.edges edges. RMAT needs a power-of-two vertex count and
// (a, b, c, d) non-negative summing to 1 within 1e-9.
Dataset gen_graph(const GraphSpec& spec);

// i.i.d. entries. Throws for hi < lo or sigma <= 0.
Dataset gen_matrix(const MatrixSpec& spec);
Dataset gen_tensor(const TensorSpec& spec);

struct OrderItemTables {
  Dataset order;
  Dataset item;
};

// ORDER(order_id, buyer_id, create_date) and
// ITEM(item_id, order_id, goods_id, goods_number, goods_price, goods_amount)
// with every ITEM.order_id resolving to an ORDER row and
// goods_amount == goods_number * goods_price.
OrderItemTables gen_table(const TableSpec& spec);

// Schema, key uniqueness, foreign-key and amount checks for an ORDER/ITEM
// pair. Empty when everything holds; otherwise at most `limit` messages.
std::vector<std::string> check_order_item(const Table& order, const Table& item,
                                          std::size_t limit = 20);

// Built-in English seed text used when no seed corpus is supplied.
const TextCorpus& default_seed_corpus();

// A generator request as written in a workload spec:
//   generate.<kind>(key=value, ...)
// Keys: text: bytes, seed, corpus (path)
//       graph: vertices, edges, model (rmat|uniform), a, b, c, d, directed, seed
//       matrix: rows, cols, dist, seed        tensor: shape (e.g. 4x8x8x3), dist, seed
//       table: orders, items, table (order|item), seed
using GenSpec = std::variant<TextSpec, GraphSpec, MatrixSpec, TensorSpec, TableSpec>;

struct GenRequest {
  GenSpec spec;
  std::string seed_corpus_path;  // text only; empty means built-in
  std::string table_role;        // table only: "order" or "item"
};

// Throws InvalidArgument naming the offending key.
GenRequest parse_gen_request(std::string_view kind,
                             const std::map<std::string, std::string>& params);
PayloadKind gen_result_kind(const GenRequest& request);
Dataset run_gen_request(const GenRequest& request);

// Kind of a generator name ("text", "graph", ...), or nullopt.
std::optional<PayloadKind> generator_kind(std::string_view name);

}  // namespace motifbench::datagen
