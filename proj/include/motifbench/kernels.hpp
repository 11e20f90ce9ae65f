#pragma once

// The eight data motifs as deterministic kernels. Every kernel is a pure
// function of its inputs, parameters and (where present) seed.

#include <cstddef>
#include <cstdint>
#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motifbench/dataset.hpp"

namespace motifbench::kernels {

// ---- Sort ------------------------------------------------------------------

// Stable, non-decreasing. For text the key is a whitespace-field index
// (lines without that field sort as empty); no key compares whole lines.
TextCorpus sort_records(const TextCorpus& input, std::optional<std::size_t> key = {});
// Rows ordered by the key column.
Table sort_records(const Table& input, std::size_t key);
Matrix sort_records(const Matrix& input, std::size_t key);

// ---- Set -------------------------------------------------------------------

// Lines containing `pattern` as a literal substring, in input order.
TextCorpus grep(const TextCorpus& input, std::string_view pattern);

enum class SetOp { Union, Intersect, Difference };
// On union collisions the value from `a` wins; intersect keeps `a`'s values.
KeyValueSet set_op(const KeyValueSet& a, const KeyValueSet& b, SetOp op);

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

// `column OP literal`. Numeric columns compare numerically; string columns
// lexicographically.
struct Predicate {
  std::string column;
  CompareOp op = CompareOp::Eq;
  std::string literal;
};

// Parses "goods_number >= 3", "buyer_id!=7", "create_date<2017-06-01".
// A quoted literal keeps its inner text verbatim.
Predicate parse_predicate(std::string_view text);

using RowPredicate = std::function<bool(const Row&)>;
// Binds a predicate to a schema. Throws on an unknown column or a literal that
// does not parse as the column kind.
RowPredicate bind_predicate(const Table& table, const Predicate& p);

Table project(const Table& t, std::span<const std::string> columns);
Table filter(const Table& t, const RowPredicate& keep);
Table filter(const Table& t, const Predicate& keep);
// SQL-style SELECT: rows satisfying `where` (all rows when absent), then the
// named columns (all columns when empty).
Table select(const Table& t, const std::optional<Predicate>& where,
             std::span<const std::string> columns = {});
// Bag union; schemas must be identical.
Table union_all(const Table& a, const Table& b);

// ---- Statistic ---------------------------------------------------------------

// Whitespace-token counts; values are decimal strings.
KeyValueSet wordcount(const TextCorpus& input);

enum class Aggregation { Count, Sum, Avg };
// One row per distinct group key, ordered by key. Output columns are the group
// column plus `count` (integer), `sum` or `avg` (real).
Table aggregate(const Table& t, std::string_view group_column, Aggregation agg,
                std::string_view target_column = {});

// Normalises each fibre along `axis` (elements differing only in that index)
// to zero mean and unit population variance: (x - mean) / sqrt(var + epsilon).
Tensor batch_norm(const Tensor& x, std::size_t axis, double epsilon);
// Scales each fibre along `axis` to unit L2 norm. Throws on a zero fibre.
Tensor cosine_norm(const Tensor& x, std::size_t axis);

// Record count (lines, rows, edges, entries, or numeric cells). With
// `abs_above`, only numeric cells with |v| > abs_above are counted.
struct CountResult {
  std::uint64_t count = 0;
  std::uint64_t total = 0;
};
CountResult count_records(const Payload& p, std::optional<double> abs_above = {});

// Per-column count/sum/mean/min/max/stddev (population) of a matrix.
Table column_summary(const Matrix& m);

// ---- Logic -------------------------------------------------------------------

// One lower-case hex MD5 per document.
TextCorpus md5_digest(const TextCorpus& input);

enum class Activation { Relu, Sigmoid, Tanh };
Tensor elementwise_activation(const Tensor& x, Activation fn);
Matrix elementwise_activation(const Matrix& x, Activation fn);

// ---- Matrix ------------------------------------------------------------------

Matrix matmul(const Matrix& a, const Matrix& b);

enum class ElementwiseOp { Add, Subtract, Hadamard };
Matrix mat_elementwise(const Matrix& a, const Matrix& b, ElementwiseOp op);

// y = x.w + bias. `x` has shape [batch, ...]; trailing dimensions are
// flattened and must multiply to w.rows(). `bias` has shape [w.cols()].
Tensor fully_connected(const Tensor& x, const Matrix& w, const Tensor& bias);

// ---- Sampling ----------------------------------------------------------------

// Keeps each record independently with probability `fraction`.
TextCorpus random_sample(const TextCorpus& input, double fraction, std::uint64_t seed);
Table random_sample(const Table& input, double fraction, std::uint64_t seed);

enum class PoolMode { Max, Avg };
// x is [batch, h, w, c]; output spatial dims are (dim - window) / stride + 1.
Tensor pool(const Tensor& x, std::size_t window, std::size_t stride, PoolMode mode);

// Every factor-th row and column, starting at (0, 0).
Matrix downsample(const Matrix& m, std::size_t factor);

// Inverted dropout: survivors are scaled by 1 / (1 - p). p = 1 zeroes all.
Tensor dropout(const Tensor& x, double p, std::uint64_t seed);

// ---- Transform ---------------------------------------------------------------

enum class Padding { Valid, Same };
// Cross-correlation. x is [batch, h, w, c_in], k is [kh, kw, c_in, c_out].
// Same padding follows the usual convention: out = ceil(in / stride), with
// the smaller half of the padding before.
Tensor convolution(const Tensor& x, const Tensor& k, std::size_t stride, Padding padding);

// Zeroes every coefficient whose circular frequency index exceeds `cutoff`
// in either dimension. cutoff >= dim/2 keeps everything.
void lowpass(std::vector<std::complex<double>>& plane, std::size_t rows,
             std::size_t cols, std::size_t cutoff);

// ---- Graph -------------------------------------------------------------------

// Edges treated as undirected; each vertex is labelled with the smallest
// vertex id in its component.
std::vector<std::uint64_t> connected_components(const Graph& g);

struct PageRankOptions {
  double damping = 0.85;
  std::size_t max_iters = 100;
  double tolerance = 1e-12;  // L1 change between iterations
};

struct PageRankResult {
  std::vector<double> scores;
  std::size_t iterations = 0;
};

// Power iteration with uniform teleport; mass of vertices without out-edges is
// spread uniformly. Undirected edges count in both directions. Parallel edges
// and self-loops count with multiplicity.
PageRankResult pagerank(const Graph& g, const PageRankOptions& options = {});

}  // namespace motifbench::kernels
