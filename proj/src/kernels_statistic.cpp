// Statistic and Logic motifs.

#include <algorithm>
#include <cmath>
#include <map>

#include "motifbench/error.hpp"
#include "motifbench/kernels.hpp"
#include "motifbench/md5.hpp"
#include "motifbench/strings.hpp"

namespace motifbench::kernels {

namespace {

// Neumaier-compensated sum over long double.
class ExactSum {
 public:
  void add(long double v) {
    const long double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  long double value() const { return sum_ + comp_; }

 private:
  long double sum_ = 0;
  long double comp_ = 0;
};

// Calls fn(offsets) once per fibre along `axis`; offsets are flat indices.
template <typename Fn>
void for_each_fibre(const std::vector<std::size_t>& shape, std::size_t axis, Fn&& fn) {
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  const std::size_t len = shape[axis];
  std::vector<std::size_t> offsets(len);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      for (std::size_t k = 0; k < len; ++k) offsets[k] = (o * len + k) * inner + in;
      fn(offsets);
    }
  }
}

}  // namespace

KeyValueSet wordcount(const TextCorpus& input) {
  std::map<std::string, std::uint64_t> tally;
  for (const auto& d : input.documents()) {
    for (auto tok : split_whitespace(d)) ++tally[std::string(tok)];
  }
  std::map<std::string, std::string> out;
  for (auto& [k, v] : tally) out.emplace(k, std::to_string(v));
  return KeyValueSet(std::move(out));
}

Table aggregate(const Table& t, std::string_view group_column, Aggregation agg,
                std::string_view target_column) {
  const std::size_t g = t.column_index(group_column);
  std::optional<std::size_t> target;
  if (agg != Aggregation::Count) {
    target = t.column_index(target_column);
    if (t.schema()[*target].kind == ColumnKind::String) {
      throw InvalidArgument("aggregate: target column '" + std::string(target_column) +
                            "' is not numeric");
    }
  }
  struct Acc {
    std::int64_t count = 0;
    ExactSum sum;
  };
  auto less = [](const Value& a, const Value& b) { return a < b; };
  std::map<Value, Acc, decltype(less)> groups(less);
  for (const auto& row : t.rows()) {
    Acc& acc = groups[row[g]];
    ++acc.count;
    if (target) {
      const Value& v = row[*target];
      if (auto* i = std::get_if<std::int64_t>(&v)) acc.sum.add(static_cast<long double>(*i));
      else acc.sum.add(std::get<double>(v));
    }
  }
  std::vector<Column> schema{t.schema()[g]};
  switch (agg) {
    case Aggregation::Count: schema.push_back({"count", ColumnKind::Integer}); break;
    case Aggregation::Sum: schema.push_back({"sum", ColumnKind::Real}); break;
    case Aggregation::Avg: schema.push_back({"avg", ColumnKind::Real}); break;
  }
  if (schema[0].name == schema[1].name) schema[0].name += "_key";
  std::vector<Row> rows;
  for (const auto& [key, acc] : groups) {
    Row r{key};
    switch (agg) {
      case Aggregation::Count: r.emplace_back(acc.count); break;
      case Aggregation::Sum: r.emplace_back(static_cast<double>(acc.sum.value())); break;
      case Aggregation::Avg:
        r.emplace_back(static_cast<double>(acc.sum.value() / acc.count));
        break;
    }
    rows.push_back(std::move(r));
  }
  return Table(std::move(schema), std::move(rows));
}

Tensor batch_norm(const Tensor& x, std::size_t axis, double epsilon) {
  if (axis >= x.rank()) {
    throw InvalidArgument("batch_norm: axis " + std::to_string(axis) +
                          " out of range for rank " + std::to_string(x.rank()));
  }
  if (!(epsilon >= 0)) throw InvalidArgument("batch_norm: epsilon must be non-negative");
  const auto in = x.data();
  std::vector<double> out(in.size());
  for_each_fibre(x.shape(), axis, [&](const std::vector<std::size_t>& idx) {
    const double n = static_cast<double>(idx.size());
    ExactSum s;
    for (auto i : idx) s.add(in[i]);
    const double mean = static_cast<double>(s.value() / idx.size());
    ExactSum ss;
    for (auto i : idx) {
      const long double d = in[i] - mean;
      ss.add(d * d);
    }
    const double var = static_cast<double>(ss.value()) / n;
    const double denom = std::sqrt(var + epsilon);
    const double inv = denom > 0 ? 1.0 / denom : 0.0;
    for (auto i : idx) out[i] = (in[i] - mean) * inv;
  });
  return Tensor(x.shape(), std::move(out));
}

Tensor cosine_norm(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) {
    throw InvalidArgument("cosine_norm: axis " + std::to_string(axis) +
                          " out of range for rank " + std::to_string(x.rank()));
  }
  const auto in = x.data();
  std::vector<double> out(in.size());
  for_each_fibre(x.shape(), axis, [&](const std::vector<std::size_t>& idx) {
    ExactSum ss;
    for (auto i : idx) ss.add(static_cast<long double>(in[i]) * in[i]);
    const double norm = std::sqrt(static_cast<double>(ss.value()));
    if (!(norm > 0)) throw InvalidArgument("cosine_norm: zero-norm slice");
    for (auto i : idx) out[i] = in[i] / norm;
  });
  return Tensor(x.shape(), std::move(out));
}

CountResult count_records(const Payload& p, std::optional<double> abs_above) {
  auto count_cells = [&](std::span<const double> cells) {
    CountResult r{0, cells.size()};
    for (double v : cells) r.count += !abs_above || std::fabs(v) > *abs_above;
    return r;
  };
  if (auto* m = std::get_if<Matrix>(&p)) return count_cells(m->data());
  if (auto* t = std::get_if<Tensor>(&p)) return count_cells(t->data());
  if (abs_above) {
    throw InvalidArgument("count: abs_above applies only to matrix or tensor payloads");
  }
  std::uint64_t n = std::visit(
      [](const auto& v) -> std::uint64_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, TextCorpus>) return v.size();
        else if constexpr (std::is_same_v<T, Table>) return v.row_count();
        else if constexpr (std::is_same_v<T, Graph>) return v.edges().size();
        else if constexpr (std::is_same_v<T, KeyValueSet>) return v.size();
        else return 0;
      },
      p);
  return {n, n};
}

Table column_summary(const Matrix& m) {
  std::vector<Column> schema{{"column", ColumnKind::Integer}, {"count", ColumnKind::Integer},
                             {"sum", ColumnKind::Real},       {"mean", ColumnKind::Real},
                             {"min", ColumnKind::Real},       {"max", ColumnKind::Real},
                             {"stddev", ColumnKind::Real}};
  std::vector<Row> rows;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    ExactSum s;
    double lo = m.at(0, c), hi = m.at(0, c);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      s.add(m.at(r, c));
      lo = std::min(lo, m.at(r, c));
      hi = std::max(hi, m.at(r, c));
    }
    const double mean = static_cast<double>(s.value() / m.rows());
    ExactSum ss;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const long double d = m.at(r, c) - mean;
      ss.add(d * d);
    }
    const double sd = std::sqrt(static_cast<double>(ss.value() / m.rows()));
    rows.push_back({static_cast<std::int64_t>(c), static_cast<std::int64_t>(m.rows()),
                    static_cast<double>(s.value()), mean, lo, hi, sd});
  }
  return Table(std::move(schema), std::move(rows));
}

TextCorpus md5_digest(const TextCorpus& input) {
  std::vector<std::string> out;
  out.reserve(input.size());
  for (const auto& d : input.documents()) out.push_back(to_hex(md5(d)));
  return TextCorpus(std::move(out));
}

namespace {

std::vector<double> activate(std::span<const double> in, Activation fn) {
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double v = in[i];
    switch (fn) {
      case Activation::Relu: out[i] = v > 0 ? v : 0.0; break;
      case Activation::Sigmoid: out[i] = 1.0 / (1.0 + std::exp(-v)); break;
      case Activation::Tanh: out[i] = std::tanh(v); break;
    }
  }
  return out;
}

}  // namespace

Tensor elementwise_activation(const Tensor& x, Activation fn) {
  return Tensor(x.shape(), activate(x.data(), fn));
}

Matrix elementwise_activation(const Matrix& x, Activation fn) {
  return Matrix(x.rows(), x.cols(), activate(x.data(), fn));
}

}  // namespace motifbench::kernels
