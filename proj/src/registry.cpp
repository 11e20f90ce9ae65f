#include "motifbench/registry.hpp"

#include <algorithm>
#include <cmath>

#include "motifbench/error.hpp"
#include "motifbench/fft.hpp"
#include "motifbench/kernels.hpp"
#include "motifbench/strings.hpp"

namespace motifbench {

namespace {

using K = PayloadKind;
namespace kn = kernels;

ParamSpec integer_param(std::string name, std::optional<std::string> def, double lo,
                        double hi = std::numeric_limits<double>::infinity()) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamType::Integer;
  p.default_value = std::move(def);
  p.min = lo;
  p.max = hi;
  return p;
}

ParamSpec real_param(std::string name, std::optional<std::string> def, double lo,
                     double hi = std::numeric_limits<double>::infinity()) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamType::Real;
  p.default_value = std::move(def);
  p.min = lo;
  p.max = hi;
  return p;
}

ParamSpec string_param(std::string name, std::optional<std::string> def,
                       std::vector<std::string> choices = {}) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamType::String;
  p.default_value = std::move(def);
  p.choices = std::move(choices);
  return p;
}

ParamSpec required(ParamSpec p) {
  p.required = true;
  p.default_value.reset();
  return p;
}

std::vector<std::string> column_list(std::string_view text) {
  std::vector<std::string> out;
  for (auto part : split(text, ',')) {
    auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::size_t axis_param(const ParamReader& p, const Tensor& t) {
  const auto axis = p.optional_integer("axis");
  const std::int64_t a = axis ? *axis : static_cast<std::int64_t>(t.rank()) - 1;
  if (a < 0 || static_cast<std::size_t>(a) >= t.rank()) {
    throw InvalidArgument("axis " + std::to_string(a) + " out of range for rank " +
                          std::to_string(t.rank()));
  }
  return static_cast<std::size_t>(a);
}

Payload activation(const Dataset& d, kn::Activation fn) {
  if (d.kind() == K::Matrix) return kn::elementwise_activation(d.as<Matrix>(), fn);
  return kn::elementwise_activation(d.as<Tensor>(), fn);
}

// [n x 2] matrix of (vertex, value) rows.
Matrix vertex_table(std::span<const double> values) {
  std::vector<double> data;
  data.reserve(2 * values.size());
  for (std::size_t v = 0; v < values.size(); ++v) {
    data.push_back(static_cast<double>(v));
    data.push_back(values[v]);
  }
  return Matrix(values.size(), 2, std::move(data));
}

std::vector<KernelInfo> build_registry() {
  std::vector<KernelInfo> r;
  auto add = [&r](Family f, std::string name, std::string summary,
                  std::vector<std::vector<PayloadKind>> operands,
                  std::optional<PayloadKind> output, std::vector<ParamSpec> params,
                  std::function<Payload(std::span<const Dataset>, const ParamReader&)> run) {
    r.push_back(KernelInfo{MotifId{f, std::move(name)}, std::move(summary),
                           std::move(operands), output, std::move(params), std::move(run)});
  };

  // Matrix. Sigmoid and Tanh are catalogued here, next to Fully Connected.
  add(Family::Matrix, "matmul", "dense matrix product", {{K::Matrix}, {K::Matrix}}, K::Matrix,
      {}, [](auto ops, const auto&) -> Payload {
        return kn::matmul(ops[0].template as<Matrix>(), ops[1].template as<Matrix>());
      });
  for (auto [name, op] : {std::pair{"add", kn::ElementwiseOp::Add},
                          std::pair{"subtract", kn::ElementwiseOp::Subtract},
                          std::pair{"hadamard", kn::ElementwiseOp::Hadamard}}) {
    add(Family::Matrix, name, std::string("elementwise ") + name, {{K::Matrix}, {K::Matrix}},
        K::Matrix, {}, [op = op](auto ops, const auto&) -> Payload {
          return kn::mat_elementwise(ops[0].template as<Matrix>(),
                                     ops[1].template as<Matrix>(), op);
        });
  }
  add(Family::Matrix, "fully_connected", "y = x.w + bias",
      {{K::Tensor}, {K::Matrix}, {K::Tensor}}, K::Tensor, {},
      [](auto ops, const auto&) -> Payload {
        return kn::fully_connected(ops[0].template as<Tensor>(), ops[1].template as<Matrix>(),
                                   ops[2].template as<Tensor>());
      });
  add(Family::Matrix, "sigmoid", "logistic activation", {{K::Tensor, K::Matrix}}, std::nullopt,
      {}, [](auto ops, const auto&) { return activation(ops[0], kn::Activation::Sigmoid); });
  add(Family::Matrix, "tanh", "hyperbolic tangent activation", {{K::Tensor, K::Matrix}},
      std::nullopt, {},
      [](auto ops, const auto&) { return activation(ops[0], kn::Activation::Tanh); });

  // Sampling.
  add(Family::Sampling, "random_sample", "keep each record with probability `fraction`",
      {{K::Text, K::Table}}, std::nullopt,
      {required(real_param("fraction", {}, 0.0, 1.0)), integer_param("seed", "0", 0)},
      [](auto ops, const ParamReader& p) -> Payload {
        const auto seed = static_cast<std::uint64_t>(p.integer("seed"));
        if (ops[0].kind() == K::Text) {
          return kn::random_sample(ops[0].template as<TextCorpus>(), p.real("fraction"), seed);
        }
        return kn::random_sample(ops[0].template as<Table>(), p.real("fraction"), seed);
      });
  for (auto [name, mode] : {std::pair{"max_pool", kn::PoolMode::Max},
                            std::pair{"avg_pool", kn::PoolMode::Avg}}) {
    add(Family::Sampling, name, "spatial pooling over [batch,h,w,c]", {{K::Tensor}},
        K::Tensor, {integer_param("window", "2", 1), integer_param("stride", {}, 1)},
        [mode = mode](auto ops, const ParamReader& p) -> Payload {
          const auto window = static_cast<std::size_t>(p.integer("window"));
          const auto stride = p.optional_integer("stride");
          return kn::pool(ops[0].template as<Tensor>(), window,
                          stride ? static_cast<std::size_t>(*stride) : window, mode);
        });
  }
  add(Family::Sampling, "downsample", "every factor-th row and column", {{K::Matrix}},
      K::Matrix, {integer_param("factor", "2", 1)},
      [](auto ops, const ParamReader& p) -> Payload {
        return kn::downsample(ops[0].template as<Matrix>(),
                              static_cast<std::size_t>(p.integer("factor")));
      });
  add(Family::Sampling, "dropout", "inverted dropout", {{K::Tensor}}, K::Tensor,
      {real_param("p", "0.5", 0.0, 1.0), integer_param("seed", "0", 0)},
      [](auto ops, const ParamReader& p) -> Payload {
        return kn::dropout(ops[0].template as<Tensor>(), p.real("p"),
                           static_cast<std::uint64_t>(p.integer("seed")));
      });

  // Transform. Convolution is catalogued here.
  for (bool inverse : {false, true}) {
    add(Family::Transform, inverse ? "ifft" : "fft",
        inverse ? "inverse radix-2 FFT (1/n scaled)" : "radix-2 FFT", {{K::Tensor}}, K::Tensor,
        {}, [inverse](auto ops, const auto&) -> Payload {
          return to_tensor(fft(complex_sequence(ops[0].template as<Tensor>()), inverse));
        });
  }
  add(Family::Transform, "fft2d", "2-D FFT of a real plane to [rows,cols,2]", {{K::Matrix}},
      K::Tensor, {}, [](auto ops, const auto&) -> Payload {
        return to_tensor(fft2d(ops[0].template as<Matrix>()));
      });
  add(Family::Transform, "ifft2d", "inverse 2-D FFT, real part, optional low-pass",
      {{K::Tensor}}, K::Matrix, {integer_param("cutoff", {}, 0)},
      [](auto ops, const ParamReader& p) -> Payload {
        ComplexMatrix m = complex_matrix(ops[0].template as<Tensor>());
        if (auto cutoff = p.optional_integer("cutoff")) {
          kn::lowpass(m.data, m.rows, m.cols, static_cast<std::size_t>(*cutoff));
        }
        const ComplexMatrix back = fft2d(m, true);
        std::vector<double> real(back.data.size());
        for (std::size_t i = 0; i < real.size(); ++i) real[i] = back.data[i].real();
        return Matrix(back.rows, back.cols, std::move(real));
      });
  add(Family::Transform, "convolution", "direct 2-D cross-correlation",
      {{K::Tensor}, {K::Tensor}}, K::Tensor,
      {integer_param("stride", "1", 1), string_param("padding", "valid", {"valid", "same"})},
      [](auto ops, const ParamReader& p) -> Payload {
        return kn::convolution(ops[0].template as<Tensor>(), ops[1].template as<Tensor>(),
                               static_cast<std::size_t>(p.integer("stride")),
                               p.string("padding") == "same" ? kn::Padding::Same
                                                             : kn::Padding::Valid);
      });

  // Graph.
  add(Family::Graph, "connected_components", "(vertex, min-id label) rows", {{K::Graph}},
      K::Matrix, {}, [](auto ops, const auto&) -> Payload {
        const auto labels = kn::connected_components(ops[0].template as<Graph>());
        std::vector<double> v(labels.begin(), labels.end());
        return vertex_table(v);
      });
  add(Family::Graph, "pagerank", "(vertex, score) rows", {{K::Graph}}, K::Matrix,
      {real_param("damping", "0.85", 0.0, 1.0), integer_param("max_iters", "100", 1),
       real_param("tol", "1e-12", 0.0)},
      [](auto ops, const ParamReader& p) -> Payload {
        kn::PageRankOptions o;
        o.damping = p.real("damping");
        o.max_iters = static_cast<std::size_t>(p.integer("max_iters"));
        o.tolerance = p.real("tol");
        return vertex_table(kn::pagerank(ops[0].template as<Graph>(), o).scores);
      });

  // Logic. Relu is catalogued here.
  add(Family::Logic, "md5", "hex MD5 digest per document", {{K::Text}}, K::Text, {},
      [](auto ops, const auto&) -> Payload {
        return kn::md5_digest(ops[0].template as<TextCorpus>());
      });
  add(Family::Logic, "relu", "max(0, v)", {{K::Tensor, K::Matrix}}, std::nullopt, {},
      [](auto ops, const auto&) { return activation(ops[0], kn::Activation::Relu); });

  // Set.
  add(Family::Set, "grep", "lines containing a literal pattern", {{K::Text}}, K::Text,
      {required(string_param("pattern", {}))}, [](auto ops, const ParamReader& p) -> Payload {
        return kn::grep(ops[0].template as<TextCorpus>(), p.string("pattern"));
      });
  add(Family::Set, "set_op", "key-set union / intersect / difference", {{K::KeyValue}, {K::KeyValue}},
      K::KeyValue, {string_param("op", "union", {"union", "intersect", "difference"})},
      [](auto ops, const ParamReader& p) -> Payload {
        const auto op = p.string("op");
        return kn::set_op(ops[0].template as<KeyValueSet>(), ops[1].template as<KeyValueSet>(),
                          op == "union"       ? kn::SetOp::Union
                          : op == "intersect" ? kn::SetOp::Intersect
                                              : kn::SetOp::Difference);
      });
  add(Family::Set, "project", "keep the listed columns", {{K::Table}}, K::Table,
      {required(string_param("columns", {}))}, [](auto ops, const ParamReader& p) -> Payload {
        const auto cols = column_list(p.string("columns"));
        return kn::project(ops[0].template as<Table>(), cols);
      });
  add(Family::Set, "filter", "rows satisfying `where`", {{K::Table}}, K::Table,
      {required(string_param("where", {}))}, [](auto ops, const ParamReader& p) -> Payload {
        return kn::filter(ops[0].template as<Table>(), kn::parse_predicate(p.string("where")));
      });
  add(Family::Set, "select", "SQL-style select: optional where, optional columns",
      {{K::Table}}, K::Table, {string_param("where", {}), string_param("columns", {})},
      [](auto ops, const ParamReader& p) -> Payload {
        std::optional<kn::Predicate> where;
        if (p.has("where")) where = kn::parse_predicate(p.string("where"));
        std::vector<std::string> cols;
        if (p.has("columns")) cols = column_list(p.string("columns"));
        return kn::select(ops[0].template as<Table>(), where, cols);
      });
  add(Family::Set, "union", "bag union of identically-typed tables", {{K::Table}, {K::Table}},
      K::Table, {}, [](auto ops, const auto&) -> Payload {
        return kn::union_all(ops[0].template as<Table>(), ops[1].template as<Table>());
      });

  // Sort.
  add(Family::Sort, "sort", "stable non-decreasing sort by key",
      {{K::Text, K::Table, K::Matrix}}, std::nullopt,
      {integer_param("key", {}, 0), string_param("column", {})},
      [](auto ops, const ParamReader& p) -> Payload {
        const auto key = p.optional_integer("key");
        switch (ops[0].kind()) {
          case K::Text: {
            std::optional<std::size_t> k;
            if (key) k = static_cast<std::size_t>(*key);
            return kn::sort_records(ops[0].template as<TextCorpus>(), k);
          }
          case K::Table: {
            const auto& t = ops[0].template as<Table>();
            const std::size_t k = p.has("column") ? t.column_index(p.string("column"))
                                                  : static_cast<std::size_t>(key.value_or(0));
            return kn::sort_records(t, k);
          }
          default:
            return kn::sort_records(ops[0].template as<Matrix>(),
                                    static_cast<std::size_t>(key.value_or(0)));
        }
      });

  // Statistic.
  add(Family::Statistic, "wordcount", "token -> count", {{K::Text}}, K::KeyValue, {},
      [](auto ops, const auto&) -> Payload {
        return kn::wordcount(ops[0].template as<TextCorpus>());
      });
  add(Family::Statistic, "aggregate", "group-by count / sum / avg", {{K::Table}}, K::Table,
      {required(string_param("group", {})), string_param("agg", "count", {"count", "sum", "avg"}),
       string_param("target", {})},
      [](auto ops, const ParamReader& p) -> Payload {
        const auto agg = p.string("agg");
        const auto kind = agg == "count" ? kn::Aggregation::Count
                          : agg == "sum" ? kn::Aggregation::Sum
                                         : kn::Aggregation::Avg;
        if (kind != kn::Aggregation::Count && !p.has("target")) {
          throw InvalidArgument("aggregate: agg=" + agg + " needs target=<column>");
        }
        return kn::aggregate(ops[0].template as<Table>(), p.string("group"), kind,
                             p.has("target") ? p.string("target") : std::string());
      });
  add(Family::Statistic, "batch_norm", "zero-mean unit-variance per fibre", {{K::Tensor}},
      K::Tensor, {integer_param("axis", "0", 0), real_param("epsilon", "1e-5", 0.0)},
      [](auto ops, const ParamReader& p) -> Payload {
        const auto& t = ops[0].template as<Tensor>();
        return kn::batch_norm(t, axis_param(p, t), p.real("epsilon"));
      });
  add(Family::Statistic, "cosine_norm", "unit L2 norm per fibre (default last axis)",
      {{K::Tensor}}, K::Tensor, {integer_param("axis", {}, 0)},
      [](auto ops, const ParamReader& p) -> Payload {
        const auto& t = ops[0].template as<Tensor>();
        return kn::cosine_norm(t, axis_param(p, t));
      });
  add(Family::Statistic, "count", "record count as {count, total}",
      {{K::Text, K::Table, K::Matrix, K::Tensor, K::Graph, K::KeyValue}}, K::KeyValue,
      {real_param("abs_above", {}, 0.0)}, [](auto ops, const ParamReader& p) -> Payload {
        const auto r = kn::count_records(ops[0].payload(), p.optional_real("abs_above"));
        return KeyValueSet({{"count", std::to_string(r.count)},
                            {"total", std::to_string(r.total)}});
      });
  add(Family::Statistic, "summary", "per-column count/sum/mean/min/max/stddev",
      {{K::Matrix}}, K::Table, {}, [](auto ops, const auto&) -> Payload {
        return kn::column_summary(ops[0].template as<Matrix>());
      });
  return r;
}

const ParamSpec* find_spec(const std::vector<ParamSpec>& specs, std::string_view name) {
  for (const auto& s : specs) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Matrix: return "matrix";
    case Family::Sampling: return "sampling";
    case Family::Transform: return "transform";
    case Family::Graph: return "graph";
    case Family::Logic: return "logic";
    case Family::Set: return "set";
    case Family::Sort: return "sort";
    case Family::Statistic: return "statistic";
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view name) {
  for (auto f : kAllFamilies) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

std::string MotifId::name() const { return std::string(family_name(family)) + "." + kernel; }

std::optional<MotifId> MotifId::parse(std::string_view text) {
  const auto dot = text.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  auto fam = parse_family(text.substr(0, dot));
  if (!fam || dot + 1 >= text.size()) return std::nullopt;
  return MotifId{*fam, std::string(text.substr(dot + 1))};
}

std::optional<std::string> ParamReader::lookup(std::string_view name) const {
  if (auto it = raw_.find(std::string(name)); it != raw_.end()) return it->second;
  if (const auto* s = find_spec(specs_, name)) return s->default_value;
  return std::nullopt;
}

bool ParamReader::has(std::string_view name) const { return lookup(name).has_value(); }

std::int64_t ParamReader::integer(std::string_view name) const {
  if (auto v = optional_integer(name)) return *v;
  throw InvalidArgument("missing parameter '" + std::string(name) + "'");
}

double ParamReader::real(std::string_view name) const {
  if (auto v = optional_real(name)) return *v;
  throw InvalidArgument("missing parameter '" + std::string(name) + "'");
}

std::string ParamReader::string(std::string_view name) const {
  if (auto v = lookup(name)) return *v;
  throw InvalidArgument("missing parameter '" + std::string(name) + "'");
}

std::optional<std::int64_t> ParamReader::optional_integer(std::string_view name) const {
  auto raw = lookup(name);
  if (!raw) return std::nullopt;
  if (auto v = parse_int64(*raw)) return v;
  throw InvalidArgument("parameter '" + std::string(name) + "': '" + *raw +
                        "' is not an integer");
}

std::optional<double> ParamReader::optional_real(std::string_view name) const {
  auto raw = lookup(name);
  if (!raw) return std::nullopt;
  if (auto v = parse_double(*raw); v && std::isfinite(*v)) return v;
  throw InvalidArgument("parameter '" + std::string(name) + "': '" + *raw +
                        "' is not a finite number");
}

const std::vector<KernelInfo>& kernel_registry() {
  static const std::vector<KernelInfo> registry = build_registry();
  return registry;
}

const KernelInfo* find_kernel(std::string_view name) {
  for (const auto& k : kernel_registry()) {
    if (k.id.name() == name) return &k;
  }
  return nullptr;
}

std::vector<std::string> check_params(const KernelInfo& k, const KernelParams& params) {
  std::vector<std::string> diags;
  const std::string motif = k.id.name();
  for (const auto& [name, value] : params) {
    const ParamSpec* spec = find_spec(k.params, name);
    if (!spec) {
      diags.push_back(motif + ": unknown parameter '" + name + "'");
      continue;
    }
    switch (spec->type) {
      case ParamType::Integer: {
        auto v = parse_int64(value);
        if (!v) {
          diags.push_back(motif + ": parameter '" + name + "' must be an integer");
        } else if (static_cast<double>(*v) < spec->min || static_cast<double>(*v) > spec->max) {
          diags.push_back(motif + ": parameter '" + name + "' out of range");
        }
        break;
      }
      case ParamType::Real: {
        auto v = parse_double(value);
        if (!v || !std::isfinite(*v)) {
          diags.push_back(motif + ": parameter '" + name + "' must be a finite number");
        } else if (*v < spec->min || *v > spec->max) {
          diags.push_back(motif + ": parameter '" + name + "' out of range");
        }
        break;
      }
      case ParamType::String:
        if (!spec->choices.empty() &&
            std::find(spec->choices.begin(), spec->choices.end(), value) ==
                spec->choices.end()) {
          diags.push_back(motif + ": parameter '" + name + "' must be one of " +
                          [&] {
                            std::string s;
                            for (const auto& c : spec->choices) s += (s.empty() ? "" : "|") + c;
                            return s;
                          }());
        }
        break;
    }
  }
  for (const auto& spec : k.params) {
    if (spec.required && !params.contains(spec.name)) {
      diags.push_back(motif + ": missing required parameter '" + spec.name + "'");
    }
  }
  return diags;
}

std::optional<PayloadKind> result_kind(const KernelInfo& k,
                                       std::span<const PayloadKind> operand_kinds) {
  if (operand_kinds.size() != k.arity()) return std::nullopt;
  for (std::size_t i = 0; i < operand_kinds.size(); ++i) {
    const auto& ok = k.operands[i];
    if (std::find(ok.begin(), ok.end(), operand_kinds[i]) == ok.end()) return std::nullopt;
  }
  return k.output ? *k.output : operand_kinds[0];
}

Payload invoke(const KernelInfo& k, std::span<const Dataset> operands,
               const KernelParams& params) {
  if (operands.size() != k.arity()) {
    throw InvalidArgument(k.id.name() + ": expects " + std::to_string(k.arity()) +
                          " operand(s), got " + std::to_string(operands.size()));
  }
  for (std::size_t i = 0; i < operands.size(); ++i) {
    const auto& ok = k.operands[i];
    if (std::find(ok.begin(), ok.end(), operands[i].kind()) == ok.end()) {
      throw InvalidArgument(k.id.name() + ": operand " + std::to_string(i) + " has kind " +
                            std::string(kind_name(operands[i].kind())) + " (not accepted)");
    }
  }
  if (auto diags = check_params(k, params); !diags.empty()) {
    throw InvalidArgument(diags.front());
  }
  return k.run(operands, ParamReader(k.params, params));
}

}  // namespace motifbench
