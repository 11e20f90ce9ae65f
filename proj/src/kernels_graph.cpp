// Graph motif.

#include <cmath>
#include <numeric>

#include "motifbench/error.hpp"
#include "motifbench/kernels.hpp"

namespace motifbench::kernels {

std::vector<std::uint64_t> connected_components(const Graph& g) {
  // Union-find with path halving. Roots always hook under the smaller root,
  // so every root is the minimum vertex id of its component.
  const std::uint64_t n = g.vertex_count();
  std::vector<std::uint64_t> label(n);
  std::iota(label.begin(), label.end(), 0);
  auto root = [&](std::uint64_t v) {
    while (label[v] != v) {
      label[v] = label[label[v]];
      v = label[v];
    }
    return v;
  };
  for (const auto& e : g.edges()) {
    std::uint64_t a = root(e.source), b = root(e.target);
    if (a == b) continue;
    // Hook the larger root under the smaller so roots are component minima.
    if (a < b) std::swap(a, b);
    label[a] = b;
  }
  for (std::uint64_t v = 0; v < n; ++v) label[v] = root(v);
  return label;
}

PageRankResult pagerank(const Graph& g, const PageRankOptions& options) {
  if (!(options.damping > 0.0 && options.damping < 1.0)) {
    throw InvalidArgument("pagerank: damping must be in (0, 1)");
  }
  const std::size_t n = g.vertex_count();
  // Compressed in-adjacency so each iteration is a pull over incoming edges.
  std::vector<std::uint64_t> out_degree(n, 0);
  std::vector<std::size_t> in_offsets(n + 1, 0);
  auto each_arc = [&](auto&& fn) {
    for (const auto& e : g.edges()) {
      fn(e.source, e.target);
      if (!g.directed() && e.source != e.target) fn(e.target, e.source);
    }
  };
  each_arc([&](std::uint64_t s, std::uint64_t t) {
    ++out_degree[s];
    ++in_offsets[t + 1];
  });
  for (std::size_t v = 0; v < n; ++v) in_offsets[v + 1] += in_offsets[v];
  std::vector<std::uint64_t> in_sources(in_offsets[n]);
  {
    std::vector<std::size_t> fill(in_offsets.begin(), in_offsets.end() - 1);
    each_arc([&](std::uint64_t s, std::uint64_t t) { in_sources[fill[t]++] = s; });
  }

  const double d = options.damping;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, inv_n), next(n), contrib(n);
  PageRankResult result;
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    double dangling = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      if (out_degree[v] == 0) {
        dangling += rank[v];
        contrib[v] = 0.0;
      } else {
        contrib[v] = rank[v] / static_cast<double>(out_degree[v]);
      }
    }
    const double base = (1.0 - d) * inv_n + d * dangling * inv_n;
    double delta = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      double sum = 0.0;
      for (std::size_t k = in_offsets[v]; k < in_offsets[v + 1]; ++k) {
        sum += contrib[in_sources[k]];
      }
      next[v] = base + d * sum;
      delta += std::fabs(next[v] - rank[v]);
    }
    rank.swap(next);
    result.iterations = iter + 1;
    if (delta < options.tolerance) break;
  }
  // Re-normalise away rounding drift so the scores sum to one.
  const double total = std::accumulate(rank.begin(), rank.end(), 0.0);
  for (auto& r : rank) r /= total;
  result.scores = std::move(rank);
  return result;
}

}  // namespace motifbench::kernels
