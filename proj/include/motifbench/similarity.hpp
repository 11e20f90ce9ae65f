#pragma once

// Workload similarity: z-score standardization, PCA by cyclic Jacobi
// rotations, and agglomerative hierarchical clustering.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "motifbench/topdown.hpp"

namespace motifbench::similarity {

using Rows = std::vector<std::vector<double>>;

// Metric vectors as a CSV table: `label,<metric>,<metric>,...`.
struct MetricTable {
  std::vector<std::string> names;
  std::vector<std::string> labels;
  Rows rows;
};

// Throws ParseError (with line) on a bad header, ragged row or non-number.
MetricTable parse_metric_csv(std::string_view text);
MetricTable load_metric_csv(const std::filesystem::path& path);
std::string format_metric_csv(const MetricTable& table);
// Appends one row, writing the header first when the file is new or empty.
// Throws InvalidArgument when the existing header differs.
void append_metric_csv(const std::filesystem::path& path, const topdown::MetricVector& v);

// Per-column z-scores with the sample standard deviation; zero-variance
// columns become zero. Needs >= 2 rows of equal length.
Rows standardize(const Rows& x);
// Same, after checking that every vector has the same metric ordering.
Rows standardize(const std::vector<topdown::MetricVector>& vectors);

struct EigenResult {
  std::vector<double> values;  // descending
  Rows vectors;                // vectors[i] pairs with values[i], unit length
  std::size_t sweeps = 0;
};

// Cyclic Jacobi on a symmetric matrix. Stops when the off-diagonal Frobenius
// norm drops below 1e-12 * max(1, ||A||_F). Each eigenvector's largest
// component is made positive.
EigenResult jacobi_eigen(Rows a, std::size_t max_sweeps = 100);

// Sample covariance (divisor n - 1) of the columns of x.
Rows covariance(const Rows& x);

struct PcaResult {
  std::vector<double> mean;             // column means removed before projection
  std::vector<double> eigenvalues;      // all, descending, negatives clamped to 0
  std::vector<double> explained_ratio;  // eigenvalue / total, descending
  Rows components;                      // all eigenvectors, one per row
  std::size_t k = 0;                    // retained components
  Rows projected;                       // n x k scores
};

// k is the smallest count whose cumulative explained ratio reaches the
// threshold (within 1e-12). Data with no variance keeps one component.
PcaResult pca(const Rows& x, double variance_threshold);

enum class Linkage { Average, Single, Complete };
std::string_view linkage_name(Linkage l);
std::optional<Linkage> parse_linkage(std::string_view name);

Rows euclidean_distances(const Rows& points);

struct Merge {
  std::size_t a = 0;  // smaller cluster id
  std::size_t b = 0;
  double distance = 0;
  std::size_t id = 0;  // leaves are 0..n-1, merges take n, n+1, ...
  std::size_t size = 0;
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<Merge> merges;
};

// Ties go to the pair with the smallest (a, b) cluster ids.
Dendrogram hcluster(const Rows& points, Linkage linkage = Linkage::Average);

// Cluster number per leaf after undoing the last k - 1 merges. Clusters are
// numbered in order of their smallest leaf.
std::vector<std::size_t> cut(const Dendrogram& d, std::size_t k);

// Indented tree, root first, leaves shown by label.
std::string render_text(const Dendrogram& d, const std::vector<std::string>& labels);

struct ClusterOptions {
  bool standardize = true;
  double variance_threshold = 0.9;
  Linkage linkage = Linkage::Average;
  std::optional<std::size_t> cut;
};

struct ClusterResult {
  ClusterOptions options;
  std::vector<std::string> labels;
  PcaResult pca;
  Dendrogram dendrogram;
  std::vector<std::size_t> assignment;  // empty without a cut

  nlohmann::ordered_json to_json() const;
};

ClusterResult cluster_workloads(const MetricTable& table, const ClusterOptions& options);

}  // namespace motifbench::similarity
