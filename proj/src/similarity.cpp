#include "motifbench/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>

#include "motifbench/csv.hpp"
#include "motifbench/dataset_io.hpp"
#include "motifbench/error.hpp"
#include "motifbench/strings.hpp"

namespace motifbench::similarity {

MetricTable parse_metric_csv(std::string_view text) {
  csv::Reader reader(text);
  MetricTable t;
  auto header = reader.next();
  if (!header) throw ParseError("metric CSV is empty");
  if (header->fields.size() < 2 || trim(header->fields[0]) != "label") {
    throw ParseError("header must start with 'label' and name at least one metric",
                     header->line);
  }
  for (std::size_t i = 1; i < header->fields.size(); ++i) {
    std::string name(trim(header->fields[i]));
    if (name.empty()) throw ParseError("empty metric name", header->line);
    if (std::find(t.names.begin(), t.names.end(), name) != t.names.end()) {
      throw ParseError("duplicate metric '" + name + "'", header->line);
    }
    t.names.push_back(std::move(name));
  }
  while (auto rec = reader.next()) {
    if (rec->fields.size() == 1 && trim(rec->fields[0]).empty()) continue;
    if (rec->fields.size() != t.names.size() + 1) {
      throw ParseError("expected " + std::to_string(t.names.size() + 1) + " fields, got " +
                           std::to_string(rec->fields.size()),
                       rec->line);
    }
    std::vector<double> row;
    for (std::size_t i = 1; i < rec->fields.size(); ++i) {
      auto v = parse_double(trim(rec->fields[i]));
      if (!v || !std::isfinite(*v)) {
        throw ParseError("metric '" + t.names[i - 1] + "' is not a finite number", rec->line);
      }
      row.push_back(*v);
    }
    t.labels.push_back(rec->fields[0]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

MetricTable load_metric_csv(const std::filesystem::path& path) {
  try {
    return parse_metric_csv(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": ", e);
  }
}

std::string format_metric_csv(const MetricTable& table) {
  std::vector<std::string> header{"label"};
  header.insert(header.end(), table.names.begin(), table.names.end());
  std::string out = csv::join(header) + "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<std::string> fields{table.labels[r]};
    for (double v : table.rows[r]) fields.push_back(format_double(v));
    out += csv::join(fields) + "\n";
  }
  return out;
}

void append_metric_csv(const std::filesystem::path& path, const topdown::MetricVector& v) {
  std::vector<std::string> header{"label"};
  header.insert(header.end(), v.names.begin(), v.names.end());
  std::string existing;
  if (std::filesystem::exists(path)) existing = read_file(path);
  std::string out;
  if (trim(existing).empty()) {
    out = csv::join(header) + "\n";
  } else {
    csv::Reader reader(existing);
    auto first = reader.next();
    if (!first || first->fields != header) {
      throw InvalidArgument(path.string() + ": metric columns differ from this run's");
    }
    if (existing.back() != '\n') out = "\n";
  }
  std::vector<std::string> fields{v.label};
  for (double x : v.values) fields.push_back(format_double(x));
  out += csv::join(fields) + "\n";
  std::ofstream f(path, std::ios::binary | std::ios::app);
  if (!f || !(f << out)) throw IoError("cannot append to " + path.string());
}

namespace {

void check_rectangular(const Rows& x, std::size_t min_rows) {
  if (x.size() < min_rows) {
    throw InvalidArgument("need at least " + std::to_string(min_rows) + " rows, got " +
                          std::to_string(x.size()));
  }
  for (const auto& r : x) {
    if (r.size() != x.front().size()) throw InvalidArgument("rows differ in length");
  }
  if (x.front().empty()) throw InvalidArgument("rows are empty");
}

std::vector<double> column_means(const Rows& x) {
  std::vector<double> m(x.front().size(), 0.0);
  for (const auto& r : x) {
    for (std::size_t j = 0; j < r.size(); ++j) m[j] += r[j];
  }
  for (auto& v : m) v /= static_cast<double>(x.size());
  return m;
}

}  // namespace

Rows standardize(const Rows& x) {
  check_rectangular(x, 2);
  const auto n = x.size();
  const auto d = x.front().size();
  const auto mean = column_means(x);
  Rows out(n, std::vector<double>(d, 0.0));
  for (std::size_t j = 0; j < d; ++j) {
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) ss += (x[i][j] - mean[j]) * (x[i][j] - mean[j]);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    // Spread that is pure rounding noise counts as zero variance.
    if (sd <= 1e-12 * std::max(1.0, std::fabs(mean[j]))) continue;
    for (std::size_t i = 0; i < n; ++i) out[i][j] = (x[i][j] - mean[j]) / sd;
  }
  return out;
}

Rows standardize(const std::vector<topdown::MetricVector>& vectors) {
  if (vectors.size() < 2) throw InvalidArgument("need at least 2 metric vectors");
  Rows x;
  for (const auto& v : vectors) {
    if (v.names != vectors.front().names) {
      throw InvalidArgument("metric vector '" + v.label + "' has a different metric ordering");
    }
    x.push_back(v.values);
  }
  return standardize(x);
}

EigenResult jacobi_eigen(Rows a, std::size_t max_sweeps) {
  const auto n = a.size();
  if (n == 0) throw InvalidArgument("empty matrix");
  for (const auto& r : a) {
    if (r.size() != n) throw InvalidArgument("matrix is not square");
  }
  Rows v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

  double frob = 0;
  for (const auto& r : a) {
    for (double x : r) frob += x * x;
  }
  const double tol = 1e-12 * std::max(1.0, std::sqrt(frob));
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      if (std::fabs(a[p][q] - a[q][p]) > tol) throw InvalidArgument("matrix is not symmetric");
    }
  }
  auto off_norm = [&] {
    double s = 0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        if (p != q) s += a[p][q] * a[p][q];
      }
    }
    return std::sqrt(s);
  };

  EigenResult res;
  while (off_norm() >= tol) {
    if (res.sweeps == max_sweeps) throw Error("Jacobi eigen-solver did not converge");
    ++res.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::hypot(theta, 1.0));
        const double c = 1 / std::sqrt(t * t + 1);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a[i][i] > a[j][j]; });
  for (auto i : order) {
    res.values.push_back(a[i][i]);
    std::vector<double> vec(n);
    for (std::size_t k = 0; k < n; ++k) vec[k] = v[k][i];
    std::size_t big = 0;
    for (std::size_t k = 1; k < n; ++k) {
      if (std::fabs(vec[k]) > std::fabs(vec[big]) + 1e-12) big = k;
    }
    if (vec[big] < 0) {
      for (auto& x : vec) x = -x;
    }
    res.vectors.push_back(std::move(vec));
  }
  return res;
}

Rows covariance(const Rows& x) {
  check_rectangular(x, 2);
  const auto n = x.size();
  const auto d = x.front().size();
  const auto mean = column_means(x);
  Rows c(d, std::vector<double>(d, 0.0));
  for (const auto& r : x) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i; j < d; ++j) c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      c[i][j] /= static_cast<double>(n - 1);
      c[j][i] = c[i][j];
    }
  }
  return c;
}

PcaResult pca(const Rows& x, double variance_threshold) {
  if (!(variance_threshold > 0 && variance_threshold <= 1)) {
    throw InvalidArgument("variance threshold must be in (0, 1]");
  }
  check_rectangular(x, 2);
  PcaResult r;
  r.mean = column_means(x);
  auto eig = jacobi_eigen(covariance(x));
  double total = 0;
  for (auto& v : eig.values) {
    v = std::max(v, 0.0);
    total += v;
  }
  r.eigenvalues = eig.values;
  r.components = std::move(eig.vectors);
  double cum = 0;
  for (double v : r.eigenvalues) {
    r.explained_ratio.push_back(total > 0 ? v / total : 0.0);
  }
  r.k = 1;
  if (total > 0) {
    r.k = r.eigenvalues.size();
    for (std::size_t i = 0; i < r.explained_ratio.size(); ++i) {
      cum += r.explained_ratio[i];
      if (cum >= variance_threshold - 1e-12) {
        r.k = i + 1;
        break;
      }
    }
  }
  for (const auto& row : x) {
    std::vector<double> p(r.k, 0.0);
    for (std::size_t c = 0; c < r.k; ++c) {
      for (std::size_t j = 0; j < row.size(); ++j) p[c] += (row[j] - r.mean[j]) * r.components[c][j];
    }
    r.projected.push_back(std::move(p));
  }
  return r;
}

std::string_view linkage_name(Linkage l) {
  switch (l) {
    case Linkage::Average: return "average";
    case Linkage::Single: return "single";
    case Linkage::Complete: return "complete";
  }
  return "average";
}

std::optional<Linkage> parse_linkage(std::string_view name) {
  if (name == "average") return Linkage::Average;
  if (name == "single") return Linkage::Single;
  if (name == "complete") return Linkage::Complete;
  return std::nullopt;
}

Rows euclidean_distances(const Rows& points) {
  const auto n = points.size();
  Rows d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < points[i].size(); ++k) {
        const double diff = points[i][k] - points[j][k];
        s += diff * diff;
      }
      d[i][j] = d[j][i] = std::sqrt(s);
    }
  }
  return d;
}

Dendrogram hcluster(const Rows& points, Linkage linkage) {
  check_rectangular(points, 2);
  const auto n = points.size();
  const auto dist = euclidean_distances(points);

  struct Cluster {
    std::size_t id;
    std::vector<std::size_t> leaves;
  };
  std::vector<Cluster> active;
  for (std::size_t i = 0; i < n; ++i) active.push_back({i, {i}});

  auto linkage_distance = [&](const Cluster& a, const Cluster& b) {
    double acc = linkage == Linkage::Single ? INFINITY : 0.0;
    for (auto i : a.leaves) {
      for (auto j : b.leaves) {
        const double x = dist[i][j];
        if (linkage == Linkage::Single) acc = std::min(acc, x);
        else if (linkage == Linkage::Complete) acc = std::max(acc, x);
        else acc += x;
      }
    }
    if (linkage == Linkage::Average) {
      acc /= static_cast<double>(a.leaves.size() * b.leaves.size());
    }
    return acc;
  };

  Dendrogram d;
  d.leaves = n;
  std::size_t next_id = n;
  while (active.size() > 1) {
    // `active` stays sorted by id, so the first strict minimum is the
    // smallest id pair among ties.
    std::size_t bi = 0, bj = 1;
    double best = INFINITY;
    for (std::size_t i = 0; i < active.size(); ++i) {
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const double x = linkage_distance(active[i], active[j]);
        if (x < best) {
          best = x;
          bi = i;
          bj = j;
        }
      }
    }
    Cluster merged{next_id, active[bi].leaves};
    merged.leaves.insert(merged.leaves.end(), active[bj].leaves.begin(), active[bj].leaves.end());
    d.merges.push_back({active[bi].id, active[bj].id, best, next_id, merged.leaves.size()});
    ++next_id;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
    active.push_back(std::move(merged));
  }
  return d;
}

std::vector<std::size_t> cut(const Dendrogram& d, std::size_t k) {
  const auto n = d.leaves;
  if (k == 0 || k > n) {
    throw InvalidArgument("cut needs 1 <= k <= " + std::to_string(n) + ", got " + std::to_string(k));
  }
  // Union the first n - k merges.
  std::vector<std::size_t> parent(n + d.merges.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t m = 0; m + k < n; ++m) {
    const auto& mg = d.merges[m];
    parent[find(mg.a)] = mg.id;
    parent[find(mg.b)] = mg.id;
  }
  std::vector<std::size_t> out(n);
  std::map<std::size_t, std::size_t> number;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(i);
    auto it = number.find(root);
    if (it == number.end()) it = number.emplace(root, number.size()).first;
    out[i] = it->second;
  }
  return out;
}

std::string render_text(const Dendrogram& d, const std::vector<std::string>& labels) {
  const auto n = d.leaves;
  std::string out;
  std::function<void(std::size_t, int)> visit = [&](std::size_t id, int depth) {
    out.append(static_cast<std::size_t>(depth) * 2, ' ');
    if (id < n) {
      out += (id < labels.size() ? labels[id] : "#" + std::to_string(id)) + "\n";
      return;
    }
    const auto& m = d.merges[id - n];
    char buf[64];
    std::snprintf(buf, sizeof buf, "+ %.4f", m.distance);
    out += buf;
    out += " (" + std::to_string(m.size) + ")\n";
    visit(m.a, depth + 1);
    visit(m.b, depth + 1);
  };
  if (d.merges.empty()) {
    if (n == 1) visit(0, 0);
    return out;
  }
  visit(d.merges.back().id, 0);
  return out;
}

nlohmann::ordered_json ClusterResult::to_json() const {
  nlohmann::ordered_json j;
  j["standardized"] = options.standardize;
  j["variance_threshold"] = options.variance_threshold;
  j["linkage"] = std::string(linkage_name(options.linkage));
  j["metric"] = "euclidean";
  j["labels"] = labels;
  j["components"] = pca.k;
  j["explained_ratio"] = pca.explained_ratio;
  j["merges"] = nlohmann::ordered_json::array();
  for (const auto& m : dendrogram.merges) {
    nlohmann::ordered_json jm;
    jm["a"] = m.a;
    jm["b"] = m.b;
    jm["distance"] = m.distance;
    jm["id"] = m.id;
    jm["size"] = m.size;
    j["merges"].push_back(std::move(jm));
  }
  if (options.cut) {
    j["cut"] = *options.cut;
    j["clusters"] = assignment;
  }
  j["dendrogram_text"] = render_text(dendrogram, labels);
  return j;
}

ClusterResult cluster_workloads(const MetricTable& table, const ClusterOptions& options) {
  if (table.rows.size() < 2) throw InvalidArgument("clustering needs at least 2 workloads");
  ClusterResult r;
  r.options = options;
  r.labels = table.labels;
  const Rows x = options.standardize ? standardize(table.rows) : table.rows;
  r.pca = pca(x, options.variance_threshold);
  r.dendrogram = hcluster(r.pca.projected, options.linkage);
  if (options.cut) r.assignment = cut(r.dendrogram, *options.cut);
  return r;
}

}  // namespace motifbench::similarity
