#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "motifbench/error.hpp"
#include "motifbench/fft.hpp"
#include "motifbench/kernels.hpp"
#include "motifbench/md5.hpp"
#include "motifbench/rng.hpp"
#include "oracles.hpp"

using namespace motifbench;
using namespace motifbench::kernels;

namespace {

constexpr int kTrials = 100;

std::vector<Complex> random_complex(SplitMix64& rng, std::size_t n) {
  std::vector<Complex> v(n);
  for (auto& c : v) c = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return v;
}

double max_err(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Table random_table(SplitMix64& rng, std::size_t rows) {
  std::vector<Row> data;
  for (std::size_t i = 0; i < rows; ++i) {
    data.push_back({static_cast<std::int64_t>(rng.below(10)), rng.uniform(-5, 5),
                    oracle::random_word(rng, 3, "xyz")});
  }
  return Table({{"k", ColumnKind::Integer}, {"v", ColumnKind::Real}, {"s", ColumnKind::String}},
               std::move(data));
}

}  // namespace

TEST_SUITE("kernels") {

// ---- transform ---------------------------------------------------------

TEST_CASE("fft matches the naive DFT") {
  SplitMix64 rng(1);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = std::size_t{1} << rng.below(9);  // 1 .. 256
    auto x = random_complex(rng, n);
    CHECK(max_err(fft(x), oracle::dft(x, false)) < 1e-9);
    CHECK(max_err(fft(x, true), oracle::dft(x, true)) < 1e-9);
    CHECK(max_err(fft(fft(x), true), x) < 1e-12);
  }
  std::vector<Complex> three(3);
  CHECK_THROWS_AS(fft(three), InvalidArgument);
}

TEST_CASE("fft2d matches the naive 2-D DFT") {
  SplitMix64 rng(2);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t r = std::size_t{1} << rng.below(5), c = std::size_t{1} << rng.below(5);
    ComplexMatrix m{r, c, random_complex(rng, r * c)};
    CHECK(max_err(fft2d(m).data, oracle::dft2d(m.data, r, c, false)) < 1e-9);
    CHECK(max_err(fft2d(m, true).data, oracle::dft2d(m.data, r, c, true)) < 1e-9);
  }
}

TEST_CASE("convolution matches the six-loop oracle") {
  SplitMix64 rng(3);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t b = 1 + rng.below(2), h = 3 + rng.below(6), w = 3 + rng.below(6),
                      ci = 1 + rng.below(3), co = 1 + rng.below(3);
    const std::size_t kh = 1 + rng.below(3), kw = 1 + rng.below(3), stride = 1 + rng.below(2);
    auto x = oracle::random_tensor(rng, {b, h, w, ci});
    auto k = oracle::random_tensor(rng, {kh, kw, ci, co});
    for (bool same : {false, true}) {
      auto got = convolution(x, k, stride, same ? Padding::Same : Padding::Valid);
      auto want = oracle::convolution(x, k, stride, same);
      REQUIRE(got.shape() == want.shape());
      CHECK(oracle::max_abs_diff(got.data(), want.data()) < 1e-9);
    }
  }
}

TEST_CASE("lowpass zeroes the high frequencies only") {
  std::vector<Complex> plane(8 * 8, Complex(1, 1));
  lowpass(plane, 8, 8, 2);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      const bool keep = std::min(i, 8 - i) <= 2 && std::min(j, 8 - j) <= 2;
      CHECK((plane[i * 8 + j] != Complex(0, 0)) == keep);
    }
}

// ---- matrix --------------------------------------------------------------

TEST_CASE("matmul matches the triple loop") {
  SplitMix64 rng(4);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = 1 + rng.below(40), k = 1 + rng.below(40), m = 1 + rng.below(40);
    auto a = oracle::random_matrix(rng, n, k);
    auto b = oracle::random_matrix(rng, k, m);
    auto c = matmul(a, b);
    CHECK(oracle::max_abs_diff(c.data(), oracle::matmul(a, b)) < 1e-9);
  }
  auto big_a = oracle::random_matrix(rng, 256, 256);
  auto big_b = oracle::random_matrix(rng, 256, 256);
  CHECK(oracle::max_abs_diff(matmul(big_a, big_b).data(), oracle::matmul(big_a, big_b)) < 1e-9);
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), InvalidArgument);
}

TEST_CASE("elementwise matrix ops") {
  SplitMix64 rng(5);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t r = 1 + rng.below(10), c = 1 + rng.below(10);
    auto a = oracle::random_matrix(rng, r, c);
    auto b = oracle::random_matrix(rng, r, c);
    auto add = mat_elementwise(a, b, ElementwiseOp::Add);
    auto sub = mat_elementwise(a, b, ElementwiseOp::Subtract);
    auto had = mat_elementwise(a, b, ElementwiseOp::Hadamard);
    for (std::size_t i = 0; i < r * c; ++i) {
      CHECK(add.data()[i] == a.data()[i] + b.data()[i]);
      CHECK(sub.data()[i] == a.data()[i] - b.data()[i]);
      CHECK(had.data()[i] == a.data()[i] * b.data()[i]);
    }
  }
}

TEST_CASE("fully connected equals flatten then matmul plus bias") {
  SplitMix64 rng(6);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t b = 1 + rng.below(4), h = 1 + rng.below(4), w = 1 + rng.below(4),
                      out = 1 + rng.below(5);
    auto x = oracle::random_tensor(rng, {b, h, w});
    auto wm = oracle::random_matrix(rng, h * w, out);
    auto bias = oracle::random_tensor(rng, {out});
    auto y = fully_connected(x, wm, bias);
    REQUIRE(y.shape() == std::vector<std::size_t>{b, out});
    Matrix flat(b, h * w, {x.data().begin(), x.data().end()});
    auto ref = oracle::matmul(flat, wm);
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < out; ++j) ref[i * out + j] += bias.data()[j];
    CHECK(oracle::max_abs_diff(y.data(), ref) < 1e-12);
  }
}

// ---- graph -----------------------------------------------------------------

TEST_CASE("connected components match breadth-first and union-find labelling") {
  SplitMix64 rng(7);
  for (int t = 0; t < kTrials; ++t) {
    const std::uint64_t n = 1 + rng.below(60);
    std::vector<Edge> edges;
    const auto m = rng.below(n + 10);
    for (std::uint64_t i = 0; i < m; ++i) edges.push_back({rng.below(n), rng.below(n)});
    Graph g(n, edges, rng.bernoulli(0.5));
    CHECK(connected_components(g) == oracle::components(g));
    CHECK(connected_components(g) == oracle::union_find_components(g));
  }
}

TEST_CASE("pagerank matches dense power iteration") {
  SplitMix64 rng(8);
  for (int t = 0; t < kTrials; ++t) {
    const std::uint64_t n = 1 + rng.below(40);
    std::vector<Edge> edges;
    const auto m = rng.below(3 * n + 1);
    for (std::uint64_t i = 0; i < m; ++i) edges.push_back({rng.below(n), rng.below(n)});
    Graph g(n, edges, rng.bernoulli(0.7));
    const double d = rng.uniform(0.5, 0.95);
    auto got = pagerank(g, {d, 10000, 1e-14});
    auto want = oracle::pagerank(g, d);
    CHECK(oracle::max_abs_diff(got.scores, want) < 1e-9);
    CHECK(std::accumulate(got.scores.begin(), got.scores.end(), 0.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("pagerank on a symmetric cycle is uniform") {
  Graph g(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, true);
  auto r = pagerank(g);
  for (double s : r.scores) CHECK(s == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(pagerank(g, {1.0, 10, 1e-9}), InvalidArgument);
}

// ---- set -------------------------------------------------------------------

TEST_CASE("grep matches a linear scan") {
  CHECK(grep(TextCorpus({"abcd", "xyz"}), "abc").documents() ==
        std::vector<std::string>{"abcd"});
  CHECK_THROWS_AS(grep(TextCorpus({"a"}), ""), InvalidArgument);
  SplitMix64 rng(9);
  for (int t = 0; t < kTrials; ++t) {
    std::vector<std::string> docs;
    for (auto i = rng.below(30); i > 0; --i) docs.push_back(oracle::random_word(rng, 12, "abc "));
    const auto pat = oracle::random_word(rng, 2, "abc");
    std::vector<std::string> want;
    for (const auto& d : docs)
      if (d.find(pat) != std::string::npos) want.push_back(d);
    CHECK(grep(TextCorpus(docs), pat).documents() == want);
  }
}

TEST_CASE("filter matches a linear scan") {
  SplitMix64 rng(10);
  const char* ops[] = {"==", "!=", "<", "<=", ">", ">="};
  for (int t = 0; t < kTrials; ++t) {
    auto table = random_table(rng, rng.below(40));
    const auto op = std::string(ops[rng.below(6)]);
    const auto lit = static_cast<std::int64_t>(rng.below(10));
    auto got = filter(table, parse_predicate("k " + op + " " + std::to_string(lit)));
    std::vector<Row> want;
    for (const auto& row : table.rows()) {
      const auto k = std::get<std::int64_t>(row[0]);
      const bool keep = op == "==" ? k == lit : op == "!=" ? k != lit : op == "<" ? k < lit
                        : op == "<=" ? k <= lit : op == ">" ? k > lit : k >= lit;
      if (keep) want.push_back(row);
    }
    CHECK(got.rows() == want);
    CHECK(got.schema() == table.schema());
  }
}

TEST_CASE("predicates on strings and reals") {
  Table t({{"name", ColumnKind::String}, {"x", ColumnKind::Real}},
          {{std::string("b"), 1.5}, {std::string("a b"), -2.0}, {std::string("c"), 3.0}});
  CHECK(filter(t, parse_predicate("name < c")).row_count() == 2);
  CHECK(filter(t, parse_predicate("name == \"a b\"")).row_count() == 1);
  CHECK(filter(t, parse_predicate("x>=1.5")).row_count() == 2);
  CHECK_THROWS_AS(filter(t, parse_predicate("missing == 1")), InvalidArgument);
  CHECK_THROWS_AS(filter(t, parse_predicate("x == abc")), InvalidArgument);
  CHECK_THROWS_AS(parse_predicate("no operator"), InvalidArgument);
}

TEST_CASE("project, select and union") {
  SplitMix64 rng(11);
  for (int t = 0; t < kTrials; ++t) {
    auto a = random_table(rng, rng.below(20));
    auto b = random_table(rng, rng.below(20));
    std::vector<std::string> cols{"s", "k"};
    auto p = project(a, cols);
    REQUIRE(p.column_count() == 2);
    for (std::size_t i = 0; i < a.row_count(); ++i) {
      CHECK(p.rows()[i][0] == a.rows()[i][2]);
      CHECK(p.rows()[i][1] == a.rows()[i][0]);
    }
    auto u = union_all(a, b);
    CHECK(u.row_count() == a.row_count() + b.row_count());
    auto s = select(a, parse_predicate("k >= 5"), cols);
    auto ref = project(filter(a, parse_predicate("k >= 5")), cols);
    CHECK(s == ref);
  }
  CHECK_THROWS_AS(project(random_table(rng, 1), std::vector<std::string>{}), InvalidArgument);
}

TEST_CASE("key-value set operations") {
  SplitMix64 rng(12);
  for (int t = 0; t < kTrials; ++t) {
    std::map<std::string, std::string> a, b;
    for (auto i = rng.below(15); i > 0; --i) a[oracle::random_word(rng, 2)] = "a" + std::to_string(i);
    for (auto i = rng.below(15); i > 0; --i) b[oracle::random_word(rng, 2)] = "b" + std::to_string(i);
    auto u = set_op(KeyValueSet(a), KeyValueSet(b), SetOp::Union).entries();
    auto in = set_op(KeyValueSet(a), KeyValueSet(b), SetOp::Intersect).entries();
    auto df = set_op(KeyValueSet(a), KeyValueSet(b), SetOp::Difference).entries();
    std::map<std::string, std::string> wu = b, wi, wd;
    for (const auto& [k, v] : a) {
      wu[k] = v;
      (b.count(k) ? wi : wd)[k] = v;
    }
    CHECK(u == wu);
    CHECK(in == wi);
    CHECK(df == wd);
  }
}

// ---- sort ------------------------------------------------------------------

TEST_CASE("sort small cases") {
  CHECK(sort_records(TextCorpus({"3", "1", "2"})).documents() ==
        std::vector<std::string>{"1", "2", "3"});
  CHECK(sort_records(TextCorpus{}).empty());
  CHECK_THROWS_AS(sort_records(Matrix(2, 2), 2), InvalidArgument);
}

TEST_CASE("sort matches a stable comparison sort") {
  SplitMix64 rng(13);
  {
    std::vector<std::string> lines;
    for (int i = 0; i < 10000; ++i) lines.push_back(oracle::random_word(rng, 8, "abcdefgh"));
    auto want = lines;
    std::stable_sort(want.begin(), want.end());
    CHECK(sort_records(TextCorpus(lines)).documents() == want);
  }
  for (int t = 0; t < kTrials; ++t) {
    auto table = random_table(rng, rng.below(50));
    for (std::size_t key : {0u, 1u, 2u}) {
      auto rows = table.rows();
      std::stable_sort(rows.begin(), rows.end(),
                       [&](const Row& x, const Row& y) { return x[key] < y[key]; });
      CHECK(sort_records(table, key).rows() == rows);
    }
    const std::size_t r = 1 + rng.below(20), c = 1 + rng.below(4);
    std::vector<double> v(r * c);
    for (auto& x : v) x = static_cast<double>(rng.below(5));  // plenty of ties
    Matrix m(r, c, v);
    const auto key = rng.below(c);
    std::vector<std::size_t> idx(r);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return m.at(a, key) < m.at(b, key); });
    std::vector<double> want;
    for (auto i : idx)
      for (std::size_t j = 0; j < c; ++j) want.push_back(m.at(i, j));
    CHECK(oracle::max_abs_diff(sort_records(m, key).data(), want) == 0.0);
  }
}

TEST_CASE("text sort by whitespace field is stable") {
  TextCorpus in({"b 2", "a 1", "c 1", "d", "e 0"});
  CHECK(sort_records(in, 1).documents() ==
        std::vector<std::string>{"d", "e 0", "a 1", "c 1", "b 2"});
}

// ---- statistic ---------------------------------------------------------------

TEST_CASE("wordcount matches a tally") {
  SplitMix64 rng(14);
  for (int t = 0; t < kTrials; ++t) {
    std::vector<std::string> docs;
    for (auto i = rng.below(20); i > 0; --i) docs.push_back(oracle::random_word(rng, 20, "ab \t"));
    auto got = wordcount(TextCorpus(docs)).entries();
    std::map<std::string, std::string> want;
    for (const auto& [w, n] : oracle::wordcount(docs)) want[w] = std::to_string(n);
    CHECK(got == want);
  }
}

TEST_CASE("aggregate matches grouped tallies") {
  SplitMix64 rng(15);
  for (int t = 0; t < kTrials; ++t) {
    auto table = random_table(rng, 1 + rng.below(40));
    std::map<std::int64_t, std::pair<std::int64_t, double>> acc;
    for (const auto& row : table.rows()) {
      auto& a = acc[std::get<std::int64_t>(row[0])];
      a.first += 1;
      a.second += std::get<double>(row[1]);
    }
    auto cnt = aggregate(table, "k", Aggregation::Count);
    auto sum = aggregate(table, "k", Aggregation::Sum, "v");
    auto avg = aggregate(table, "k", Aggregation::Avg, "v");
    REQUIRE(cnt.row_count() == acc.size());
    std::size_t i = 0;
    for (const auto& [k, a] : acc) {
      CHECK(std::get<std::int64_t>(cnt.rows()[i][0]) == k);
      CHECK(std::get<std::int64_t>(cnt.rows()[i][1]) == a.first);
      CHECK(std::get<double>(sum.rows()[i][1]) == doctest::Approx(a.second).epsilon(1e-12));
      CHECK(std::get<double>(avg.rows()[i][1]) ==
            doctest::Approx(a.second / static_cast<double>(a.first)).epsilon(1e-12));
      ++i;
    }
  }
}

TEST_CASE("batch norm normalises each fibre") {
  SplitMix64 rng(16);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t n = 2 + rng.below(6), c = 1 + rng.below(4);
    auto x = oracle::random_tensor(rng, {n, c});
    auto y = batch_norm(x, 0, 0.0);
    for (std::size_t j = 0; j < c; ++j) {
      double mean = 0, var = 0;
      for (std::size_t i = 0; i < n; ++i) mean += x.data()[i * c + j];
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) var += std::pow(x.data()[i * c + j] - mean, 2);
      var /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        CHECK(y.data()[i * c + j] ==
              doctest::Approx((x.data()[i * c + j] - mean) / std::sqrt(var)).epsilon(1e-9));
    }
    auto z = cosine_norm(x, 1);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < c; ++j) s += z.data()[i * c + j] * z.data()[i * c + j];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(cosine_norm(Tensor({1, 2}, {0, 0}), 1), InvalidArgument);
}

TEST_CASE("count and column summary") {
  auto c = count_records(Matrix(2, 2, {1, -5, 0.5, 3}), 1.0);
  CHECK(c.count == 2);
  CHECK(c.total == 4);
  CHECK(count_records(TextCorpus({"a", "b"})).count == 2);
  auto s = column_summary(Matrix(2, 1, {1, 3}));
  REQUIRE(s.row_count() == 1);
  CHECK(std::get<double>(s.rows()[0][3]) == 2.0);  // mean
  CHECK(std::get<double>(s.rows()[0][6]) == 1.0);  // population stddev
}

// ---- sampling ------------------------------------------------------------------

TEST_CASE("pooling matches window scans") {
  SplitMix64 rng(17);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t b = 1 + rng.below(2), h = 2 + rng.below(7), w = 2 + rng.below(7),
                      c = 1 + rng.below(3), win = 1 + rng.below(2), stride = 1 + rng.below(2);
    auto x = oracle::random_tensor(rng, {b, h, w, c});
    auto mx = pool(x, win, stride, PoolMode::Max);
    auto av = pool(x, win, stride, PoolMode::Avg);
    const std::size_t oh = (h - win) / stride + 1, ow = (w - win) / stride + 1;
    REQUIRE(mx.shape() == std::vector<std::size_t>{b, oh, ow, c});
    for (std::size_t bb = 0; bb < b; ++bb)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j)
          for (std::size_t cc = 0; cc < c; ++cc) {
            double m = -INFINITY, s = 0;
            for (std::size_t di = 0; di < win; ++di)
              for (std::size_t dj = 0; dj < win; ++dj) {
                const double v = oracle::at4(x, bb, i * stride + di, j * stride + dj, cc);
                m = std::max(m, v);
                s += v;
              }
            const auto idx = ((bb * oh + i) * ow + j) * c + cc;
            CHECK(mx.data()[idx] == m);
            CHECK(av.data()[idx] == doctest::Approx(s / static_cast<double>(win * win)));
          }
  }
}

TEST_CASE("downsample keeps every factor-th row and column") {
  SplitMix64 rng(18);
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t r = 1 + rng.below(12), c = 1 + rng.below(12), f = 1 + rng.below(3);
    auto m = oracle::random_matrix(rng, r, c);
    auto d = downsample(m, f);
    CHECK(d.rows() == (r + f - 1) / f);
    CHECK(d.cols() == (c + f - 1) / f);
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j) CHECK(d.at(i, j) == m.at(i * f, j * f));
  }
}

TEST_CASE("random sample and dropout are seeded") {
  std::vector<std::string> docs;
  for (int i = 0; i < 1000; ++i) docs.push_back(std::to_string(i));
  TextCorpus in(docs);
  auto a = random_sample(in, 0.3, 5);
  CHECK(a == random_sample(in, 0.3, 5));
  CHECK(a.size() > 220);
  CHECK(a.size() < 380);
  CHECK(random_sample(in, 1.0, 1).size() == 1000);
  CHECK(random_sample(in, 0.0, 1).empty());

  SplitMix64 rng(19);
  auto x = oracle::random_tensor(rng, {100, 10});
  CHECK(dropout(x, 0.0, 3) == x);
  auto dropped = dropout(x, 1.0, 3);
  for (double v : dropped.data()) CHECK(v == 0.0);
  auto y = dropout(x, 0.5, 3);
  CHECK(y == dropout(x, 0.5, 3));
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK((y.data()[i] == 0.0 || y.data()[i] == x.data()[i] * 2.0));
  }
}

// ---- logic -------------------------------------------------------------------------

TEST_CASE("md5 digest per document") {
  auto d = md5_digest(TextCorpus({"", "abc"}));
  CHECK(d.documents() ==
        std::vector<std::string>{"d41d8cd98f00b204e9800998ecf8427e",
                                 "900150983cd24fb0d6963f7d28e17f72"});
}

TEST_CASE("activations") {
  SplitMix64 rng(20);
  for (int t = 0; t < kTrials; ++t) {
    auto x = oracle::random_tensor(rng, {1 + rng.below(10)});
    auto r = elementwise_activation(x, Activation::Relu);
    auto s = elementwise_activation(x, Activation::Sigmoid);
    auto h = elementwise_activation(x, Activation::Tanh);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = x.data()[i];
      CHECK(r.data()[i] == (v > 0 ? v : 0.0));
      CHECK(s.data()[i] == doctest::Approx(1 / (1 + std::exp(-v))));
      CHECK(h.data()[i] == doctest::Approx(std::tanh(v)));
    }
  }
}

}  // TEST_SUITE
