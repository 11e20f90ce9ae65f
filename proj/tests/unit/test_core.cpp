#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <cstring>
#include <set>

#include "motifbench/checksum.hpp"
#include "motifbench/csv.hpp"
#include "motifbench/datagen.hpp"
#include "motifbench/dataset.hpp"
#include "motifbench/dataset_io.hpp"
#include "motifbench/error.hpp"
#include "motifbench/rng.hpp"
#include "motifbench/strings.hpp"
#include "oracles.hpp"

#define GAUSSIAN_DIGEST "c50af3457afad8e8"

using namespace motifbench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "motifbench-unit";
  fs::create_directories(dir);
  return dir / name;
}

Payload roundtrip(const Payload& p, SaveOptions opt = {}) {
  const auto path = scratch("rt.dat");
  save_dataset(Dataset(p), path, opt);
  return load_dataset(path).payload();
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("constructors reject invariant violations") {
  CHECK_THROWS_AS(Matrix(2, 2, {1, 2, 3}), InvalidArgument);
  CHECK_THROWS_AS(Matrix(0, 2, {}), InvalidArgument);
  CHECK_THROWS_AS(Matrix(1, 1, {NAN}), InvalidArgument);
  CHECK_THROWS_AS(Tensor({2, 0}, {}), InvalidArgument);
  CHECK_THROWS_AS(Tensor({2}, {1, INFINITY}), InvalidArgument);
  CHECK_THROWS_AS(Graph(2, {{0, 5}}, true), InvalidArgument);
  CHECK_THROWS_AS(TextCorpus({"a\nb"}), InvalidArgument);
  CHECK_THROWS_AS(TextCorpus({std::string("\xff\xfe")}), InvalidArgument);
  CHECK_THROWS_AS(Table({{"a", ColumnKind::Integer}}, {{std::string("x")}}), InvalidArgument);
  CHECK_THROWS_AS(Table({{"a", ColumnKind::Integer}}, {{std::int64_t{1}, std::int64_t{2}}}),
                  InvalidArgument);
  CHECK_THROWS_AS(KeyValueSet(std::map<std::string, std::string>{{"k\t", "v"}}), InvalidArgument);
}

TEST_CASE("self loops are kept and counted") {
  Graph g(3, {{0, 0}, {1, 2}, {2, 2}}, true);
  CHECK(g.self_loop_count() == 2);
  CHECK(g.edges().size() == 3);
}

TEST_CASE("dataset kind access") {
  Dataset d(Matrix(1, 1, {3.0}));
  CHECK(d.kind() == PayloadKind::Matrix);
  CHECK_FALSE(d.generated());
  CHECK(d.as<Matrix>().at(0, 0) == 3.0);
  CHECK_THROWS_AS(d.as<Graph>(), InvalidArgument);
}

TEST_CASE("matrix round trip, binary and text") {
  Matrix m(2, 2, {1, 2, 3, 4});
  CHECK(std::get<Matrix>(roundtrip(m)) == m);
  CHECK(std::get<Matrix>(roundtrip(m, {.text_matrix = true})) == m);
  Matrix odd(1, 3, {0.1, -1e-300, 12345.678901234567});
  CHECK(std::get<Matrix>(roundtrip(odd, {.text_matrix = true})) == odd);
}

TEST_CASE("empty text corpus round trip") {
  const auto path = scratch("empty.txt");
  save_dataset(Dataset(TextCorpus{}), path);
  CHECK(fs::file_size(path) == 0);
  CHECK(load_dataset(path).as<TextCorpus>().empty());
}

TEST_CASE("every payload kind round trips") {
  TextCorpus text({"hello world", "", "  spaced  ", "ünïcode ✓"});
  CHECK(std::get<TextCorpus>(roundtrip(text)) == text);

  Table t({{"id", ColumnKind::Integer}, {"name", ColumnKind::String}, {"x", ColumnKind::Real}},
          {{std::int64_t{1}, std::string("a,b"), 0.5},
           {std::int64_t{-7}, std::string("quote \" here"), -2.25},
           {std::int64_t{3}, std::string("multi\nline"), 1e-9},
           {std::int64_t{4}, std::string(""), 3.0}});
  CHECK(std::get<Table>(roundtrip(t)) == t);

  Tensor ten({2, 3, 1}, {1, 2, 3, 4, 5, 6});
  CHECK(std::get<Tensor>(roundtrip(ten)) == ten);

  Graph g(4, {{0, 1}, {3, 3}, {2, 0}, {0, 1}}, false);
  CHECK(std::get<Graph>(roundtrip(g)) == g);

  KeyValueSet kv({{"a", "1"}, {"b c", "two words"}, {"", "empty key"}});
  CHECK(std::get<KeyValueSet>(roundtrip(kv)) == kv);
}

TEST_CASE("generated graph keeps its checksum through save and load") {
  datagen::GraphSpec spec;
  spec.vertices = 1024;
  spec.edges = 5000;
  spec.seed = 7;
  auto d = datagen::gen_graph(spec);
  const auto path = scratch("rmat.graph");
  save_dataset(d, path);
  CHECK(checksum_dataset(load_dataset(path)) == checksum_dataset(d));
}

TEST_CASE("randomized round trips preserve checksums") {
  SplitMix64 rng(11);
  for (int i = 0; i < 50; ++i) {
    auto m = oracle::random_matrix(rng, 1 + rng.below(9), 1 + rng.below(9));
    CHECK(checksum_payload(roundtrip(m)) == checksum_payload(m));
    CHECK(checksum_payload(roundtrip(m, {.text_matrix = true})) == checksum_payload(m));
  }
}

TEST_CASE("load errors") {
  SUBCASE("endpoint out of range") {
    const auto path = scratch("bad.graph");
    write_file(path, "#graph v1 2 1\n0 1\n0 5\n");
    try {
      load_dataset(path);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("endpoint out of range") != std::string::npos);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("table arity") {
    const auto path = scratch("bad.table");
    write_file(path, "#table v1\na:integer,b:string\n1,x\n2\n");
    try {
      load_dataset(path);
      FAIL("expected an error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
  }
  SUBCASE("unknown header") {
    const auto path = scratch("bad.hdr");
    write_file(path, "#blob v1\n");
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("unknown header"), Error);
  }
  SUBCASE("truncated binary matrix") {
    std::string bytes = encode_payload(Matrix(2, 2, {1, 2, 3, 4}));
    bytes.pop_back();
    CHECK_THROWS_AS(decode_payload(bytes), ParseError);
  }
  SUBCASE("valid matrix file") {
    const auto path = scratch("ok.matrix");
    write_file(path, "#matrix v1 2 3 text\n1,2,3\n4,5,6\n");
    const auto& m = load_dataset(path).as<Matrix>();
    CHECK(m.rows() * m.cols() == m.data().size());
    CHECK(m.at(1, 2) == 6.0);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_dataset(scratch("nope.bin")), IoError); }
}

TEST_CASE("save needs an existing parent directory") {
  CHECK_THROWS_AS(save_dataset(Dataset(Matrix(1, 1, {1})), scratch("no/such/dir/m.bin")),
                  IoError);
}

TEST_CASE("a corpus that would read back as a header is refused") {
  CHECK_THROWS_AS(encode_payload(TextCorpus({"#matrix v1 2 2"})), InvalidArgument);
  TextCorpus fine({"# just a comment line"});
  CHECK(std::get<TextCorpus>(roundtrip(fine)) == fine);
}

TEST_CASE("checksums") {
  Matrix a(2, 2, {1, 2, 3, 4});
  Matrix b(2, 2, {1, 2, 3, 5});
  CHECK(checksum_payload(a) == checksum_payload(a));
  CHECK(checksum_payload(a) != checksum_payload(b));
  Dataset p1(a, Provenance{"gen_matrix", 1, {}});
  Dataset p2(a, Provenance{"other", 99, {{"k", "v"}}});
  CHECK(checksum_dataset(p1) == checksum_dataset(p2));
  CHECK(checksum_dataset(p1) == checksum_dataset(Dataset(a)));
  // Same numbers, different shape or kind.
  CHECK(checksum_payload(Matrix(1, 4, {1, 2, 3, 4})) != checksum_payload(a));
  CHECK(checksum_payload(Tensor({2, 2}, {1, 2, 3, 4})) != checksum_payload(a));
  CHECK(format_digest(0x1234).size() == 16);

  SplitMix64 rng(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 200; ++i) {
    auto m = oracle::random_matrix(rng, 3, 3);
    std::vector<double> v(m.data().begin(), m.data().end());
    v[rng.below(9)] += 1e-12;
    const auto h1 = checksum_payload(m);
    const auto h2 = checksum_payload(Matrix(3, 3, v));
    CHECK(h1 != h2);
    seen.insert(h1);
  }
  CHECK(seen.size() == 200);
}

TEST_CASE("checksum is pinned to the canonical little-endian layout") {
  // FNV-1a over: tag 2, u64 rows=1, u64 cols=1, binary64 1.0.
  std::vector<std::uint8_t> bytes{2};
  auto put = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  put(1);
  put(1);
  put(0x3ff0000000000000ULL);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  CHECK(checksum_payload(Matrix(1, 1, {1.0})) == h);
  CHECK(canonical_size(Matrix(1, 1, {1.0})) == bytes.size());
}

TEST_CASE("csv reader") {
  csv::Reader r("a,\"b,c\",d\n\"multi\nline\",\"q\"\"x\"\n");
  auto r1 = r.next();
  REQUIRE(r1);
  CHECK(r1->fields == std::vector<std::string>{"a", "b,c", "d"});
  auto r2 = r.next();
  REQUIRE(r2);
  CHECK(r2->line == 2);
  CHECK(r2->fields == std::vector<std::string>{"multi\nline", "q\"x"});
  CHECK_FALSE(r.next());
  csv::Reader bad("\"open\n");
  CHECK_THROWS_AS(bad.next(), ParseError);
  CHECK(csv::join({"plain", "a,b", "q\""}) == "plain,\"a,b\",\"q\"\"\"");
}

TEST_CASE("portable log tracks the library log") {
  SplitMix64 rng(99);
  for (int i = 0; i < 100000; ++i) {
    const double x = std::ldexp(0.5 + rng.uniform(), static_cast<int>(rng.below(2000)) - 1000);
    const double want = std::log(x);
    CHECK(std::fabs(SplitMix64::portable_log(x) - want) <= 1e-15 * std::max(1.0, std::fabs(want)));
  }
  CHECK(SplitMix64::portable_log(1.0) == 0.0);
}

TEST_CASE("gaussian stream is pinned") {
  SplitMix64 rng(2024);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.gaussian(0, 1);
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  }
  MESSAGE("gaussian stream digest " << format_digest(h));
  CHECK(format_digest(h) == GAUSSIAN_DIGEST);
}

TEST_CASE("string helpers") {
  CHECK(parse_int64("-42") == -42);
  CHECK_FALSE(parse_int64("42x"));
  CHECK_FALSE(parse_uint64("-1"));
  CHECK(parse_double("2.5e3") == 2500.0);
  CHECK_FALSE(parse_double(""));
  CHECK(format_double(0.1) == "0.1");
  CHECK(split_whitespace("  a \t b  ").size() == 2);
}

}  // TEST_SUITE
