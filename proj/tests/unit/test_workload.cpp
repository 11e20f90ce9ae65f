#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "motifbench/checksum.hpp"
#include "motifbench/dataset_io.hpp"
#include "motifbench/workload.hpp"
#include "fixtures.hpp"

using namespace motifbench;
using namespace motifbench::workload;
namespace fs = std::filesystem;

namespace {

const fs::path kSpecs = MOTIFBENCH_SPECS_DIR;

std::vector<Diagnostic> diagnostics_of(std::string_view text) {
  try {
    parse_spec(text);
  } catch (const SpecError& e) {
    return e.diagnostics();
  }
  return {};
}

bool mentions(const std::vector<Diagnostic>& ds, std::string_view needle, int line) {
  for (const auto& d : ds)
    if (d.line == line && d.message.find(needle) != std::string::npos) return true;
  return false;
}

ExecuteOptions in_memory(std::size_t repeat = 1) {
  ExecuteOptions o;
  o.repeat = repeat;
  o.write_outputs = false;
  return o;
}

}  // namespace

TEST_SUITE("workload") {

TEST_CASE("syntax") {
  auto s = parse_spec_syntax(
      "# leading comment\n"
      "workload \"demo\"\n"
      "input a : matrix @ \"a.bin\"   # trailing\n"
      "input g = generate.graph(vertices=16, edges=40, model=uniform)\n"
      "node b = matrix.matmul(a, a)\n"
      "output b @ \"b.bin\"\n");
  CHECK(s.name == "demo");
  REQUIRE(s.inputs.size() == 2);
  CHECK(s.inputs[0].declared_kind == "matrix");
  CHECK(s.inputs[0].path == "a.bin");
  CHECK(s.inputs[1].generator == "graph");
  CHECK(s.inputs[1].gen_params.at("edges") == "40");
  REQUIRE(s.invocations.size() == 1);
  CHECK(s.invocations[0].line == 5);
  CHECK(s.invocations[0].operands == std::vector<std::string>{"a", "a"});
  CHECK(s.outputs[0].line == 6);

  try {
    parse_spec_syntax("workload \"x\"\nnode b = matrix.matmul(a, \n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_spec_syntax("frobnicate x\n"), ParseError);
  CHECK_THROWS_AS(parse_spec_syntax("node b = matrix.add(k=1, a)\n"), ParseError);
}

TEST_CASE("undefined operand names the id and line") {
  auto ds = diagnostics_of(
      "workload \"w\"\n"
      "input a : matrix @ \"a.bin\"\n"
      "node b = matrix.add(a, ghost)\n");
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].line == 3);
  CHECK(ds[0].id == "ghost");
  CHECK(ds[0].to_string().find("line 3: undefined dataset id ghost") == 0);
}

TEST_CASE("cycles are rejected") {
  auto self = diagnostics_of(
      "workload \"w\"\n"
      "input a : matrix @ \"a.bin\"\n"
      "node b = matrix.add(a, b)\n");
  CHECK(mentions(self, "cycle detected", 3));

  auto two = diagnostics_of(
      "workload \"w\"\n"
      "input a : matrix @ \"a.bin\"\n"
      "node b = matrix.add(a, c)\n"
      "node c = matrix.add(a, b)\n");
  CHECK(mentions(two, "cycle detected", 3));

  auto forward = diagnostics_of(
      "workload \"w\"\n"
      "input a : matrix @ \"a.bin\"\n"
      "node c = matrix.add(a, b)\n"
      "node b = matrix.add(a, a)\n");
  CHECK(mentions(forward, "used before definition", 3));
  CHECK_FALSE(mentions(forward, "cycle", 3));
}

TEST_CASE("arity, kinds, motifs and parameters") {
  auto ds = diagnostics_of(
      "workload \"w\"\n"
      "input a : matrix @ \"a.bin\"\n"
      "input g : graph @ \"g.bin\"\n"
      "node x = matrix.matmul(a)\n"
      "node y = sort.sort(g)\n"
      "node z = matrix.frobnicate(a)\n"
      "node p = graph.pagerank(g, damping=high)\n"
      "node a = matrix.add(a, a)\n");
  CHECK(mentions(ds, "expects 2 operand(s), got 1", 4));
  CHECK(mentions(ds, "kind mismatch", 5));
  CHECK(mentions(ds, "unknown motif", 6));
  CHECK(mentions(ds, "damping", 7));
  CHECK(mentions(ds, "duplicate dataset id", 8));
  for (std::size_t i = 1; i < ds.size(); ++i) CHECK(ds[i - 1].line <= ds[i].line);

  CHECK(mentions(diagnostics_of("input a : matrix @ \"a.bin\"\n"), "missing 'workload", 0));
}

TEST_CASE("kind propagates through results") {
  auto ds = diagnostics_of(
      "workload \"w\"\n"
      "input g : graph @ \"g.bin\"\n"
      "node r = graph.pagerank(g)\n"
      "node s = sort.sort(r, key=1)\n"
      "node t = set.grep(s, pattern=x)\n");
  REQUIRE(ds.size() == 1);
  CHECK(mentions(ds, "kind mismatch", 5));
}

TEST_CASE("shipped specs validate") {
  for (const char* name : {"sift-like", "pagerank", "index", "cnn-forward"}) {
    CAPTURE(name);
    auto s = load_spec(kSpecs / (std::string(name) + ".spec"));
    CHECK(s.name == name);
    CHECK_FALSE(s.outputs.empty());
  }
}

TEST_CASE("sift-like: six invocations over five families, matches the manual composition") {
  auto spec = load_spec(kSpecs / "sift-like.spec");
  CHECK(spec.invocations.size() == 6);
  std::set<std::string> families;
  for (const auto& inv : spec.invocations) families.insert(inv.motif.substr(0, inv.motif.find('.')));
  CHECK(families.size() == 5);

  auto report = execute(spec, in_memory());
  REQUIRE(report.outputs.count("keypoints") == 1);
  const auto manual = fixtures::manual_sift();
  CHECK(checksum_dataset(report.outputs.at("keypoints")) == checksum_dataset(manual));
  CHECK(report.repeats[0].output_checksums.at("keypoints") ==
        format_digest(checksum_dataset(manual)));

  double sum = 0;
  for (const auto& [f, v] : report.family_fractions) sum += v;
  CHECK(std::fabs(sum - 1.0) < 1e-9);
  CHECK(report.family_fractions.size() == 5);
}

TEST_CASE("single motif gets the whole fraction") {
  auto spec = parse_spec(
      "workload \"one\"\n"
      "input t = generate.text(bytes=2000, seed=3)\n"
      "node s = sort.sort(t)\n"
      "output s @ \"s.txt\"\n");
  auto r = execute(spec, in_memory());
  REQUIRE(r.family_fractions.size() == 1);
  CHECK(r.family_fractions.at("sort") == 1.0);
}

TEST_CASE("repeats and random topological orders give identical outputs") {
  auto spec = load_spec(kSpecs / "index.spec");
  auto base = execute(spec, in_memory(3));
  REQUIRE(base.repeats.size() == 3);
  for (const auto& rep : base.repeats) {
    CHECK(rep.invocations.size() == spec.invocations.size());
    CHECK(rep.output_checksums == base.repeats[0].output_checksums);
  }
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto o = in_memory(2);
    o.order_seed = seed;
    auto shuffled = execute(spec, o);
    for (const auto& rep : shuffled.repeats)
      CHECK(rep.output_checksums == base.repeats[0].output_checksums);
  }
}

TEST_CASE("outputs are written and readable") {
  auto dir = fs::temp_directory_path() / "motifbench-unit" / "wl-out";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto spec = load_spec(kSpecs / "sift-like.spec");
  ExecuteOptions o;
  o.out_dir = dir;
  auto r = execute(spec, o);
  auto back = load_dataset(dir / "sift-keypoints.kv");
  CHECK(format_digest(checksum_dataset(back)) == r.repeats[0].output_checksums.at("keypoints"));
  auto j = r.to_json();
  CHECK(j["workload"] == "sift-like");
  CHECK(j["repeats"].size() == 1);
  CHECK(j["repeats"][0]["invocations"].size() == 6);
  CHECK(j.contains("family_fractions"));
}

TEST_CASE("input files resolve against the workload file directory") {
  auto dir = fs::temp_directory_path() / "motifbench-unit" / "wl-in";
  fs::create_directories(dir);
  save_dataset(Dataset(Matrix(2, 2, {1, 2, 3, 4})), dir / "a.bin");
  auto spec = parse_spec(
      "workload \"files\"\n"
      "input a : matrix @ \"a.bin\"\n"
      "node b = matrix.matmul(a, a)\n"
      "output b @ \"b.bin\"\n",
      dir);
  auto r = execute(spec, in_memory());
  CHECK(r.outputs.at("b").as<Matrix>() == Matrix(2, 2, {7, 10, 15, 22}));

  auto wrong = parse_spec(
      "workload \"files\"\n"
      "input a : text @ \"a.bin\"\n"
      "node b = sort.sort(a)\n"
      "output b @ \"b.txt\"\n",
      dir);
  CHECK_THROWS_AS(execute(wrong, in_memory()), Error);
}

TEST_CASE("kernel failures name the node") {
  auto spec = parse_spec(
      "workload \"bad\"\n"
      "input a = generate.matrix(rows=2, cols=3)\n"
      "node b = matrix.matmul(a, a)\n"
      "output b @ \"b.bin\"\n");
  CHECK_THROWS_WITH_AS(execute(spec, in_memory()), doctest::Contains("node b"), Error);
}

TEST_CASE("family fractions fall back to counts") {
  RepeatReport r;
  r.invocations = {{"a", "sort.sort", 0, 0, 0}, {"b", "sort.sort", 0, 0, 0},
                   {"c", "matrix.add", 0, 0, 0}, {"d", "set.grep", 0, 0, 0}};
  auto f = family_fractions({r});
  CHECK(f.at("sort") == doctest::Approx(0.5));
  CHECK(f.at("matrix") == doctest::Approx(0.25));
}

}  // TEST_SUITE
