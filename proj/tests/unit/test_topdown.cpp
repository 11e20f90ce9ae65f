#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "motifbench/dataset_io.hpp"
#include "motifbench/rng.hpp"
#include "motifbench/topdown.hpp"
#include "fixtures.hpp"

using namespace motifbench;
using namespace motifbench::topdown;
namespace fs = std::filesystem;

namespace {

double level1_sum(const BreakdownNode& root) {
  double sum = 0;
  for (const auto& c : root.children) sum += c.fraction;
  return sum;
}

std::size_t count_nodes(const TreeNode& n) {
  std::size_t c = 1;
  for (const auto& k : n.children) c += count_nodes(k);
  return c;
}

const TreeNode& child(const TreeNode& n, const std::string& name) {
  for (const auto& c : n.children)
    if (c.name == name) return c;
  FAIL("no child " << name << " under " << n.name);
  return n;
}

std::vector<std::string> child_names(const TreeNode& n) {
  std::vector<std::string> v;
  for (const auto& c : n.children) v.push_back(c.name);
  return v;
}

}  // namespace

TEST_SUITE("topdown") {

TEST_CASE("worked level-1 example") {
  auto s = fixtures::zero_sample(4, 100,
                       {{"uops_retired", 92}, {"uops_issued", 100}, {"recovery_cycles", 2},
                        {"idq_uops_not_delivered", 120}});
  auto b = evaluate_tree(s, builtin_tree());
  CHECK(b.find("Retiring")->fraction == doctest::Approx(0.23).epsilon(1e-12));
  CHECK(b.find("Bad_Speculation")->fraction == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(b.find("Frontend_Bound")->fraction == doctest::Approx(0.30).epsilon(1e-12));
  CHECK(b.find("Backend_Bound")->fraction == doctest::Approx(0.43).epsilon(1e-12));
}

TEST_CASE("ideal pipeline retires every slot") {
  auto s = fixtures::zero_sample(4, 1000, {{"uops_retired", 4000}, {"uops_issued", 4000}});
  auto b = evaluate_tree(s, builtin_tree());
  CHECK(b.find("Retiring")->fraction == 1.0);
  CHECK(b.find("Bad_Speculation")->fraction == 0.0);
  CHECK(b.find("Frontend_Bound")->fraction == 0.0);
  CHECK(b.find("Backend_Bound")->fraction == 0.0);
  CHECK(b.find("Base")->fraction == 1.0);
}

TEST_CASE("golden retiring fractions") {
  auto big = fixtures::zero_sample(4, 250, {{"uops_retired", 229}, {"uops_issued", 229}});
  CHECK(evaluate_tree(big, builtin_tree()).find("Retiring")->fraction == 0.229);
  auto trad = fixtures::zero_sample(4, 250, {{"uops_retired", 398}, {"uops_issued", 398}});
  CHECK(evaluate_tree(trad, builtin_tree()).find("Retiring")->fraction == 0.398);
}

TEST_CASE("closure and child sums on random valid samples") {
  SplitMix64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    auto s = fixtures::random_valid(rng);
    auto b = evaluate_tree(s, builtin_tree());
    CHECK(std::fabs(level1_sum(b) - 1.0) < 1e-9);
    auto problems = check_breakdown(b, 0.02);
    CHECK_MESSAGE(problems.empty(), (problems.empty() ? "" : problems.front()));
  }
}

TEST_CASE("check_breakdown flags inconsistent trees") {
  BreakdownNode root{"Total", 1.0, true, false, {{"A", 0.7, true, false, {}}, {"B", 0.5, true, false, {}}}};
  CHECK(check_breakdown(root).size() == 1);
  root.children[1].fraction = 0.3;
  CHECK(check_breakdown(root).empty());
  root.children[0].fraction = -0.2;
  CHECK(check_breakdown(root).size() == 1);
  root.children[0].negative_artifact = true;
  CHECK(check_breakdown(root).empty());
}

TEST_CASE("builtin tree shape") {
  const auto& t = builtin_tree();
  REQUIRE(t.roots.size() == 1);
  const auto& total = t.roots[0];
  CHECK(child_names(total) ==
        std::vector<std::string>{"Retiring", "Bad_Speculation", "Frontend_Bound", "Backend_Bound"});
  const auto& fe = child(total, "Frontend_Bound");
  CHECK(child(fe, "Frontend_Latency").children.size() == 6);
  CHECK(child(fe, "Frontend_Bandwidth").children.size() == 3);
  const auto& be = child(total, "Backend_Bound");
  CHECK(child(be, "Core_Bound").children.size() == 2);
  const auto& mem = child(be, "Memory_Bound");
  CHECK(mem.children.size() == 5);
  CHECK(child(mem, "DRAM_Bound").children.size() == 4);
  CHECK(count_nodes(total) == 33);
  CHECK_NOTHROW(check_tree(t));
}

TEST_CASE("tree json round trip and validation") {
  auto j = tree_to_json(builtin_tree());
  auto back = tree_from_json(nlohmann::json::parse(j.dump()));
  CHECK(tree_to_json(back) == j);

  auto dup = nlohmann::json::parse(R"([{"name":"A","formula":"x"},{"name":"A","formula":"y"}])");
  CHECK_THROWS_AS(tree_from_json(dup), InvalidArgument);
  auto later = nlohmann::json::parse(R"([{"name":"A","formula":"B"},{"name":"B","formula":"y"}])");
  CHECK_THROWS_AS(tree_from_json(later), InvalidArgument);
  auto meta = nlohmann::json::parse(R"({"name":"A","formula":"meta.speed"})");
  CHECK_THROWS_AS(tree_from_json(meta), InvalidArgument);
  auto deep = nlohmann::json::parse(
      R"({"name":"a","formula":"1","children":[{"name":"b","formula":"1","children":[{"name":"c","formula":"1","children":[{"name":"d","formula":"1","children":[{"name":"e","formula":"1","children":[{"name":"f","formula":"1"}]}]}]}]}]})");
  CHECK_THROWS_AS(tree_from_json(deep), InvalidArgument);
}

TEST_CASE("custom level-1 tree wraps multiple roots") {
  auto j = nlohmann::json::parse(R"j([
    {"name":"Retiring","formula":"uops_retired / (meta.width * meta.cycles)"},
    {"name":"Rest","formula":"1 - Retiring"}])j");
  auto tree = tree_from_json(j);
  EventSample s;
  s.cycles = 10;
  s.events = {{"uops_retired", 10}, {"cycles", 10}};
  auto b = evaluate_tree(s, tree);
  CHECK(b.name == "Total");
  CHECK(b.find("Rest")->fraction == doctest::Approx(0.75));
}

TEST_CASE("analysis of several samples") {
  SplitMix64 rng(77);
  auto base = fixtures::random_valid(rng);
  std::vector<EventSample> samples;
  for (double scale : {1.0, 1.5, 2.0}) {
    auto s = base;
    for (auto& [k, v] : s.events) v *= scale;
    s.cycles *= scale;
    samples.push_back(s);
  }
  auto a = analyze(samples, builtin_tree(), "builtin", "w");
  CHECK(a.sample.label == "w");
  CHECK(a.sample_count == 3);
  auto direct = evaluate_tree(average_samples(samples), builtin_tree());
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(a.breakdown.children[i].fraction == doctest::Approx(direct.children[i].fraction).epsilon(1e-12));
  REQUIRE(a.ipc);
  CHECK(*a.ipc == doctest::Approx(ipc(a.sample)));
  auto j = a.to_json();
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"label", "samples", "width", "cycles", "tree", "breakdown",
                                         "ipc", "mlp", "ms_uops_ratio", "consistency", "events"});
  CHECK(a.metric_vector().names.size() == a.metric_vector().values.size());

  auto bare = fixtures::zero_sample(4, 100, {{"uops_retired", 100}, {"uops_issued", 100}});
  bare.events.erase("instructions_retired");
  auto b = analyze({bare}, builtin_tree());
  CHECK_FALSE(b.ipc);
  CHECK(b.to_json()["ipc"].is_null());
  CHECK_THROWS_AS(b.metric_vector(), MissingEvents);
}

TEST_CASE("missing events are all listed") {
  EventSample s;
  s.cycles = 100;
  s.events = {{"cycles", 100}, {"uops_retired", 50}};
  try {
    evaluate_tree(s, builtin_tree());
    FAIL("expected MissingEvents");
  } catch (const MissingEvents& e) {
    CHECK(e.names().size() == required_events(builtin_tree()).size() - 1);
    CHECK(std::string(e.what()).find("uops_issued") != std::string::npos);
  }
  s.cycles = 0;
  CHECK_THROWS_AS(evaluate_tree(fixtures::zero_sample(4, 0, {}), builtin_tree()), InvalidArgument);
}

TEST_CASE("ipc, mlp and microcode ratio") {
  EventSample s;
  s.cycles = 200;
  s.events = {{"instructions_retired", 300},
              {"l1d_pend_miss_occupancy", 90},
              {"l1d_pend_miss_cycles", 30},
              {"ms_uops", 5},
              {"uops_retired", 50}};
  CHECK(ipc(s) == 1.5);
  CHECK(mlp(s) == 3.0);
  CHECK(ms_uops_ratio(s) == 0.1);
  s.events["l1d_pend_miss_cycles"] = 0;
  CHECK(mlp(s) == 0.0);
  s.events.erase("instructions_retired");
  CHECK_THROWS_AS(ipc(s), MissingEvents);
}

TEST_CASE("more frontend stall never lowers Frontend_Bound") {
  SplitMix64 rng(8);
  auto s = fixtures::random_valid(rng);
  double prev = -1;
  for (double extra = 0; extra <= 0.5; extra += 0.05) {
    auto t = s;
    t.events["idq_uops_not_delivered"] += extra * t.width * t.cycles * 0.1;
    const double f = evaluate_tree(t, builtin_tree()).find("Frontend_Bound")->fraction;
    CHECK(f >= prev);
    prev = f;
  }
}

TEST_CASE("dump parsing") {
  auto s = parse_sample(
      "# a comment\n"
      "#meta width=4 label=demo\n"
      "cycles,1000\n"
      "uops_retired,2000\n"
      "\n"
      "1234,,instructions_retired,1000,100.00,,\n"
      "<not counted>,,ms_uops,0,0,,\n");
  CHECK(s.width == 4);
  CHECK(s.cycles == 1000);
  CHECK(s.label == "demo");
  CHECK(s.events.at("uops_retired") == 2000);
  CHECK(s.events.at("instructions_retired") == 1234);
  CHECK(s.events.count("ms_uops") == 0);

  try {
    parse_sample("cycles,1\nx,1\nx,2\n");
    FAIL("expected duplicate error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("x") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_sample("x,1\n"), Error);
  CHECK_THROWS_AS(parse_sample("#meta cycles=10\ncycles,11\n"), Error);
  CHECK(parse_sample("#meta cycles=10\n").events.at("cycles") == 10);
}

TEST_CASE("mapping renames platform counters") {
  auto m = parse_mapping(
      "abstract_name,platform_name\n"
      "# haswell\n"
      "uops_retired,UOPS_RETIRED.RETIRE_SLOTS\n"
      "cycles,CPU_CLK_UNHALTED.THREAD\n");
  CHECK(m.size() == 2);
  auto s = parse_sample("CPU_CLK_UNHALTED.THREAD,100\nUOPS_RETIRED.RETIRE_SLOTS,80\n", &m);
  CHECK(s.cycles == 100);
  CHECK(s.events.at("uops_retired") == 80);
  CHECK_THROWS_AS(parse_mapping("a,b\na,c\n"), Error);
}

TEST_CASE("shipped haswell mapping covers every builtin event") {
  auto m = load_mapping(fs::path(MOTIFBENCH_CONFIG_DIR) / "haswell-mapping.csv");
  for (const auto& e : required_events(builtin_tree())) CHECK_MESSAGE(m.count(e) == 1, e);
  for (const char* e : {"cycles", "instructions_retired", "l1d_pend_miss_occupancy",
                        "l1d_pend_miss_cycles", "ms_uops"})
    CHECK_MESSAGE(m.count(e) == 1, e);
}

TEST_CASE("sample files and averaging") {
  auto dir = fs::temp_directory_path() / "motifbench-unit";
  fs::create_directories(dir);
  write_file(dir / "run1.csv", "cycles,100\nuops_retired,40\n");
  write_file(dir / "run2.csv", "cycles,300\nuops_retired,60\n");
  auto a = load_sample(dir / "run1.csv");
  CHECK(a.label == "run1");
  auto avg = average_samples({a, load_sample(dir / "run2.csv")});
  CHECK(avg.cycles == 200);
  CHECK(avg.events.at("uops_retired") == 50);
  auto b = a;
  b.events["other"] = 1;
  CHECK_THROWS_AS(average_samples({a, b}), InvalidArgument);
}

TEST_CASE("collector runs a command template") {
  auto s = collect_sample("printf 'cycles,{duration}\\nuops_retired,7\\n'", 5);
  CHECK(s.cycles == 5);
  CHECK(s.events.at("uops_retired") == 7);
  CHECK_THROWS_AS(collect_sample("exit 3", 1), IoError);
}

TEST_CASE("metric vector layout") {
  SplitMix64 rng(1);
  auto s = fixtures::random_valid(rng);
  auto b = evaluate_tree(s, builtin_tree());
  auto v = to_metric_vector(b, ipc(s), mlp(s), "x", {{"MS_Uops_Ratio", ms_uops_ratio(s)}});
  CHECK(v.names.size() == count_nodes(builtin_tree().roots[0]) + 3);
  CHECK(v.names.size() == v.values.size());
  CHECK(v.names[0] == "Total");
  CHECK(v.names[1] == "Retiring");
  CHECK(v.names.back() == "MS_Uops_Ratio");
  auto j = b.to_json();
  CHECK(j["name"] == "Total");
  CHECK(j["children"].size() == 4);
}

}  // TEST_SUITE
