#include <unistd.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "motifbench/checksum.hpp"
#include "motifbench/datagen.hpp"
#include "motifbench/dataset_io.hpp"
#include "motifbench/error.hpp"
#include "motifbench/registry.hpp"
#include "motifbench/similarity.hpp"
#include "motifbench/strings.hpp"
#include "motifbench/topdown.hpp"
#include "motifbench/workload.hpp"

namespace fs = std::filesystem;
using namespace motifbench;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kUsage = 2, kInvalid = 3 };

struct UsageError : Error {
  using Error::Error;
};

struct ValidationFailed : Error {
  using Error::Error;
};

struct Globals {
  bool quiet = false;
  bool csv = false;
};
Globals g;

void say(const std::string& line) {
  if (!g.quiet) std::cout << line << '\n';
}

void write_json(const fs::path& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---- generate ---------------------------------------------------------------

struct GenFlags {
  std::uint64_t seed = 0;
  std::string out;
  std::uint64_t bytes = 0;
  std::string corpus;
  std::uint64_t vertices = 0, edges = 0;
  std::string model = "rmat";
  bool undirected = false;
  std::size_t rows = 0, cols = 0;
  std::string dist = "uniform:0,1";
  std::string shape;
  bool text_matrix = false;
  std::uint64_t orders = 0, items = 0;
  std::string manifest;
};

json report_file(const fs::path& path, const Dataset& d) {
  const auto digest = format_digest(checksum_dataset(d));
  const auto size = fs::file_size(path);
  if (g.csv) {
    say(path.string() + "," + digest + "," + std::to_string(size));
  } else {
    say("checksum " + digest + "  bytes " + std::to_string(size) + "  " + path.string());
  }
  json j;
  j["path"] = path.string();
  j["kind"] = std::string(kind_name(d.kind()));
  j["checksum"] = digest;
  j["bytes"] = size;
  return j;
}

json provenance_json(const Dataset& d) {
  json j;
  const auto& p = *d.provenance();
  j["generator"] = p.generator;
  j["seed"] = p.seed;
  j["parameters"] = json::object();
  for (const auto& [k, v] : p.parameters) j["parameters"][k] = v;
  return j;
}

Dataset generate_one(const std::string& kind, const GenFlags& f) {
  std::map<std::string, std::string> p{{"seed", std::to_string(f.seed)}};
  if (kind == "text") {
    p["bytes"] = std::to_string(f.bytes);
    if (!f.corpus.empty()) p["corpus"] = f.corpus;
  } else if (kind == "graph") {
    p["vertices"] = std::to_string(f.vertices);
    p["edges"] = std::to_string(f.edges);
    p["directed"] = f.undirected ? "0" : "1";
    const auto colon = f.model.find(':');
    p["model"] = f.model.substr(0, colon);
    if (colon != std::string::npos) {
      const auto parts = split(std::string_view(f.model).substr(colon + 1), ',');
      if (parts.size() != 4) throw UsageError("--model rmat:A,B,C,D needs four probabilities");
      const char* keys[] = {"a", "b", "c", "d"};
      for (int i = 0; i < 4; ++i) p[keys[i]] = std::string(trim(parts[i]));
    }
  } else if (kind == "matrix") {
    p["rows"] = std::to_string(f.rows);
    p["cols"] = std::to_string(f.cols);
    p["dist"] = f.dist;
  } else if (kind == "tensor") {
    p["shape"] = f.shape;
    p["dist"] = f.dist;
  }
  datagen::GenRequest req;
  try {
    req = datagen::parse_gen_request(kind, p);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  try {
    return datagen::run_gen_request(req);
  } catch (const InvalidArgument& e) {
    // Parameter combinations only the generator can judge, e.g. RMAT sizes.
    throw UsageError(e.what());
  }
}

int cmd_generate(const std::string& kind, const GenFlags& f) {
  json manifest;
  manifest["files"] = json::array();
  if (kind == "table") {
    if (f.orders == 0 || f.items == 0) throw UsageError("--orders and --items must be positive");
    const fs::path dir = f.out;
    fs::create_directories(dir);
    auto t = datagen::gen_table({f.orders, f.items, f.seed});
    save_dataset(t.order, dir / "order.table");
    save_dataset(t.item, dir / "item.table");
    manifest["provenance"] = provenance_json(t.order);
    manifest["files"].push_back(report_file(dir / "order.table", t.order));
    manifest["files"].push_back(report_file(dir / "item.table", t.item));
  } else {
    auto d = generate_one(kind, f);
    save_dataset(d, f.out, SaveOptions{.text_matrix = f.text_matrix});
    manifest["provenance"] = provenance_json(d);
    manifest["files"].push_back(report_file(f.out, d));
  }
  if (!f.manifest.empty()) write_json(f.manifest, manifest);
  return kOk;
}

// ---- run --------------------------------------------------------------------

struct RunFlags {
  std::string spec;
  std::size_t repeat = 1;
  std::string report;
  std::string counters;
  std::string mapping;
  double duration = 1.0;
  std::string out_dir = ".";
  std::optional<std::uint64_t> order_seed;
  bool no_outputs = false;
};

[[noreturn]] void fail_validation(const std::string& path, const workload::SpecError& e) {
  for (const auto& d : e.diagnostics()) std::cerr << path << ": " << d.to_string() << '\n';
  throw ValidationFailed(std::to_string(e.diagnostics().size()) + " diagnostic(s)");
}

workload::WorkloadSpec load_or_fail(const std::string& path) {
  try {
    return workload::load_spec(path);
  } catch (const workload::SpecError& e) {
    fail_validation(path, e);
  } catch (const ParseError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    throw ValidationFailed("syntax error");
  }
}

int cmd_run(const RunFlags& f) {
  std::optional<topdown::EventMapping> mapping;
  if (!f.mapping.empty()) mapping = topdown::load_mapping(f.mapping);
  const topdown::EventMapping* map_ptr = mapping ? &*mapping : nullptr;

  enum class Source { None, Files, Command } source = Source::None;
  std::vector<std::string> counter_files;
  std::string counter_cmd;
  if (!f.counters.empty()) {
    if (starts_with(f.counters, "file:")) {
      source = Source::Files;
      for (auto part : split(std::string_view(f.counters).substr(5), ','))
        if (!trim(part).empty()) counter_files.emplace_back(trim(part));
      if (counter_files.size() != f.repeat) {
        throw UsageError("--counters file: lists " + std::to_string(counter_files.size()) +
                         " dump(s) for " + std::to_string(f.repeat) + " repeat(s)");
      }
    } else if (starts_with(f.counters, "cmd:")) {
      source = Source::Command;
      counter_cmd = f.counters.substr(4);
      if (counter_cmd.empty()) throw UsageError("--counters cmd: needs a command template");
    } else {
      throw UsageError("--counters must start with file: or cmd:");
    }
  }

  auto spec = load_or_fail(f.spec);

  workload::ExecuteOptions opt;
  opt.repeat = f.repeat;
  opt.order_seed = f.order_seed;
  opt.write_outputs = !f.no_outputs;
  opt.out_dir = f.out_dir;
  if (opt.write_outputs) fs::create_directories(opt.out_dir);

  std::vector<topdown::EventSample> samples;
  std::future<topdown::EventSample> pending;
  if (source == Source::Command) {
    const long pid = static_cast<long>(::getpid());
    opt.on_repeat_start = [&](std::size_t) {
      pending = std::async(std::launch::async, [&, pid] {
        return topdown::collect_sample(counter_cmd, f.duration, pid, map_ptr);
      });
    };
    opt.on_repeat_end = [&](std::size_t rep) {
      auto s = pending.get();
      if (s.label.empty()) s.label = spec.name + "#" + std::to_string(rep + 1);
      samples.push_back(std::move(s));
    };
  }

  auto report = workload::execute(spec, opt);

  if (source == Source::Files) {
    for (const auto& path : counter_files) samples.push_back(topdown::load_sample(path, map_ptr));
  }

  json j = report.to_json();
  if (!samples.empty()) {
    json c;
    c["source"] = source == Source::Files ? "file" : "cmd";
    c["samples"] = json::array();
    for (const auto& s : samples) c["samples"].push_back(s.to_json());
    c["average"] = topdown::average_samples(samples).to_json();
    j["counters"] = c;
  }
  if (!f.report.empty()) write_json(f.report, j);

  if (g.csv) {
    say("repeat,id,motif,wall_ns,in_bytes,out_bytes");
    for (std::size_t r = 0; r < report.repeats.size(); ++r)
      for (const auto& inv : report.repeats[r].invocations)
        say(std::to_string(r + 1) + "," + inv.id + "," + inv.motif + "," +
            std::to_string(inv.wall_ns) + "," + std::to_string(inv.in_bytes) + "," +
            std::to_string(inv.out_bytes));
    return kOk;
  }
  say("workload " + report.workload + ": " + std::to_string(report.repeats.size()) +
      " repeat(s), " + std::to_string(spec.invocations.size()) + " invocation(s) each");
  for (std::size_t r = 0; r < report.repeats.size(); ++r)
    say("  repeat " + std::to_string(r + 1) + ": " +
        fixed(static_cast<double>(report.repeats[r].total_ns) / 1e6) + " ms");
  for (const auto& [fam, frac] : report.family_fractions) say("  " + fam + " " + fixed(frac));
  for (const auto& [id, digest] : report.repeats.back().output_checksums)
    say("  output " + id + " " + digest);
  return kOk;
}

// ---- analyze ----------------------------------------------------------------

struct AnalyzeFlags {
  std::vector<std::string> events;
  std::string tree = "builtin";
  std::string mapping;
  std::optional<double> width;
  std::string label;
  std::string out;
  std::string metrics;
};

int cmd_analyze(const AnalyzeFlags& f) {
  std::optional<topdown::EventMapping> mapping;
  if (!f.mapping.empty()) mapping = topdown::load_mapping(f.mapping);
  const topdown::MetricTree tree =
      f.tree == "builtin" ? topdown::builtin_tree() : topdown::load_tree(f.tree);

  std::vector<topdown::EventSample> samples;
  for (const auto& path : f.events) {
    auto s = topdown::load_sample(path, mapping ? &*mapping : nullptr);
    if (f.width) s.width = *f.width;
    samples.push_back(std::move(s));
  }
  const std::string label = !f.label.empty()       ? f.label
                            : samples.size() == 1   ? samples[0].label
                                                    : fs::path(f.events[0]).stem().string();
  const auto a = topdown::analyze(samples, tree,
                                  f.tree == "builtin" ? "builtin" : fs::path(f.tree).string(),
                                  label);
  if (!f.out.empty()) write_json(f.out, a.to_json());
  if (!f.metrics.empty()) similarity::append_metric_csv(f.metrics, a.metric_vector());

  const auto& b = a.breakdown;
  const auto& sample = a.sample;
  const auto& ipc = a.ipc;
  const auto& mlp = a.mlp;
  auto opt_text = [](const std::optional<double>& v) { return v ? fixed(*v) : std::string("n/a"); };
  if (g.csv) {
    say("metric,value");
    for (const auto& c : b.children) say(c.name + "," + fixed(c.fraction, 6));
    say("IPC," + (ipc ? fixed(*ipc, 6) : ""));
    say("MLP," + (mlp ? fixed(*mlp, 6) : ""));
    return kOk;
  }
  say(sample.label + " (" + std::to_string(samples.size()) + " sample(s), width " +
      fixed(sample.width, 0) + ")");
  for (const auto& c : b.children) {
    std::string name = c.name;
    name.resize(std::max<std::size_t>(name.size(), 18), ' ');
    say("  " + name + fixed(c.fraction));
  }
  say("  IPC               " + opt_text(ipc));
  say("  MLP               " + opt_text(mlp));
  for (const auto& p : a.consistency) std::cerr << "warning: " << p << '\n';
  return kOk;
}

// ---- cluster ----------------------------------------------------------------

struct ClusterFlags {
  std::string metrics;
  double variance = 0.9;
  std::string linkage = "average";
  std::optional<std::size_t> cut;
  bool no_standardize = false;
  std::string out;
};

int cmd_cluster(const ClusterFlags& f) {
  const auto table = similarity::load_metric_csv(f.metrics);
  similarity::ClusterOptions opt;
  opt.standardize = !f.no_standardize;
  opt.variance_threshold = f.variance;
  opt.linkage = *similarity::parse_linkage(f.linkage);
  if (f.cut && (*f.cut < 1 || *f.cut > table.rows.size())) {
    throw UsageError("--cut must be between 1 and the number of rows (" +
                     std::to_string(table.rows.size()) + ")");
  }
  opt.cut = f.cut;
  const auto r = similarity::cluster_workloads(table, opt);
  const auto text = similarity::render_text(r.dendrogram, table.labels);
  if (!f.out.empty()) write_json(f.out, r.to_json());

  if (g.csv) {
    say("step,a,b,distance,size");
    for (std::size_t i = 0; i < r.dendrogram.merges.size(); ++i) {
      const auto& m = r.dendrogram.merges[i];
      say(std::to_string(i + 1) + "," + std::to_string(m.a) + "," + std::to_string(m.b) + "," +
          format_double(m.distance) + "," + std::to_string(m.size));
    }
    return kOk;
  }
  say(std::to_string(table.rows.size()) + " workload(s), " + std::to_string(r.pca.k) +
      " principal component(s) kept, " + std::string(similarity::linkage_name(opt.linkage)) +
      " linkage");
  if (!g.quiet) std::cout << text;
  if (!r.assignment.empty()) {
    for (std::size_t i = 0; i < table.labels.size(); ++i)
      say("  cluster " + std::to_string(r.assignment[i] + 1) + "  " + table.labels[i]);
  }
  return kOk;
}

// ---- validate / list-motifs -------------------------------------------------

struct ValidateFlags {
  std::string spec;
  std::string tables;
  std::vector<std::string> data;
};

int cmd_validate(const ValidateFlags& f) {
  if (f.spec.empty() && f.tables.empty() && f.data.empty())
    throw UsageError("validate needs --spec, --tables or --data");
  bool ok = true;
  if (!f.spec.empty()) {
    try {
      auto s = load_or_fail(f.spec);
      say(f.spec + ": ok (" + std::to_string(s.inputs.size()) + " input(s), " +
          std::to_string(s.invocations.size()) + " invocation(s), " +
          std::to_string(s.outputs.size()) + " output(s))");
    } catch (const ValidationFailed&) {
      ok = false;
    }
  }
  if (!f.tables.empty()) {
    const fs::path dir = f.tables;
    const auto order = load_dataset(dir / "order.table");
    const auto item = load_dataset(dir / "item.table");
    const auto problems = datagen::check_order_item(order.as<Table>(), item.as<Table>());
    for (const auto& p : problems) std::cerr << dir.string() << ": " << p << '\n';
    if (problems.empty()) {
      say(dir.string() + ": ORDER/ITEM integrity ok (" +
          std::to_string(order.as<Table>().row_count()) + " orders, " +
          std::to_string(item.as<Table>().row_count()) + " items)");
    } else {
      ok = false;
    }
  }
  for (const auto& path : f.data) {
    try {
      const auto d = load_dataset(path);
      say(path + ": " + std::string(kind_name(d.kind())) + ", checksum " +
          format_digest(checksum_dataset(d)));
    } catch (const ParseError& e) {
      std::cerr << e.what() << '\n';
      ok = false;
    } catch (const InvalidArgument& e) {
      std::cerr << e.what() << '\n';
      ok = false;
    }
  }
  return ok ? kOk : kInvalid;
}

std::string kinds_text(const std::vector<PayloadKind>& ks) {
  std::string s;
  for (auto k : ks) {
    if (!s.empty()) s += "|";
    s += kind_name(k);
  }
  return s;
}

int cmd_list_motifs() {
  for (auto fam : kAllFamilies) {
    if (!g.csv) say(std::string(family_name(fam)));
    for (const auto& k : kernel_registry()) {
      if (k.id.family != fam) continue;
      std::string ops;
      for (const auto& o : k.operands) ops += (ops.empty() ? "" : ", ") + kinds_text(o);
      const std::string out = k.output ? std::string(kind_name(*k.output)) : kinds_text(k.operands[0]);
      if (g.csv) {
        say(k.id.name() + "," + std::to_string(k.arity()) + ",\"" + ops + " -> " + out + "\"");
      } else {
        say("  " + k.id.name() + " - " + std::to_string(k.arity()) + " - " + ops + " -> " + out);
      }
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-motif benchmark toolkit: generate data, run motif workloads, "
               "analyze pipeline-slot breakdowns and cluster workloads."};
  app.name("motifbench");
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", g.quiet, "Suppress human-readable summaries");
  app.add_flag("--csv", g.csv, "Print summaries as CSV");

  std::function<int()> action;

  GenFlags gf;
  auto* gen = app.add_subcommand("generate", "Generate a seeded dataset");
  gen->require_subcommand(1);
  auto seed_and_out = [&](CLI::App* c, bool dir) {
    c->add_option("--rng-seed", gf.seed, "Generator seed");
    c->add_option("-o,--output", gf.out, dir ? "Output directory" : "Output file")->required();
    c->add_option("--manifest", gf.manifest, "Write a JSON manifest of the generated files");
  };
  auto* gtext = gen->add_subcommand("text", "Bigram text corpus");
  gtext->add_option("--bytes", gf.bytes, "Target size in bytes")->required();
  gtext->add_option("--corpus", gf.corpus, "Seed corpus (one document per line)");
  seed_and_out(gtext, false);
  auto* ggraph = gen->add_subcommand("graph", "RMAT or uniform edge list");
  ggraph->add_option("--vertices", gf.vertices)->required();
  ggraph->add_option("--edges", gf.edges)->required();
  ggraph->add_option("--model", gf.model, "rmat, rmat:A,B,C,D or uniform");
  ggraph->add_flag("--undirected", gf.undirected);
  seed_and_out(ggraph, false);
  auto* gmat = gen->add_subcommand("matrix", "Dense matrix");
  gmat->add_option("--rows", gf.rows)->required();
  gmat->add_option("--cols", gf.cols)->required();
  gmat->add_option("--dist", gf.dist, "uniform:LO,HI or gaussian:MU,SIGMA");
  gmat->add_flag("--text", gf.text_matrix, "Write the text matrix format");
  seed_and_out(gmat, false);
  auto* gten = gen->add_subcommand("tensor", "Dense tensor");
  gten->add_option("--shape", gf.shape, "Dimensions, e.g. 4x8x8x3")->required();
  gten->add_option("--dist", gf.dist, "uniform:LO,HI or gaussian:MU,SIGMA");
  seed_and_out(gten, false);
  auto* gtab = gen->add_subcommand("table", "ORDER and ITEM tables");
  gtab->add_option("--orders", gf.orders)->required();
  gtab->add_option("--items", gf.items)->required();
  seed_and_out(gtab, true);
  for (auto* c : {gtext, ggraph, gmat, gten, gtab}) {
    c->callback([&, c] { action = [&, name = c->get_name()] { return cmd_generate(name, gf); }; });
  }

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Execute a workload spec");
  run->add_option("--spec", rf.spec)->required()->check(CLI::ExistingFile);
  run->add_option("--repeat", rf.repeat, "Repetitions")->check(CLI::PositiveNumber);
  run->add_option("--report", rf.report, "Run report JSON");
  run->add_option("--counters", rf.counters, "file:A.csv,B.csv,... or cmd:TEMPLATE");
  run->add_option("--mapping", rf.mapping, "Platform event mapping CSV")->check(CLI::ExistingFile);
  run->add_option("--duration", rf.duration, "Seconds substituted for {duration}")
      ->check(CLI::PositiveNumber);
  run->add_option("--out-dir", rf.out_dir, "Directory for spec outputs");
  run->add_option("--order-seed", rf.order_seed, "Random topological order per repeat");
  run->add_flag("--no-outputs", rf.no_outputs, "Do not write spec outputs");
  run->callback([&] { action = [&] { return cmd_run(rf); }; });

  AnalyzeFlags af;
  auto* an = app.add_subcommand("analyze", "Top-Down breakdown from event dumps");
  an->add_option("--events", af.events, "Event dump(s); several are averaged")
      ->required()
      ->check(CLI::ExistingFile);
  an->add_option("--tree", af.tree, "builtin or a metric-tree JSON file");
  an->add_option("--mapping", af.mapping, "Platform event mapping CSV")->check(CLI::ExistingFile);
  an->add_option("--width", af.width, "Issue width override")->check(CLI::PositiveNumber);
  an->add_option("--label", af.label, "Workload label");
  an->add_option("-o,--output", af.out, "Breakdown JSON");
  an->add_option("--metrics", af.metrics, "Append the metric vector to this CSV");
  an->callback([&] { action = [&] { return cmd_analyze(af); }; });

  ClusterFlags cf;
  auto* cl = app.add_subcommand("cluster", "PCA and hierarchical clustering of metric vectors");
  cl->add_option("--metrics", cf.metrics)->required()->check(CLI::ExistingFile);
  cl->add_option("--variance", cf.variance, "Explained-variance threshold")
      ->check(CLI::Range(1e-9, 1.0));
  cl->add_option("--linkage", cf.linkage)->check(CLI::IsMember({"average", "single", "complete"}));
  cl->add_option("--cut", cf.cut, "Number of clusters to report");
  cl->add_flag("--no-standardize", cf.no_standardize);
  cl->add_option("-o,--output", cf.out, "Dendrogram JSON");
  cl->callback([&] { action = [&] { return cmd_cluster(cf); }; });

  ValidateFlags vf;
  auto* va = app.add_subcommand("validate", "Check a spec, an ORDER/ITEM pair or dataset files");
  va->add_option("--spec", vf.spec)->check(CLI::ExistingFile);
  va->add_option("--tables", vf.tables, "Directory holding order.table and item.table")
      ->check(CLI::ExistingDirectory);
  va->add_option("--data", vf.data, "Dataset file(s)");
  va->callback([&] { action = [&] { return cmd_validate(vf); }; });

  auto* lm = app.add_subcommand("list-motifs", "List the kernel registry by family");
  lm->callback([&] { action = [] { return cmd_list_motifs(); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ValidationFailed&) {
    return kInvalid;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
