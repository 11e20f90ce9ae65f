#include "motifbench/topdown.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sys/wait.h>

#include "motifbench/dataset_io.hpp"
#include "motifbench/strings.hpp"

namespace motifbench::topdown {

namespace {

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

}  // namespace

MissingEvents::MissingEvents(std::vector<std::string> names)
    : Error("missing event(s): " + join(names, ", ")), names_(std::move(names)) {}

nlohmann::ordered_json EventSample::to_json() const {
  nlohmann::ordered_json j;
  j["label"] = label;
  j["width"] = width;
  j["cycles"] = cycles;
  j["events"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : events) j["events"][k] = v;
  return j;
}

EventMapping parse_mapping(std::string_view text) {
  EventMapping m;
  std::set<std::string> platform_names;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2 || trim(fields[0]).empty() || trim(fields[1]).empty()) {
      throw ParseError("expected abstract_name,platform_name", line_no);
    }
    const std::string abstract(trim(fields[0]));
    const std::string platform(trim(fields[1]));
    if (abstract == "abstract_name") continue;  // header row
    if (!m.emplace(abstract, platform).second) {
      throw ParseError("abstract event '" + abstract + "' mapped twice", line_no);
    }
    if (!platform_names.insert(platform).second) {
      throw ParseError("platform event '" + platform + "' mapped twice", line_no);
    }
  }
  return m;
}

EventMapping load_mapping(const std::filesystem::path& path) {
  try {
    return parse_mapping(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": ", e);
  }
}

void apply_mapping(EventSample& sample, const EventMapping& mapping) {
  for (const auto& [abstract, platform] : mapping) {
    if (abstract == platform) continue;
    auto it = sample.events.find(platform);
    if (it == sample.events.end()) continue;
    if (sample.events.count(abstract)) {
      throw InvalidArgument("event '" + abstract + "' present both directly and as '" +
                            platform + "'");
    }
    const double v = it->second;
    sample.events.erase(it);
    sample.events.emplace(abstract, v);
  }
}

EventSample parse_sample(std::string_view text, const EventMapping* mapping) {
  EventSample s;
  std::optional<double> meta_cycles;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!starts_with(line, "#meta")) continue;
      for (auto kv : split_whitespace(line.substr(5))) {
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value after #meta", line_no);
        const auto key = kv.substr(0, eq);
        const auto value = kv.substr(eq + 1);
        if (key == "label") {
          s.label = std::string(value);
        } else if (key == "width" || key == "cycles") {
          auto v = parse_double(value);
          if (!v || !std::isfinite(*v) || *v < 0) {
            throw ParseError("bad value for meta " + std::string(key), line_no);
          }
          if (key == "width") {
            if (*v < 1) throw ParseError("width must be at least 1", line_no);
            s.width = *v;
          } else {
            meta_cycles = *v;
          }
        } else {
          throw ParseError("unknown meta key '" + std::string(key) + "'", line_no);
        }
      }
      continue;
    }
    const auto fields = split(line, ',');
    std::string name;
    std::string_view count_text;
    if (fields.size() == 2) {
      name = std::string(trim(fields[0]));
      count_text = trim(fields[1]);
    } else if (fields.size() >= 3) {
      // perf stat -x, : count,unit,event,...
      name = std::string(trim(fields[2]));
      count_text = trim(fields[0]);
      if (starts_with(count_text, "<not")) continue;
    } else {
      throw ParseError("expected event_name,count", line_no);
    }
    if (name.empty()) throw ParseError("empty event name", line_no);
    auto v = parse_double(count_text);
    if (!v || !std::isfinite(*v) || *v < 0) {
      throw ParseError("event '" + name + "': count must be a non-negative number", line_no);
    }
    if (!s.events.emplace(name, *v).second) {
      throw ParseError("duplicate event '" + name + "'", line_no);
    }
  }
  if (mapping) apply_mapping(s, *mapping);
  auto it = s.events.find("cycles");
  if (it != s.events.end()) {
    if (meta_cycles && *meta_cycles != it->second) {
      throw ParseError("cycles event and #meta cycles disagree");
    }
    s.cycles = it->second;
  } else if (meta_cycles) {
    s.cycles = *meta_cycles;
    s.events["cycles"] = *meta_cycles;
  } else {
    throw ParseError("no cycles count (expected a 'cycles' event or '#meta cycles=N')");
  }
  return s;
}

EventSample load_sample(const std::filesystem::path& path, const EventMapping* mapping) {
  EventSample s;
  try {
    s = parse_sample(read_file(path), mapping);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": ", e);
  }
  if (s.label.empty()) s.label = path.stem().string();
  return s;
}

EventSample collect_sample(const std::string& command_template, double duration_seconds,
                           long pid, const EventMapping* mapping) {
  std::string cmd = command_template;
  auto substitute = [&](const std::string& key, const std::string& value) {
    for (auto pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + value.size())) {
      cmd.replace(pos, key.size(), value);
    }
  };
  substitute("{pid}", std::to_string(pid));
  substitute("{duration}", format_double(duration_seconds));

  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw IoError("cannot start collector: " + cmd);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = ::pclose(pipe);
  if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw IoError("collector failed (status " +
                  std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : status) + "): " + cmd);
  }
  try {
    return parse_sample(out, mapping);
  } catch (const ParseError& e) {
    throw ParseError("collector output: ", e);
  }
}

EventSample average_samples(const std::vector<EventSample>& samples) {
  if (samples.empty()) throw InvalidArgument("no samples to average");
  EventSample out;
  out.width = samples.front().width;
  out.label = samples.front().label;
  for (const auto& s : samples) {
    if (s.width != out.width) throw InvalidArgument("samples disagree on width");
    for (const auto& [name, v] : s.events) {
      if (!samples.front().events.count(name)) {
        throw InvalidArgument("event '" + name + "' missing from sample '" +
                              samples.front().label + "'");
      }
    }
    for (const auto& [name, v] : samples.front().events) {
      if (!s.events.count(name)) {
        throw InvalidArgument("event '" + name + "' missing from sample '" + s.label + "'");
      }
    }
    if (s.label != out.label) out.label = "mean of " + std::to_string(samples.size());
  }
  const double n = static_cast<double>(samples.size());
  for (const auto& [name, v] : samples.front().events) {
    double sum = 0;
    for (const auto& s : samples) sum += s.events.at(name);
    out.events[name] = sum / n;
  }
  double cyc = 0;
  for (const auto& s : samples) cyc += s.cycles;
  out.cycles = cyc / n;
  return out;
}

// ---- tree ----------------------------------------------------------------

namespace {

TreeNode node(std::string name, std::string_view formula, std::vector<TreeNode> children = {},
              bool negative_ok = false) {
  TreeNode n;
  n.name = std::move(name);
  n.formula = Formula::parse(formula);
  n.negative_ok = negative_ok;
  n.children = std::move(children);
  return n;
}

// Share of `parent` attributed to `event` among the cycles in `pool`.
TreeNode share(std::string name, const std::string& parent, const std::string& event,
               const std::string& pool) {
  return node(std::move(name), parent + " * " + event + " / (" + pool + ")");
}

MetricTree make_builtin() {
  const std::string slots = "(meta.width * meta.cycles)";
  const std::string fe_causes = "fe_latency_cycles";
  const std::string fe_bw = "mite_bw_cycles + dsb_bw_cycles + lsd_bw_cycles";
  const std::string mem = "mem_stall_cycles + store_buffer_stall_cycles";
  const std::string loads = "local_dram_loads + remote_dram_loads + remote_cache_loads";

  auto retiring = node("Retiring", "uops_retired / " + slots,
                       {node("Base", "Retiring * (uops_retired - ms_uops) / uops_retired"),
                        share("Microcode_Sequencer", "Retiring", "ms_uops", "uops_retired")});
  auto bad_spec = node(
      "Bad_Speculation",
      "(uops_issued - uops_retired + meta.width * recovery_cycles) / " + slots,
      {share("Branch_Mispredicts", "Bad_Speculation", "br_mispredicts",
             "br_mispredicts + machine_clears"),
       share("Machine_Clears", "Bad_Speculation", "machine_clears",
             "br_mispredicts + machine_clears")});
  auto frontend = node(
      "Frontend_Bound", "idq_uops_not_delivered / " + slots,
      {node("Frontend_Latency", "meta.width * fe_latency_cycles / " + slots,
            {share("ICache_Misses", "Frontend_Latency", "icache_stall_cycles", fe_causes),
             share("ITLB_Misses", "Frontend_Latency", "itlb_miss_cycles", fe_causes),
             share("Branch_Resteers", "Frontend_Latency", "branch_resteer_cycles", fe_causes),
             share("DSB_Switches", "Frontend_Latency", "dsb_switch_cycles", fe_causes),
             share("LCP", "Frontend_Latency", "lcp_stall_cycles", fe_causes),
             share("MS_Switches", "Frontend_Latency", "ms_switch_cycles", fe_causes)}),
       node("Frontend_Bandwidth", "Frontend_Bound - Frontend_Latency",
            {share("MITE", "Frontend_Bandwidth", "mite_bw_cycles", fe_bw),
             share("DSB", "Frontend_Bandwidth", "dsb_bw_cycles", fe_bw),
             share("LSD", "Frontend_Bandwidth", "lsd_bw_cycles", fe_bw)})});
  auto dram = node(
      "DRAM_Bound", "Memory_Bound * l3_miss_stall_cycles / (" + mem + ")",
      {share("Bandwidth", "DRAM_Bound", "dram_bw_cycles", "l3_miss_stall_cycles"),
       share("Local_DRAM", "(DRAM_Bound - Bandwidth)", "local_dram_loads", loads),
       share("Remote_DRAM", "(DRAM_Bound - Bandwidth)", "remote_dram_loads", loads),
       share("Remote_Cache", "(DRAM_Bound - Bandwidth)", "remote_cache_loads", loads)});
  auto backend = node(
      "Backend_Bound", "1 - Retiring - Bad_Speculation - Frontend_Bound",
      {node("Core_Bound",
            "Backend_Bound * (backend_stall_cycles - mem_stall_cycles - store_buffer_stall_cycles)"
            " / backend_stall_cycles",
            {share("Divider", "Core_Bound", "divider_cycles",
                   "backend_stall_cycles - mem_stall_cycles - store_buffer_stall_cycles"),
             node("Ports_Utilization", "Core_Bound - Divider")}),
       node("Memory_Bound", "Backend_Bound * (" + mem + ") / backend_stall_cycles",
            {node("L1_Bound",
                  "Memory_Bound * (mem_stall_cycles - l1d_miss_stall_cycles) / (" + mem + ")"),
             node("L2_Bound",
                  "Memory_Bound * (l1d_miss_stall_cycles - l2_miss_stall_cycles) / (" + mem + ")",
                  {}, true),
             node("L3_Bound",
                  "Memory_Bound * (l2_miss_stall_cycles - l3_miss_stall_cycles) / (" + mem + ")"),
             std::move(dram),
             share("Store_Bound", "Memory_Bound", "store_buffer_stall_cycles", mem)})});

  MetricTree t;
  t.roots.push_back(node("Total", "1",
                         {std::move(retiring), std::move(bad_spec), std::move(frontend),
                          std::move(backend)}));
  check_tree(t);
  return t;
}

bool is_meta(const std::string& name) { return starts_with(name, "meta."); }

void collect_names(const TreeNode& n, std::set<std::string>& out, std::size_t depth) {
  if (depth > 5) throw InvalidArgument("metric tree deeper than 5 levels at '" + n.name + "'");
  if (n.name.empty()) throw InvalidArgument("metric tree node without a name");
  if (!out.insert(n.name).second) throw InvalidArgument("duplicate metric name '" + n.name + "'");
  for (const auto& c : n.children) collect_names(c, out, depth + 1);
}

// Walks with the set of metric names visible to each formula.
void walk_scopes(const std::vector<TreeNode>& siblings, std::vector<std::string>& scope,
                 const std::function<void(const TreeNode&, const std::vector<std::string>&)>& f) {
  const auto base = scope.size();
  for (const auto& n : siblings) {
    f(n, scope);
    scope.push_back(n.name);
    const auto after_self = scope.size();
    walk_scopes(n.children, scope, f);
    scope.resize(after_self);
  }
  scope.resize(base);
}

}  // namespace

const MetricTree& builtin_tree() {
  static const MetricTree tree = make_builtin();
  return tree;
}

void check_tree(const MetricTree& tree) {
  if (tree.roots.empty()) throw InvalidArgument("metric tree has no nodes");
  std::set<std::string> all;
  for (const auto& r : tree.roots) collect_names(r, all, 1);
  std::vector<std::string> scope;
  walk_scopes(tree.roots, scope, [&](const TreeNode& n, const std::vector<std::string>& visible) {
    for (const auto& name : n.formula.names()) {
      if (is_meta(name)) {
        if (name != "meta.width" && name != "meta.cycles") {
          throw InvalidArgument("metric '" + n.name + "': unknown meta field '" + name + "'");
        }
      } else if (all.count(name) &&
                 std::find(visible.begin(), visible.end(), name) == visible.end()) {
        throw InvalidArgument("metric '" + n.name + "' refers to '" + name +
                              "', which is not an ancestor or earlier sibling");
      }
    }
  });
}

namespace {

TreeNode node_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("metric tree node must be an object");
  TreeNode n;
  n.name = j.at("name").get<std::string>();
  n.formula = Formula::parse(j.at("formula").get<std::string>());
  n.expected_fraction = j.value("expected_fraction", true);
  n.negative_ok = j.value("negative_ok", false);
  if (j.contains("children")) {
    for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c));
  }
  return n;
}

nlohmann::ordered_json node_to_json(const TreeNode& n) {
  nlohmann::ordered_json j;
  j["name"] = n.name;
  j["formula"] = n.formula.text();
  j["expected_fraction"] = n.expected_fraction;
  j["negative_ok"] = n.negative_ok;
  j["children"] = nlohmann::ordered_json::array();
  for (const auto& c : n.children) j["children"].push_back(node_to_json(c));
  return j;
}

}  // namespace

MetricTree tree_from_json(const nlohmann::json& j) {
  MetricTree t;
  try {
    if (j.is_array()) {
      for (const auto& r : j) t.roots.push_back(node_from_json(r));
    } else {
      t.roots.push_back(node_from_json(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("metric tree: ") + e.what());
  }
  check_tree(t);
  return t;
}

nlohmann::ordered_json tree_to_json(const MetricTree& tree) {
  if (tree.roots.size() == 1) return node_to_json(tree.roots.front());
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (const auto& r : tree.roots) a.push_back(node_to_json(r));
  return a;
}

MetricTree load_tree(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return tree_from_json(j);
}

std::vector<std::string> required_events(const MetricTree& tree) {
  std::set<std::string> metrics;
  for (const auto& r : tree.roots) collect_names(r, metrics, 1);
  std::set<std::string> events;
  std::function<void(const TreeNode&)> visit = [&](const TreeNode& n) {
    for (const auto& name : n.formula.names()) {
      if (!is_meta(name) && !metrics.count(name)) events.insert(name);
    }
    for (const auto& c : n.children) visit(c);
  };
  for (const auto& r : tree.roots) visit(r);
  return {events.begin(), events.end()};
}

const BreakdownNode* BreakdownNode::find(std::string_view wanted) const {
  if (name == wanted) return this;
  for (const auto& c : children) {
    if (auto* f = c.find(wanted)) return f;
  }
  return nullptr;
}

nlohmann::ordered_json BreakdownNode::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["fraction"] = fraction;
  j["negative_artifact"] = negative_artifact;
  j["children"] = nlohmann::ordered_json::array();
  for (const auto& c : children) j["children"].push_back(c.to_json());
  return j;
}

BreakdownNode evaluate_tree(const EventSample& sample, const MetricTree& tree) {
  if (!(sample.cycles > 0)) throw InvalidArgument("cycles must be positive");
  if (!(sample.width >= 1)) throw InvalidArgument("width must be at least 1");
  std::vector<std::string> missing;
  for (const auto& e : required_events(tree)) {
    if (!sample.events.count(e)) missing.push_back(e);
  }
  if (!missing.empty()) throw MissingEvents(std::move(missing));

  std::map<std::string, double> values;
  auto lookup = [&](const std::string& name) -> double {
    if (name == "meta.width") return sample.width;
    if (name == "meta.cycles") return sample.cycles;
    if (auto it = values.find(name); it != values.end()) return it->second;
    return sample.events.at(name);
  };
  std::function<BreakdownNode(const TreeNode&)> eval = [&](const TreeNode& n) {
    BreakdownNode b;
    b.name = n.name;
    try {
      b.fraction = n.formula.evaluate(lookup);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("metric '" + n.name + "': " + e.what());
    }
    b.expected_fraction = n.expected_fraction;
    b.negative_artifact = n.negative_ok && b.fraction < 0;
    values[n.name] = b.fraction;
    for (const auto& c : n.children) b.children.push_back(eval(c));
    // Children's names stay visible only inside this subtree.
    for (const auto& c : n.children) values.erase(c.name);
    return b;
  };

  std::vector<BreakdownNode> roots;
  for (const auto& r : tree.roots) roots.push_back(eval(r));
  if (roots.size() == 1) return std::move(roots.front());
  BreakdownNode total;
  total.name = "Total";
  total.fraction = 1.0;
  total.children = std::move(roots);
  return total;
}

std::vector<std::string> check_breakdown(const BreakdownNode& b, double tolerance) {
  std::vector<std::string> out;
  std::function<void(const BreakdownNode&)> visit = [&](const BreakdownNode& n) {
    if (n.expected_fraction && !n.negative_artifact &&
        (n.fraction < -0.05 || n.fraction > 1.05 || !std::isfinite(n.fraction))) {
      out.push_back(n.name + " = " + format_double(n.fraction) + " outside [-0.05, 1.05]");
    }
    if (!n.children.empty() && n.expected_fraction && !n.negative_artifact) {
      double sum = 0;
      for (const auto& c : n.children) sum += c.fraction;
      if (sum > n.fraction + tolerance) {
        out.push_back("children of " + n.name + " sum to " + format_double(sum) +
                      " > " + format_double(n.fraction));
      }
    }
    for (const auto& c : n.children) visit(c);
  };
  visit(b);
  return out;
}

double ipc(const EventSample& sample) {
  auto it = sample.events.find("instructions_retired");
  if (it == sample.events.end()) throw MissingEvents({"instructions_retired"});
  if (!(sample.cycles > 0)) throw InvalidArgument("cycles must be positive");
  return it->second / sample.cycles;
}

double mlp(const EventSample& sample) {
  std::vector<std::string> missing;
  for (const char* e : {"l1d_pend_miss_occupancy", "l1d_pend_miss_cycles"}) {
    if (!sample.events.count(e)) missing.emplace_back(e);
  }
  if (!missing.empty()) throw MissingEvents(std::move(missing));
  const double cyc = sample.events.at("l1d_pend_miss_cycles");
  return cyc == 0 ? 0.0 : sample.events.at("l1d_pend_miss_occupancy") / cyc;
}

double ms_uops_ratio(const EventSample& sample) {
  std::vector<std::string> missing;
  for (const char* e : {"ms_uops", "uops_retired"}) {
    if (!sample.events.count(e)) missing.emplace_back(e);
  }
  if (!missing.empty()) throw MissingEvents(std::move(missing));
  const double r = sample.events.at("uops_retired");
  const double ms = sample.events.at("ms_uops");
  if (r == 0) {
    if (ms == 0) return 0.0;
    throw InvalidArgument("ms_uops without retired uops");
  }
  return ms / r;
}

MetricVector to_metric_vector(const BreakdownNode& b, double ipc_value, double mlp_value,
                              const std::string& label,
                              const std::vector<std::pair<std::string, double>>& extras) {
  MetricVector v;
  v.label = label;
  std::function<void(const BreakdownNode&)> visit = [&](const BreakdownNode& n) {
    v.names.push_back(n.name);
    v.values.push_back(n.fraction);
    for (const auto& c : n.children) visit(c);
  };
  visit(b);
  v.names.push_back("IPC");
  v.values.push_back(ipc_value);
  v.names.push_back("MLP");
  v.values.push_back(mlp_value);
  for (const auto& [name, value] : extras) {
    v.names.push_back(name);
    v.values.push_back(value);
  }
  return v;
}

namespace {

std::optional<double> if_available(double (*fn)(const EventSample&), const EventSample& s) {
  try {
    return fn(s);
  } catch (const MissingEvents&) {
    return std::nullopt;
  }
}

nlohmann::ordered_json or_null(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

Analysis analyze(const std::vector<EventSample>& samples, const MetricTree& tree,
                 const std::string& tree_name, const std::string& label) {
  Analysis a;
  a.sample = average_samples(samples);
  if (!label.empty()) a.sample.label = label;
  a.sample_count = samples.size();
  a.tree_name = tree_name;
  a.breakdown = evaluate_tree(a.sample, tree);
  a.ipc = if_available(ipc, a.sample);
  a.mlp = if_available(mlp, a.sample);
  a.ms_uops_ratio = if_available(ms_uops_ratio, a.sample);
  a.consistency = check_breakdown(a.breakdown);
  return a;
}

nlohmann::ordered_json Analysis::to_json() const {
  nlohmann::ordered_json j;
  j["label"] = sample.label;
  j["samples"] = sample_count;
  j["width"] = sample.width;
  j["cycles"] = sample.cycles;
  j["tree"] = tree_name;
  j["breakdown"] = breakdown.to_json();
  j["ipc"] = or_null(ipc);
  j["mlp"] = or_null(mlp);
  j["ms_uops_ratio"] = or_null(ms_uops_ratio);
  j["consistency"] = consistency;
  j["events"] = sample.to_json()["events"];
  return j;
}

MetricVector Analysis::metric_vector() const {
  if (!ipc || !mlp) {
    std::vector<std::string> need;
    for (const char* e : {"instructions_retired", "l1d_pend_miss_occupancy", "l1d_pend_miss_cycles"})
      if (!sample.events.count(e)) need.emplace_back(e);
    throw MissingEvents(need);
  }
  std::vector<std::pair<std::string, double>> extras;
  if (ms_uops_ratio) extras.emplace_back("MS_Uops_Ratio", *ms_uops_ratio);
  return to_metric_vector(breakdown, *ipc, *mlp, sample.label, extras);
}

}  // namespace motifbench::topdown
