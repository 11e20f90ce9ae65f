#pragma once

// Hierarchical pipeline-slot breakdown (Top-Down) and ILP/MLP from
// hardware-event counts.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "motifbench/error.hpp"
#include "motifbench/formula.hpp"

namespace motifbench::topdown {

struct EventSample {
  std::map<std::string, double> events;
  double width = 4;  // issue slots per cycle
  double cycles = 0;
  std::string label;

  nlohmann::ordered_json to_json() const;
};

// Raised when formulas reference events the sample does not carry.
class MissingEvents : public Error {
 public:
  explicit MissingEvents(std::vector<std::string> names);
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

// abstract name -> platform counter name
using EventMapping = std::map<std::string, std::string>;

// CSV `abstract_name,platform_name`; blank lines and lines starting with '#'
// are skipped.
EventMapping parse_mapping(std::string_view text);
EventMapping load_mapping(const std::filesystem::path& path);

// Renames platform counters to their abstract names.
void apply_mapping(EventSample& sample, const EventMapping& mapping);

// Event dump: `event,count` lines plus `#meta key=value` lines (width,
// cycles, label). A `cycles` event sets the cycle count. Lines in the
// `perf stat -x,` layout (count first, event name third) are also accepted.
// Duplicate events are an error naming the event.
EventSample parse_sample(std::string_view text, const EventMapping* mapping = nullptr);
EventSample load_sample(const std::filesystem::path& path, const EventMapping* mapping = nullptr);

// Runs `command_template` through the shell with `{pid}` and `{duration}`
// substituted and parses its standard output as an event dump. Throws IoError
// when the command cannot start or exits non-zero.
EventSample collect_sample(const std::string& command_template, double duration_seconds,
                           long pid = 0, const EventMapping* mapping = nullptr);

// Element-wise mean. All samples must carry the same event names and width.
EventSample average_samples(const std::vector<EventSample>& samples);

struct TreeNode {
  std::string name;
  Formula formula;
  bool expected_fraction = true;
  bool negative_ok = false;
  std::vector<TreeNode> children;
};

struct MetricTree {
  std::vector<TreeNode> roots;
};

// Total (1.0) over the four level-1 categories, down to the DRAM split.
const MetricTree& builtin_tree();

// Checks unique names, depth <= 5 and that every formula name is a meta
// field, an ancestor, an earlier sibling or an event. Throws InvalidArgument.
void check_tree(const MetricTree& tree);

MetricTree tree_from_json(const nlohmann::json& j);
nlohmann::ordered_json tree_to_json(const MetricTree& tree);
MetricTree load_tree(const std::filesystem::path& path);

// Event names the tree needs from a sample, sorted.
std::vector<std::string> required_events(const MetricTree& tree);

struct BreakdownNode {
  std::string name;
  double fraction = 0;
  bool expected_fraction = true;
  bool negative_artifact = false;
  std::vector<BreakdownNode> children;

  const BreakdownNode* find(std::string_view name) const;
  nlohmann::ordered_json to_json() const;
};

// Evaluates every root of the tree. A single-root tree yields that root; a
// multi-root tree is wrapped in a synthetic "Total" node with fraction 1.
// Throws MissingEvents, or InvalidArgument for zero cycles or width < 1.
BreakdownNode evaluate_tree(const EventSample& sample, const MetricTree& tree);

// Violations of the fraction range [-0.05, 1.05] and the child-sum
// tolerance; empty when consistent.
std::vector<std::string> check_breakdown(const BreakdownNode& b, double tolerance = 0.02);

double ipc(const EventSample& sample);
double mlp(const EventSample& sample);
// ms_uops / uops_retired (0 when both are zero).
double ms_uops_ratio(const EventSample& sample);

struct MetricVector {
  std::string label;
  std::vector<std::string> names;
  std::vector<double> values;
};

// Pre-order fractions, then IPC and MLP, then any extras in order.
MetricVector to_metric_vector(const BreakdownNode& b, double ipc_value, double mlp_value,
                              const std::string& label,
                              const std::vector<std::pair<std::string, double>>& extras = {});

// Averaged sample, its breakdown and the scalar metrics. IPC, MLP and the
// microcode ratio are absent when the sample lacks their events.
struct Analysis {
  EventSample sample;
  std::size_t sample_count = 0;
  std::string tree_name;
  BreakdownNode breakdown;
  std::optional<double> ipc;
  std::optional<double> mlp;
  std::optional<double> ms_uops_ratio;
  std::vector<std::string> consistency;

  // label, samples, width, cycles, tree, breakdown, ipc, mlp, ms_uops_ratio,
  // consistency, events; absent metrics are null.
  nlohmann::ordered_json to_json() const;
  // Throws MissingEvents when IPC or MLP cannot be computed.
  MetricVector metric_vector() const;
};

// Averages the samples and evaluates the tree. An empty label keeps the
// averaged sample's own label.
Analysis analyze(const std::vector<EventSample>& samples, const MetricTree& tree,
                 const std::string& tree_name = "builtin", const std::string& label = {});

}  // namespace motifbench::topdown
