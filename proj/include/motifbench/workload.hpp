#pragma once

// Workload specs: named data nodes connected by motif invocations, parsed from
// a small line-oriented language and executed as a DAG.
//
//   workload "sift-like"
//   input img = generate.matrix(rows=64, cols=64, dist="uniform:0,1", seed=7)
//   input docs : text @ "corpus.txt"
//   node small = sampling.downsample(img, factor=2)
//   output small @ "small.bin"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "motifbench/dataset.hpp"
#include "motifbench/error.hpp"
#include "motifbench/registry.hpp"

namespace motifbench::workload {

struct InputDecl {
  std::string id;
  int line = 0;
  // `input x : kind @ "path"`
  std::optional<std::string> declared_kind;
  std::string path;
  // `input x = generate.kind(...)`
  std::optional<std::string> generator;
  std::map<std::string, std::string> gen_params;
};

struct Invocation {
  std::string result_id;
  std::string motif;  // "family.kernel" as written
  std::vector<std::string> operands;
  KernelParams params;
  int line = 0;
};

struct OutputDecl {
  std::string id;
  std::string path;
  int line = 0;
};

struct WorkloadSpec {
  std::string name;
  std::vector<InputDecl> inputs;
  std::vector<Invocation> invocations;
  std::vector<OutputDecl> outputs;
  // Relative input paths resolve against this directory.
  std::filesystem::path base_dir;
};

struct Diagnostic {
  int line = 0;
  std::string id;  // offending dataset id, may be empty
  std::string message;

  std::string to_string() const;  // "line N: message"
};

// Thrown by parse_spec when the document is syntactically valid but fails
// validation, or when syntax fails (then with a single diagnostic).
class SpecError : public Error {
 public:
  explicit SpecError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

// Syntax only. Throws ParseError carrying the line number.
WorkloadSpec parse_spec_syntax(std::string_view text, std::filesystem::path base_dir = {});

// Empty iff ids are unique, every operand is defined before use, the graph is
// acyclic, arities and payload kinds type-check against the registry and all
// parameters are acceptable.
std::vector<Diagnostic> validate_spec(const WorkloadSpec& spec);

// Syntax plus validation; throws SpecError.
WorkloadSpec parse_spec(std::string_view text, std::filesystem::path base_dir = {});
WorkloadSpec load_spec(const std::filesystem::path& path);

struct InvocationRecord {
  std::string id;
  std::string motif;
  std::uint64_t wall_ns = 0;
  std::uint64_t in_bytes = 0;
  std::uint64_t out_bytes = 0;
};

struct RepeatReport {
  std::vector<InvocationRecord> invocations;
  std::uint64_t total_ns = 0;
  std::map<std::string, std::string> output_checksums;  // id -> hex digest
};

struct RunReport {
  std::string workload;
  std::vector<RepeatReport> repeats;
  std::map<std::string, double> family_fractions;
  // Output datasets of the last repeat, by id. Not serialized.
  std::map<std::string, Dataset> outputs;

  nlohmann::ordered_json to_json() const;
};

struct ExecuteOptions {
  std::size_t repeat = 1;
  // When set, each repeat runs a random topological order drawn from this
  // seed instead of the declaration order.
  std::optional<std::uint64_t> order_seed;
  bool write_outputs = true;
  // Relative output paths resolve here; empty means base_dir.
  std::filesystem::path out_dir;
  // Called around each repeat, outside the timed region of every invocation.
  std::function<void(std::size_t)> on_repeat_start;
  std::function<void(std::size_t)> on_repeat_end;
};

// Runs the validated spec. Kernel failures are rethrown as Error naming the
// invocation id.
RunReport execute(const WorkloadSpec& spec, const ExecuteOptions& options = {});

// Loads or generates one declared input.
Dataset materialize_input(const WorkloadSpec& spec, const InputDecl& input);

// Per-family share of measured time across all repeats. Falls back to
// invocation counts when every measured time is zero.
std::map<std::string, double> family_fractions(const std::vector<RepeatReport>& repeats);

}  // namespace motifbench::workload
