#pragma once

// Name-addressable catalogue of motif kernels (`family.kernel`), with operand
// kinds, parameter schemas and a uniform invocation entry point. The workload
// composer and the `list-motifs` command are built on it.

#include <array>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motifbench/dataset.hpp"

namespace motifbench {

enum class Family { Matrix, Sampling, Transform, Graph, Logic, Set, Sort, Statistic };

inline constexpr std::array<Family, 8> kAllFamilies = {
    Family::Matrix, Family::Sampling, Family::Transform, Family::Graph,
    Family::Logic,  Family::Set,      Family::Sort,      Family::Statistic};

std::string_view family_name(Family f);  // lower-case, e.g. "transform"
std::optional<Family> parse_family(std::string_view name);

struct MotifId {
  Family family;
  std::string kernel;

  std::string name() const;  // "family.kernel"
  static std::optional<MotifId> parse(std::string_view text);
  friend bool operator==(const MotifId&, const MotifId&) = default;
};

enum class ParamType { Integer, Real, String };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::String;
  bool required = false;
  std::optional<std::string> default_value;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  std::vector<std::string> choices;  // for String; empty means free-form
};

// Raw `key=value` parameters as written in a workload spec.
using KernelParams = std::map<std::string, std::string>;

// Typed view over validated parameters with defaults applied.
class ParamReader {
 public:
  ParamReader(const std::vector<ParamSpec>& specs, const KernelParams& raw)
      : specs_(specs), raw_(raw) {}

  bool has(std::string_view name) const;
  std::int64_t integer(std::string_view name) const;
  double real(std::string_view name) const;
  std::string string(std::string_view name) const;
  std::optional<std::int64_t> optional_integer(std::string_view name) const;
  std::optional<double> optional_real(std::string_view name) const;

 private:
  std::optional<std::string> lookup(std::string_view name) const;
  const std::vector<ParamSpec>& specs_;
  const KernelParams& raw_;
};

struct KernelInfo {
  MotifId id;
  std::string summary;
  // Accepted payload kinds for each operand, in order. Arity is the size.
  std::vector<std::vector<PayloadKind>> operands;
  // nullopt: the result has the kind of the first operand.
  std::optional<PayloadKind> output;
  std::vector<ParamSpec> params;
  std::function<Payload(std::span<const Dataset>, const ParamReader&)> run;

  std::size_t arity() const { return operands.size(); }
};

const std::vector<KernelInfo>& kernel_registry();
const KernelInfo* find_kernel(std::string_view name);

// Diagnostics for unknown names, missing required values, type and range
// errors. Empty when the parameters are acceptable.
std::vector<std::string> check_params(const KernelInfo& k, const KernelParams& params);

// Result kind for the given operand kinds, or nullopt when an operand kind is
// not accepted (or the arity is wrong).
std::optional<PayloadKind> result_kind(const KernelInfo& k,
                                       std::span<const PayloadKind> operand_kinds);

// Validates arity, operand kinds and parameters, then runs the kernel.
// Throws InvalidArgument on any violation.
Payload invoke(const KernelInfo& k, std::span<const Dataset> operands,
               const KernelParams& params);

}  // namespace motifbench
