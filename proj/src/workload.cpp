#include "motifbench/workload.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <functional>
#include <set>

#include "motifbench/checksum.hpp"
#include "motifbench/datagen.hpp"
#include "motifbench/dataset_io.hpp"
#include "motifbench/rng.hpp"

namespace motifbench::workload {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// Cursor over one statement line.
class LineLexer {
 public:
  LineLexer(std::string_view text, int line) : s_(text), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }
  bool accept(char c) {
    if (!peek(c)) return false;
    ++pos_;
    return true;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  std::string ident(const char* what) {
    skip_ws();
    if (pos_ >= s_.size() || !ident_start(s_[pos_])) fail(std::string("expected ") + what);
    const auto start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }
  std::string quoted(const char* what) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != '"') fail(std::string("expected quoted ") + what);
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out.push_back(s_[pos_++]);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }
  // A quoted string or a bare run up to ',' or ')'.
  std::string value() {
    skip_ws();
    if (peek('"')) return quoted("value");
    const auto start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ')') ++pos_;
    auto v = trim_copy(s_.substr(start, pos_ - start));
    if (v.empty()) fail("empty parameter value");
    return v;
  }
  // Remembers the position so a caller can look ahead for `key=`.
  std::size_t mark() const { return pos_; }
  void reset(std::size_t p) { pos_ = p; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_); }

 private:
  static std::string trim_copy(std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
    return std::string(v);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
};

std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

// `( operand, operand, key=value, ... )`; operands must come first.
void parse_args(LineLexer& lex, std::vector<std::string>* operands,
                std::map<std::string, std::string>& params) {
  lex.expect('(');
  if (lex.accept(')')) return;
  do {
    const auto m = lex.mark();
    const std::string name = lex.ident("operand or parameter");
    if (lex.accept('=')) {
      if (params.count(name)) lex.fail("parameter '" + name + "' given twice");
      params[name] = lex.value();
    } else {
      lex.reset(m);
      if (!operands) lex.fail("generators take only key=value parameters");
      if (!params.empty()) lex.fail("operand '" + name + "' after parameters");
      operands->push_back(lex.ident("operand"));
    }
  } while (lex.accept(','));
  lex.expect(')');
}

}  // namespace

std::string Diagnostic::to_string() const {
  return line ? "line " + std::to_string(line) + ": " + message : message;
}

namespace {
std::string join_diagnostics(const std::vector<Diagnostic>& d) {
  std::string out;
  for (const auto& x : d) out += (out.empty() ? "" : "\n") + x.to_string();
  return out;
}
}  // namespace

SpecError::SpecError(std::vector<Diagnostic> diagnostics)
    : Error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

WorkloadSpec parse_spec_syntax(std::string_view text, std::filesystem::path base_dir) {
  WorkloadSpec spec;
  spec.base_dir = std::move(base_dir);
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    LineLexer lex(strip_comment(raw), line_no);
    if (lex.at_end()) continue;
    const std::string keyword = lex.ident("statement keyword");
    if (keyword == "workload") {
      if (!spec.name.empty()) lex.fail("workload name given twice");
      spec.name = lex.quoted("workload name");
      if (spec.name.empty()) lex.fail("workload name is empty");
    } else if (keyword == "input") {
      InputDecl in;
      in.line = line_no;
      in.id = lex.ident("dataset id");
      if (lex.accept(':')) {
        in.declared_kind = lex.ident("payload kind");
        lex.expect('@');
        in.path = lex.quoted("path");
      } else if (lex.accept('=')) {
        const std::string gen = lex.ident("'generate'");
        if (gen != "generate") lex.fail("expected 'generate.<kind>(...)'");
        lex.expect('.');
        in.generator = lex.ident("generator kind");
        parse_args(lex, nullptr, in.gen_params);
      } else {
        lex.fail("expected ':' or '=' after input id");
      }
      spec.inputs.push_back(std::move(in));
    } else if (keyword == "node") {
      Invocation inv;
      inv.line = line_no;
      inv.result_id = lex.ident("dataset id");
      lex.expect('=');
      const std::string family = lex.ident("motif family");
      lex.expect('.');
      inv.motif = family + "." + lex.ident("kernel name");
      parse_args(lex, &inv.operands, inv.params);
      spec.invocations.push_back(std::move(inv));
    } else if (keyword == "output") {
      OutputDecl out;
      out.line = line_no;
      out.id = lex.ident("dataset id");
      lex.expect('@');
      out.path = lex.quoted("path");
      spec.outputs.push_back(std::move(out));
    } else {
      lex.fail("unknown statement '" + keyword + "'");
    }
    if (!lex.at_end()) lex.fail("unexpected trailing text");
  }
  return spec;
}

std::vector<Diagnostic> validate_spec(const WorkloadSpec& spec) {
  std::vector<Diagnostic> diags;
  auto diag = [&](int line, const std::string& id, std::string msg) {
    diags.push_back({line, id, std::move(msg)});
  };
  if (spec.name.empty()) diag(0, "", "missing 'workload \"<name>\"' statement");

  // Where each id is defined: inputs get index -1, invocations their index.
  std::map<std::string, int> defined_at;
  std::map<std::string, int> def_line;
  for (const auto& in : spec.inputs) {
    if (def_line.count(in.id)) {
      diag(in.line, in.id, "duplicate dataset id " + in.id);
      continue;
    }
    defined_at[in.id] = -1;
    def_line[in.id] = in.line;
  }
  for (std::size_t i = 0; i < spec.invocations.size(); ++i) {
    const auto& inv = spec.invocations[i];
    if (def_line.count(inv.result_id)) {
      diag(inv.line, inv.result_id, "duplicate dataset id " + inv.result_id);
      continue;
    }
    defined_at[inv.result_id] = static_cast<int>(i);
    def_line[inv.result_id] = inv.line;
  }

  // Cycle membership over invocation dependencies, ignoring declaration order.
  const auto n = spec.invocations.size();
  std::vector<std::vector<std::size_t>> deps(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& op : spec.invocations[i].operands) {
      auto it = defined_at.find(op);
      if (it != defined_at.end() && it->second >= 0) {
        deps[i].push_back(static_cast<std::size_t>(it->second));
      }
    }
  }
  std::vector<bool> on_cycle(n, false);
  {
    // Tarjan's strongly connected components; a node is on a cycle when its
    // component has more than one node or it depends on itself.
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    int counter = 0;
    std::function<void(std::size_t)> strong = [&](std::size_t v) {
      index[v] = low[v] = counter++;
      stack.push_back(v);
      on_stack[v] = true;
      for (auto w : deps[v]) {
        if (index[w] < 0) {
          strong(w);
          low[v] = std::min(low[v], low[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        const bool self = std::find(deps[v].begin(), deps[v].end(), v) != deps[v].end();
        if (comp.size() > 1 || self) {
          for (auto c : comp) on_cycle[c] = true;
        }
      }
    };
    for (std::size_t v = 0; v < n; ++v) {
      if (index[v] < 0) strong(v);
    }
  }

  std::map<std::string, PayloadKind> kind_of_id;
  for (const auto& in : spec.inputs) {
    if (in.declared_kind) {
      if (auto k = parse_kind(*in.declared_kind)) {
        kind_of_id[in.id] = *k;
      } else {
        diag(in.line, in.id, "input " + in.id + ": unknown payload kind '" + *in.declared_kind + "'");
      }
      if (in.path.empty()) diag(in.line, in.id, "input " + in.id + ": empty path");
    } else if (in.generator) {
      try {
        auto req = datagen::parse_gen_request(*in.generator, in.gen_params);
        kind_of_id[in.id] = datagen::gen_result_kind(req);
      } catch (const Error& e) {
        diag(in.line, in.id, "input " + in.id + ": " + e.what());
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& inv = spec.invocations[i];
    const KernelInfo* k = find_kernel(inv.motif);
    if (!k) {
      diag(inv.line, inv.result_id, "unknown motif '" + inv.motif + "'");
    } else if (inv.operands.size() != k->arity()) {
      diag(inv.line, inv.result_id,
           "node " + inv.result_id + ": " + inv.motif + " expects " +
               std::to_string(k->arity()) + " operand(s), got " +
               std::to_string(inv.operands.size()));
    }

    bool operands_ok = true;
    std::vector<PayloadKind> kinds;
    for (const auto& op : inv.operands) {
      auto it = defined_at.find(op);
      if (it == defined_at.end()) {
        diag(inv.line, op, "undefined dataset id " + op);
        operands_ok = false;
      } else if (it->second >= static_cast<int>(i)) {
        if (on_cycle[i]) {
          diag(inv.line, op,
               op == inv.result_id ? "cycle detected: node " + op + " consumes its own result"
                                   : "cycle detected: node " + inv.result_id +
                                         " depends on " + op);
        } else {
          diag(inv.line, op,
               "dataset id " + op + " used before definition (line " +
                   std::to_string(def_line[op]) + ")");
        }
        operands_ok = false;
      } else if (auto kk = kind_of_id.find(op); kk != kind_of_id.end()) {
        kinds.push_back(kk->second);
      } else {
        operands_ok = false;  // upstream already diagnosed
      }
    }

    if (k) {
      for (auto& msg : check_params(*k, inv.params)) {
        diag(inv.line, inv.result_id, "node " + inv.result_id + ": " + msg);
      }
    }
    if (!k || !operands_ok || inv.operands.size() != k->arity()) continue;
    if (auto out = result_kind(*k, kinds)) {
      kind_of_id[inv.result_id] = *out;
    } else {
      for (std::size_t j = 0; j < kinds.size(); ++j) {
        const auto& ok = k->operands[j];
        if (std::find(ok.begin(), ok.end(), kinds[j]) != ok.end()) continue;
        std::string accepted;
        for (auto a : ok) accepted += (accepted.empty() ? "" : "|") + std::string(kind_name(a));
        diag(inv.line, inv.operands[j],
             "kind mismatch: " + inv.motif + " operand " + std::to_string(j + 1) + " (" +
                 inv.operands[j] + ") is " + std::string(kind_name(kinds[j])) + ", expected " +
                 accepted);
      }
    }
  }

  std::set<std::string> output_paths;
  for (const auto& out : spec.outputs) {
    if (!def_line.count(out.id)) diag(out.line, out.id, "undefined dataset id " + out.id);
    if (out.path.empty()) diag(out.line, out.id, "output " + out.id + ": empty path");
    if (!output_paths.insert(out.path).second) {
      diag(out.line, out.id, "output path \"" + out.path + "\" used twice");
    }
  }
  std::stable_sort(diags.begin(), diags.end(),
                   [](const Diagnostic& a, const Diagnostic& b) { return a.line < b.line; });
  return diags;
}

WorkloadSpec parse_spec(std::string_view text, std::filesystem::path base_dir) {
  WorkloadSpec spec;
  try {
    spec = parse_spec_syntax(text, std::move(base_dir));
  } catch (const ParseError& e) {
    const std::string what = e.what();
    const auto colon = what.find(": ");
    throw SpecError({{static_cast<int>(e.line()), "",
                      e.line() && colon != std::string::npos ? what.substr(colon + 2) : what}});
  }
  if (auto diags = validate_spec(spec); !diags.empty()) throw SpecError(std::move(diags));
  return spec;
}

WorkloadSpec load_spec(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  return parse_spec(text, path.has_parent_path() ? path.parent_path() : ".");
}

Dataset materialize_input(const WorkloadSpec& spec, const InputDecl& input) {
  if (input.generator) {
    auto req = datagen::parse_gen_request(*input.generator, input.gen_params);
    if (!req.seed_corpus_path.empty()) {
      std::filesystem::path p = req.seed_corpus_path;
      if (p.is_relative()) req.seed_corpus_path = (spec.base_dir / p).string();
    }
    return datagen::run_gen_request(req);
  }
  std::filesystem::path p = input.path;
  if (p.is_relative()) p = spec.base_dir / p;
  Dataset d = load_dataset(p);
  const auto want = parse_kind(input.declared_kind.value_or(""));
  if (want && d.kind() != *want) {
    throw InvalidArgument("input " + input.id + ": " + p.string() + " holds " +
                          std::string(kind_name(d.kind())) + ", declared " +
                          std::string(kind_name(*want)));
  }
  return d;
}

std::map<std::string, double> family_fractions(const std::vector<RepeatReport>& repeats) {
  std::map<std::string, double> time, count;
  double total_time = 0, total_count = 0;
  for (const auto& r : repeats) {
    for (const auto& inv : r.invocations) {
      const auto family = inv.motif.substr(0, inv.motif.find('.'));
      time[family] += static_cast<double>(inv.wall_ns);
      count[family] += 1;
      total_time += static_cast<double>(inv.wall_ns);
      total_count += 1;
    }
  }
  std::map<std::string, double> out;
  const auto& base = total_time > 0 ? time : count;
  const double total = total_time > 0 ? total_time : total_count;
  for (const auto& [family, v] : base) out[family] = v / total;
  return out;
}

namespace {

std::vector<std::size_t> choose_order(const WorkloadSpec& spec,
                                      const std::optional<std::uint64_t>& seed,
                                      std::size_t repeat_index) {
  const auto n = spec.invocations.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (!seed) return order;

  std::map<std::string, std::size_t> producer;
  for (std::size_t i = 0; i < n; ++i) producer[spec.invocations[i].result_id] = i;
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<std::size_t>> consumers(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& op : spec.invocations[i].operands) {
      if (auto it = producer.find(op); it != producer.end()) {
        ++pending[i];
        consumers[it->second].push_back(i);
      }
    }
  }
  SplitMix64 rng(*seed + repeat_index);
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (pending[i] == 0) ready.push_back(i);
  }
  order.clear();
  while (!ready.empty()) {
    const auto pick = rng.below(ready.size());
    const auto v = ready[pick];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(pick));
    order.push_back(v);
    for (auto c : consumers[v]) {
      if (--pending[c] == 0) ready.push_back(c);
    }
  }
  return order;
}

}  // namespace

RunReport execute(const WorkloadSpec& spec, const ExecuteOptions& options) {
  if (auto diags = validate_spec(spec); !diags.empty()) throw SpecError(std::move(diags));
  if (options.repeat == 0) throw InvalidArgument("repeat must be at least 1");

  std::map<std::string, Dataset> inputs;
  for (const auto& in : spec.inputs) inputs.emplace(in.id, materialize_input(spec, in));

  std::set<std::string> output_ids;
  for (const auto& out : spec.outputs) output_ids.insert(out.id);

  RunReport report;
  report.workload = spec.name;
  using Clock = std::chrono::steady_clock;

  for (std::size_t rep = 0; rep < options.repeat; ++rep) {
    if (options.on_repeat_start) options.on_repeat_start(rep);
    const auto order = choose_order(spec, options.order_seed, rep);
    // Position of the last consumer of each id under this order.
    std::map<std::string, std::size_t> last_use;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      for (const auto& op : spec.invocations[order[pos]].operands) last_use[op] = pos;
    }

    std::map<std::string, Dataset> live = inputs;
    RepeatReport rr;
    const auto rep_start = Clock::now();
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const auto& inv = spec.invocations[order[pos]];
      const KernelInfo& k = *find_kernel(inv.motif);
      std::vector<Dataset> operands;
      std::uint64_t in_bytes = 0;
      for (const auto& op : inv.operands) {
        operands.push_back(live.at(op));
        in_bytes += canonical_size(operands.back().payload());
      }
      const auto t0 = Clock::now();
      Payload result;
      try {
        result = invoke(k, operands, inv.params);
      } catch (const std::exception& e) {
        throw Error("node " + inv.result_id + " (" + inv.motif + "): " + e.what());
      }
      const auto t1 = Clock::now();
      InvocationRecord rec;
      rec.id = inv.result_id;
      rec.motif = inv.motif;
      rec.wall_ns = static_cast<std::uint64_t>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
      rec.in_bytes = in_bytes;
      rec.out_bytes = canonical_size(result);
      rr.invocations.push_back(std::move(rec));
      live.insert_or_assign(inv.result_id, Dataset(std::move(result)));

      operands.clear();
      for (const auto& op : inv.operands) {
        if (last_use[op] == pos && !output_ids.count(op) && !inputs.count(op)) live.erase(op);
      }
      if (!last_use.count(inv.result_id) && !output_ids.count(inv.result_id)) {
        live.erase(inv.result_id);
      }
    }
    rr.total_ns = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - rep_start).count());

    std::map<std::string, Dataset> outs;
    for (const auto& id : output_ids) {
      const Dataset& d = live.at(id);
      rr.output_checksums[id] = format_digest(checksum_dataset(d));
      outs.emplace(id, d);
    }
    if (options.on_repeat_end) options.on_repeat_end(rep);
    report.repeats.push_back(std::move(rr));
    if (rep + 1 == options.repeat) report.outputs = std::move(outs);
  }
  report.family_fractions = family_fractions(report.repeats);

  if (options.write_outputs) {
    const auto& root = options.out_dir.empty() ? spec.base_dir : options.out_dir;
    for (const auto& out : spec.outputs) {
      std::filesystem::path p = out.path;
      if (p.is_relative()) p = root / p;
      save_dataset(report.outputs.at(out.id), p);
    }
  }
  return report;
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["workload"] = workload;
  j["repeats"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < repeats.size(); ++r) {
    const auto& rep = repeats[r];
    nlohmann::ordered_json jr;
    jr["repeat"] = r + 1;
    jr["invocations"] = nlohmann::ordered_json::array();
    for (const auto& inv : rep.invocations) {
      nlohmann::ordered_json ji;
      ji["id"] = inv.id;
      ji["motif"] = inv.motif;
      ji["wall_ns"] = inv.wall_ns;
      ji["in_bytes"] = inv.in_bytes;
      ji["out_bytes"] = inv.out_bytes;
      jr["invocations"].push_back(std::move(ji));
    }
    jr["total_ns"] = rep.total_ns;
    jr["outputs"] = nlohmann::ordered_json::object();
    for (const auto& [id, digest] : rep.output_checksums) jr["outputs"][id] = digest;
    j["repeats"].push_back(std::move(jr));
  }
  j["family_fractions"] = nlohmann::ordered_json::object();
  for (const auto& [family, f] : family_fractions) j["family_fractions"][family] = f;
  return j;
}

}  // namespace motifbench::workload
