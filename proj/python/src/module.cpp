#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

#include "motifbench/checksum.hpp"
#include "motifbench/datagen.hpp"
#include "motifbench/dataset_io.hpp"
#include "motifbench/md5.hpp"
#include "motifbench/registry.hpp"
#include "motifbench/similarity.hpp"
#include "motifbench/topdown.hpp"
#include "motifbench/workload.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace motifbench;

namespace {

py::array_t<double> to_numpy(const std::vector<std::size_t>& shape, std::span<const double> data) {
  std::vector<py::ssize_t> dims(shape.begin(), shape.end());
  py::array_t<double> out(dims);
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

py::object cell(const Value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return py::int_(*i);
  if (const auto* d = std::get_if<double>(&v)) return py::float_(*d);
  return py::str(std::get<std::string>(v));
}

py::dict provenance_dict(const Dataset& d) {
  py::dict out;
  const auto& p = *d.provenance();
  out["generator"] = p.generator;
  out["seed"] = p.seed;
  out["parameters"] = p.parameters;
  return out;
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(); }

topdown::MetricTree tree_from(const std::string& tree) {
  return tree == "builtin" ? topdown::builtin_tree() : topdown::load_tree(tree);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Data-motif benchmark toolkit: generators, kernels, workload runner, "
            "Top-Down analysis and workload clustering.";

  // Translators run newest first, so derived types are registered last.
  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidArgument>(m, "InvalidArgument", error);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<IoError>(m, "IoError", error);
  py::register_exception<workload::SpecError>(m, "SpecError", error);
  py::register_exception<topdown::MissingEvents>(m, "MissingEvents", error);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("kind", [](const Dataset& d) { return std::string(kind_name(d.kind())); })
      .def_property_readonly("checksum",
                             [](const Dataset& d) { return format_digest(checksum_dataset(d)); })
      .def_property_readonly("provenance", [](const Dataset& d) -> py::object {
        if (!d.generated()) return py::none();
        return provenance_dict(d);
      })
      .def("save", [](const Dataset& d, const fs::path& path, bool text_matrix) {
        save_dataset(d, path, SaveOptions{.text_matrix = text_matrix});
      }, py::arg("path"), py::arg("text_matrix") = false)
      .def("documents", [](const Dataset& d) { return d.as<TextCorpus>().documents(); })
      .def("to_numpy", [](const Dataset& d) {
        if (d.kind() == PayloadKind::Matrix) {
          const auto& x = d.as<Matrix>();
          return to_numpy({x.rows(), x.cols()}, x.data());
        }
        const auto& t = d.as<Tensor>();
        return to_numpy(t.shape(), t.data());
      })
      .def("edges", [](const Dataset& d) {
        std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
        for (const auto& e : d.as<Graph>().edges()) out.emplace_back(e.source, e.target);
        return out;
      })
      .def_property_readonly("vertex_count", [](const Dataset& d) { return d.as<Graph>().vertex_count(); })
      .def("entries", [](const Dataset& d) { return d.as<KeyValueSet>().entries(); })
      .def("columns", [](const Dataset& d) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& c : d.as<Table>().schema())
          out.emplace_back(c.name, std::string(column_kind_name(c.kind)));
        return out;
      })
      .def("rows", [](const Dataset& d) {
        py::list out;
        for (const auto& r : d.as<Table>().rows()) {
          py::tuple t(r.size());
          for (std::size_t i = 0; i < r.size(); ++i) t[i] = cell(r[i]);
          out.append(t);
        }
        return out;
      })
      .def("__repr__", [](const Dataset& d) {
        return "<Dataset " + std::string(kind_name(d.kind())) + " " +
               format_digest(checksum_dataset(d)) + ">";
      });

  m.def("matrix", [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    if (a.ndim() != 2) throw InvalidArgument("matrix needs a 2-D array");
    std::vector<double> v(a.data(), a.data() + a.size());
    return Dataset(Matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                          std::move(v)));
  }, py::arg("array"));
  m.def("tensor", [](py::array_t<double, py::array::c_style | py::array::forcecast> a) {
    std::vector<std::size_t> shape(a.shape(), a.shape() + a.ndim());
    std::vector<double> v(a.data(), a.data() + a.size());
    return Dataset(Tensor(std::move(shape), std::move(v)));
  }, py::arg("array"));
  m.def("text", [](std::vector<std::string> docs) { return Dataset(TextCorpus(std::move(docs))); },
        py::arg("documents"));
  m.def("graph", [](std::uint64_t n, const std::vector<std::pair<std::uint64_t, std::uint64_t>>& edges,
                    bool directed) {
    std::vector<Edge> e;
    for (const auto& [a, b] : edges) e.push_back({a, b});
    return Dataset(Graph(n, std::move(e), directed));
  }, py::arg("vertex_count"), py::arg("edges"), py::arg("directed") = true);
  m.def("kv", [](std::map<std::string, std::string> entries) {
    return Dataset(KeyValueSet(std::move(entries)));
  }, py::arg("entries"));

  m.def("invoke", [](const std::string& motif, const std::vector<Dataset>& operands,
                     const std::map<std::string, std::string>& params) {
    const auto* k = find_kernel(motif);
    if (!k) throw InvalidArgument("unknown motif '" + motif + "'");
    return Dataset(motifbench::invoke(*k, operands, params));
  }, py::arg("motif"), py::arg("operands"), py::arg("params") = std::map<std::string, std::string>{},
     "Run one registry kernel, e.g. invoke('matrix.matmul', [a, b]).");

  m.def("required_events", [](const std::string& tree) {
    return topdown::required_events(tree_from(tree));
  }, py::arg("tree") = "builtin");

  m.def("md5_hex", [](py::bytes data) { return to_hex(md5(std::string_view(data))); },
        py::arg("data"), "Lower-case hex MD5 of a bytes object.");

  m.def("load_dataset", &load_dataset, py::arg("path"));

  m.def("generate", [](const std::string& kind, const std::map<std::string, std::string>& params) {
    return datagen::run_gen_request(datagen::parse_gen_request(kind, params));
  }, py::arg("kind"), py::arg("params"),
     "Run a generator with spec-style string parameters, e.g. generate('matrix', {'rows': '4'}).");

  m.def("generate_tables", [](std::size_t orders, std::size_t items, std::uint64_t seed) {
    auto t = datagen::gen_table({orders, items, seed});
    return std::make_pair(t.order, t.item);
  }, py::arg("orders"), py::arg("items"), py::arg("seed") = 0);

  m.def("check_order_item", [](const Dataset& order, const Dataset& item) {
    return datagen::check_order_item(order.as<Table>(), item.as<Table>());
  }, py::arg("order"), py::arg("item"));

  m.def("list_motifs", [] {
    py::list out;
    for (const auto& k : kernel_registry()) {
      py::dict d;
      d["name"] = k.id.name();
      d["family"] = std::string(family_name(k.id.family));
      d["summary"] = k.summary;
      d["arity"] = k.arity();
      std::vector<std::vector<std::string>> kinds;
      for (const auto& op : k.operands) {
        kinds.emplace_back();
        for (auto kind : op) kinds.back().emplace_back(kind_name(kind));
      }
      d["operands"] = kinds;
      d["output"] = k.output ? py::object(py::str(std::string(kind_name(*k.output)))) : py::none();
      std::vector<std::string> params;
      for (const auto& p : k.params) params.push_back(p.name);
      d["params"] = params;
      out.append(d);
    }
    return out;
  });

  m.def("validate_spec", [](const fs::path& path) {
    std::vector<std::string> out;
    try {
      workload::load_spec(path);
    } catch (const workload::SpecError& e) {
      for (const auto& d : e.diagnostics()) out.push_back(d.to_string());
    } catch (const ParseError& e) {
      out.emplace_back(e.what());
    }
    return out;
  }, py::arg("path"), "Diagnostics for a spec file; empty when it is valid.");

  m.def("run_spec_json", [](const fs::path& path, std::size_t repeat, std::optional<fs::path> out_dir,
                            std::optional<std::uint64_t> order_seed) {
    auto spec = workload::load_spec(path);
    workload::ExecuteOptions opt;
    opt.repeat = repeat;
    opt.order_seed = order_seed;
    opt.write_outputs = out_dir.has_value();
    if (out_dir) {
      fs::create_directories(*out_dir);
      opt.out_dir = *out_dir;
    }
    workload::RunReport report;
    {
      py::gil_scoped_release release;
      report = workload::execute(spec, opt);
    }
    return dump(report.to_json());
  }, py::arg("path"), py::arg("repeat") = 1, py::arg("out_dir") = py::none(),
     py::arg("order_seed") = py::none());

  m.def("analyze_json", [](const std::vector<fs::path>& event_files, const std::string& tree,
                           std::optional<fs::path> mapping, std::optional<double> width,
                           const std::string& label, std::optional<fs::path> metrics) {
    std::optional<topdown::EventMapping> map;
    if (mapping) map = topdown::load_mapping(*mapping);
    std::vector<topdown::EventSample> samples;
    for (const auto& p : event_files) {
      auto s = topdown::load_sample(p, map ? &*map : nullptr);
      if (width) s.width = *width;
      samples.push_back(std::move(s));
    }
    const auto a = topdown::analyze(samples, tree_from(tree), tree, label);
    if (metrics) similarity::append_metric_csv(*metrics, a.metric_vector());
    return dump(a.to_json());
  }, py::arg("event_files"), py::arg("tree") = "builtin", py::arg("mapping") = py::none(),
     py::arg("width") = py::none(), py::arg("label") = "", py::arg("metrics") = py::none());

  m.def("analyze_counts_json", [](const std::map<std::string, double>& events, double width,
                                  const std::string& label) {
    topdown::EventSample s;
    s.events = events;
    s.width = width;
    s.label = label;
    if (auto it = events.find("cycles"); it != events.end()) s.cycles = it->second;
    return dump(topdown::analyze({s}, topdown::builtin_tree()).to_json());
  }, py::arg("events"), py::arg("width") = 4.0, py::arg("label") = "");

  m.def("cluster_json", [](const fs::path& metrics, double variance, const std::string& linkage,
                           std::optional<std::size_t> cut, bool standardize) {
    const auto l = similarity::parse_linkage(linkage);
    if (!l) throw InvalidArgument("unknown linkage '" + linkage + "'");
    const auto table = similarity::load_metric_csv(metrics);
    similarity::ClusterOptions opt;
    opt.variance_threshold = variance;
    opt.linkage = *l;
    opt.cut = cut;
    opt.standardize = standardize;
    return dump(similarity::cluster_workloads(table, opt).to_json());
  }, py::arg("metrics"), py::arg("variance") = 0.9, py::arg("linkage") = "average",
     py::arg("cut") = py::none(), py::arg("standardize") = true);
}
