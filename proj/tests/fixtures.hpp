#pragma once

// Constructed inputs shared by the unit and acceptance tests.

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "motifbench/datagen.hpp"
#include "motifbench/fft.hpp"
#include "motifbench/kernels.hpp"
#include "motifbench/rng.hpp"
#include "motifbench/similarity.hpp"
#include "motifbench/topdown.hpp"

namespace fixtures {

using motifbench::SplitMix64;
using motifbench::topdown::EventSample;
using motifbench::topdown::builtin_tree;
using motifbench::topdown::required_events;

// Every event of the builtin tree set to zero, then overridden.
inline EventSample zero_sample(double width, double cycles, std::map<std::string, double> set) {
  EventSample s;
  s.width = width;
  s.cycles = cycles;
  for (const auto& e : required_events(builtin_tree())) s.events[e] = 0;
  for (const auto& [k, v] : set) s.events[k] = v;
  s.events["cycles"] = cycles;
  return s;
}

// Random counts obeying the hardware inclusion relations (stall subsets
// nested, issued >= retired, causes bounded by their parent cycles).
inline EventSample random_valid(SplitMix64& rng) {
  const double width = static_cast<double>(2 + rng.below(5));
  const double cycles = rng.uniform(1e5, 1e9);
  const double slots = width * cycles;
  double w[4];
  double tot = 0;
  for (double& x : w) tot += (x = rng.uniform(0.01, 1));
  for (double& x : w) x /= tot;

  std::map<std::string, double> e;
  e["uops_retired"] = w[0] * slots;
  e["ms_uops"] = rng.uniform() * e["uops_retired"];
  const double bad = w[1] * slots;
  e["recovery_cycles"] = rng.uniform() * bad / width;
  e["uops_issued"] = e["uops_retired"] + bad - width * e["recovery_cycles"];
  e["br_mispredicts"] = rng.uniform(0, 1e6);
  e["machine_clears"] = rng.uniform(0, 1e5);
  e["idq_uops_not_delivered"] = w[2] * slots;
  e["fe_latency_cycles"] = rng.uniform() * e["idq_uops_not_delivered"] / width;
  double left = e["fe_latency_cycles"];
  for (const char* c : {"icache_stall_cycles", "itlb_miss_cycles", "branch_resteer_cycles",
                        "dsb_switch_cycles", "lcp_stall_cycles", "ms_switch_cycles"}) {
    e[c] = rng.uniform() * left;
    left -= e[c];
  }
  for (const char* c : {"mite_bw_cycles", "dsb_bw_cycles", "lsd_bw_cycles"}) e[c] = rng.uniform(0, 1e7);
  e["backend_stall_cycles"] = rng.uniform(1, cycles);
  e["mem_stall_cycles"] = rng.uniform() * e["backend_stall_cycles"];
  e["store_buffer_stall_cycles"] =
      rng.uniform() * (e["backend_stall_cycles"] - e["mem_stall_cycles"]);
  e["divider_cycles"] = rng.uniform() * (e["backend_stall_cycles"] - e["mem_stall_cycles"] -
                                         e["store_buffer_stall_cycles"]);
  e["l1d_miss_stall_cycles"] = rng.uniform() * e["mem_stall_cycles"];
  e["l2_miss_stall_cycles"] = rng.uniform() * e["l1d_miss_stall_cycles"];
  e["l3_miss_stall_cycles"] = rng.uniform() * e["l2_miss_stall_cycles"];
  e["dram_bw_cycles"] = rng.uniform() * e["l3_miss_stall_cycles"];
  for (const char* c : {"local_dram_loads", "remote_dram_loads", "remote_cache_loads"})
    e[c] = rng.uniform(0, 1e6);
  e["instructions_retired"] = rng.uniform(0, 4) * cycles;
  e["l1d_pend_miss_cycles"] = rng.uniform(0, cycles);
  e["l1d_pend_miss_occupancy"] = rng.uniform(1, 10) * e["l1d_pend_miss_cycles"];
  return zero_sample(width, cycles, e);
}

struct GroupedMetrics {
  motifbench::similarity::MetricTable table;
  std::vector<std::size_t> truth;
};

// Three groups of 3..6 members around random centers scaled so the closest
// pair of centers is exactly 1.0 apart, with N(0, sigma) noise, shuffled.
inline GroupedMetrics three_groups(SplitMix64& rng, std::size_t dims, double sigma) {
  std::vector<std::vector<double>> centers(3, std::vector<double>(dims));
  for (auto& c : centers)
    for (auto& v : c) v = rng.uniform();
  double min_sep = INFINITY;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      double s = 0;
      for (std::size_t j = 0; j < dims; ++j) s += std::pow(centers[a][j] - centers[b][j], 2);
      min_sep = std::min(min_sep, std::sqrt(s));
    }
  for (auto& c : centers)
    for (auto& v : c) v /= min_sep;

  GroupedMetrics out;
  for (std::size_t j = 0; j < dims; ++j) out.table.names.push_back("m" + std::to_string(j));
  for (int g = 0; g < 3; ++g) {
    const std::size_t members_n = 3 + rng.below(4);
    for (std::size_t i = 0; i < members_n; ++i) {
      std::vector<double> row(dims);
      for (std::size_t j = 0; j < dims; ++j) row[j] = centers[g][j] + rng.gaussian(0, sigma);
      out.table.rows.push_back(row);
      out.table.labels.push_back("g" + std::to_string(g) + "-" + std::to_string(i));
      out.truth.push_back(static_cast<std::size_t>(g));
    }
  }
  for (std::size_t i = out.table.rows.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(out.table.rows[i - 1], out.table.rows[j]);
    std::swap(out.table.labels[i - 1], out.table.labels[j]);
    std::swap(out.truth[i - 1], out.truth[j]);
  }
  return out;
}

// sift-like, composed by hand from the kernel functions.
inline motifbench::Dataset manual_sift() {
  using namespace motifbench;
  namespace kn = motifbench::kernels;
  auto img = datagen::gen_matrix({64, 64, datagen::Distribution::parse("uniform:0,1"), 7});
  Matrix small = kn::downsample(img.as<Matrix>(), 2);
  ComplexMatrix spectrum = complex_matrix(to_tensor(fft2d(small)));
  kn::lowpass(spectrum.data, spectrum.rows, spectrum.cols, 8);
  ComplexMatrix back = fft2d(spectrum, true);
  std::vector<double> re(back.data.size());
  for (std::size_t i = 0; i < re.size(); ++i) re[i] = back.data[i].real();
  Matrix blurred(back.rows, back.cols, re);
  Matrix dog = kn::mat_elementwise(small, blurred, kn::ElementwiseOp::Subtract);
  Matrix ranked = kn::sort_records(dog, 0);
  auto c = kn::count_records(ranked, 0.1);
  return Dataset(KeyValueSet({{"count", std::to_string(c.count)},
                              {"total", std::to_string(c.total)}}));
}

}  // namespace fixtures
