#include "motifbench/checksum.hpp"

#include <bit>
#include <cstdio>

namespace motifbench {

namespace {

// Streams canonical bytes into a sink. Sink must provide bytes(const void*, n).
template <typename Sink>
class CanonicalEncoder {
 public:
  explicit CanonicalEncoder(Sink& sink) : sink_(sink) {}

  void u8(std::uint8_t v) { sink_.bytes(&v, 1); }

  void u64(std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    sink_.bytes(buf, 8);
  }

  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  void str(const std::string& s) {
    u64(s.size());
    sink_.bytes(s.data(), s.size());
  }

  void payload(const Payload& p) {
    u8(static_cast<std::uint8_t>(p.index()));
    std::visit([&](const auto& v) { body(v); }, p);
  }

 private:
  void body(const TextCorpus& t) {
    u64(t.size());
    for (const auto& d : t.documents()) str(d);
  }
  void body(const Table& t) {
    u64(t.column_count());
    for (const auto& c : t.schema()) {
      str(c.name);
      u8(static_cast<std::uint8_t>(c.kind));
    }
    u64(t.row_count());
    for (const auto& row : t.rows()) {
      for (const auto& v : row) {
        if (auto* i = std::get_if<std::int64_t>(&v)) i64(*i);
        else if (auto* d = std::get_if<double>(&v)) f64(*d);
        else str(std::get<std::string>(v));
      }
    }
  }
  void body(const Matrix& m) {
    u64(m.rows());
    u64(m.cols());
    for (double v : m.data()) f64(v);
  }
  void body(const Tensor& t) {
    u64(t.rank());
    for (auto d : t.shape()) u64(d);
    for (double v : t.data()) f64(v);
  }
  void body(const Graph& g) {
    u64(g.vertex_count());
    u8(g.directed() ? 1 : 0);
    u64(g.edges().size());
    for (const auto& e : g.edges()) {
      u64(e.source);
      u64(e.target);
    }
  }
  void body(const KeyValueSet& kv) {
    u64(kv.size());
    for (const auto& [k, v] : kv.entries()) {
      str(k);
      str(v);
    }
  }

  Sink& sink_;
};

struct Fnv1a {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  }
};

struct Counter {
  std::uint64_t n = 0;
  void bytes(const void*, std::size_t k) { n += k; }
};

}  // namespace

std::uint64_t checksum_payload(const Payload& payload) {
  Fnv1a sink;
  CanonicalEncoder<Fnv1a>(sink).payload(payload);
  return sink.h;
}

std::uint64_t canonical_size(const Payload& payload) {
  Counter sink;
  CanonicalEncoder<Counter>(sink).payload(payload);
  return sink.n;
}

std::string format_digest(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

}  // namespace motifbench
