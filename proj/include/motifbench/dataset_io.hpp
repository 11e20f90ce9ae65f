#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "motifbench/dataset.hpp"

namespace motifbench {

struct SaveOptions {
  // Write matrices as CSV rows instead of raw binary64.
  bool text_matrix = false;
};

// File formats (all headers are a single LF-terminated line):
//   text    no header, one document per line
//   table   "#table v1", "name:kind,..." schema line, RFC-4180 CSV rows
//   matrix  "#matrix v1 <rows> <cols>" + binary64 LE row-major, or
//           "#matrix v1 <rows> <cols> text" + CSV rows
//   tensor  "#tensor v1 <d0> <d1> ..." + binary64 LE row-major
//   graph   "#graph v1 <vertex_count> <0|1>" + "src tgt" lines
//   kv      "#kv v1" + "key<TAB>value" lines
std::string encode_payload(const Payload& payload, SaveOptions options = {});
// Throws ParseError (with line when line-oriented) or InvalidArgument when the
// decoded payload violates its type invariants.
Payload decode_payload(std::string_view bytes);

// Throws IoError when the file cannot be written.
void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  SaveOptions options = {});
// Loaded datasets carry no provenance.
Dataset load_dataset(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace motifbench
