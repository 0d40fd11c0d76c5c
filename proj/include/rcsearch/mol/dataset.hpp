#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcsearch/mol/graph.hpp"

namespace rcs::mol {

inline constexpr int kDatasetSchemaVersion = 1;

struct Sample {
  std::string id;
  std::optional<std::string> smiles;
  MolGraph product;
  NodeSet rc;  // reaction-center node ids into `product`
};

// One JSON-Lines record (no trailing newline).
std::string sample_to_json_line(const Sample &sample);

// Parses one record. `line_number` is only used in error messages.
// Throws Error(kMalformedRecord) / Error(kSchemaVersionMismatch).
Sample sample_from_json_line(const std::string &line, std::size_t line_number = 0);

// Blank lines are skipped; an empty file yields an empty sequence.
std::vector<Sample> load_dataset(const std::filesystem::path &path);
void save_dataset(std::span<const Sample> samples, const std::filesystem::path &path);

}  // namespace rcs::mol
