#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rcsearch/tensor/params.hpp"

namespace rcs::tensor {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary checkpoint layout (all integers little-endian u32), see
// docs/checkpoint_format.md:
//   magic "RCSQ" | version | parameter count
//   per parameter: name length | name bytes | rank | dims... | f32 payload
//   trailer: FNV-1a 32-bit checksum of every preceding byte
std::vector<std::uint8_t> encode_checkpoint(const ParameterStore &store);

// Loads values into a store whose layout (names, order, shapes) must match.
// Throws Error(kCorruptFile) on truncation/bad magic/checksum and
// Error(kVersionMismatch) on format-version or layout mismatch.
void decode_checkpoint(const std::vector<std::uint8_t> &bytes, ParameterStore &store);

void save_checkpoint(const ParameterStore &store, const std::filesystem::path &path);
void load_checkpoint(const std::filesystem::path &path, ParameterStore &store);

}  // namespace rcs::tensor
