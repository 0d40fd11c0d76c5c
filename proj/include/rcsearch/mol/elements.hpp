#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace rcs::mol {

inline constexpr int kMaxAtomicNumber = 118;

// Symbol for atomic number z (1..118); empty view when out of range.
std::string_view element_symbol(int z);

// Atomic number for a capitalised symbol ("C", "Cl", "Se").
std::optional<int> atomic_number(std::string_view symbol);

// Default valences used for implicit-hydrogen accounting of organic-subset
// atoms. Empty for elements outside B, C, N, O, P, S and the halogens.
std::span<const int> default_valences(int z);

}  // namespace rcs::mol
