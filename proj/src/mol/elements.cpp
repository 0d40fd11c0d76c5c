#include "rcsearch/mol/elements.hpp"

#include <array>

namespace rcs::mol {
namespace {

constexpr std::array<std::string_view, kMaxAtomicNumber + 1> kSymbols = {
    "",   "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si",
    "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu",
    "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru",
    "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr",
    "Nd", "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac",
    "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf",
    "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

constexpr std::array<int, 1> kBoron = {3};
constexpr std::array<int, 1> kCarbon = {4};
constexpr std::array<int, 2> kNitrogen = {3, 5};
constexpr std::array<int, 1> kOxygen = {2};
constexpr std::array<int, 2> kPhosphorus = {3, 5};
constexpr std::array<int, 3> kSulfur = {2, 4, 6};
constexpr std::array<int, 1> kHalogen = {1};

}  // namespace

std::string_view element_symbol(int z) {
  if (z < 1 || z > kMaxAtomicNumber) return {};
  return kSymbols[static_cast<std::size_t>(z)];
}

std::optional<int> atomic_number(std::string_view symbol) {
  for (int z = 1; z <= kMaxAtomicNumber; ++z) {
    if (kSymbols[static_cast<std::size_t>(z)] == symbol) return z;
  }
  return std::nullopt;
}

std::span<const int> default_valences(int z) {
  switch (z) {
    case 5: return kBoron;
    case 6: return kCarbon;
    case 7: return kNitrogen;
    case 8: return kOxygen;
    case 15: return kPhosphorus;
    case 16: return kSulfur;
    case 9:
    case 17:
    case 35:
    case 53: return kHalogen;
    default: return {};
  }
}

}  // namespace rcs::mol
