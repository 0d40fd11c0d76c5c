#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "rcsearch/mol/graph.hpp"

namespace rcs::mol {

// One-hot block widths of the atom encoding, in layout order.
struct AtomFeatureLayout {
  static constexpr std::size_t kAtomType = 100;
  static constexpr std::size_t kTotalDegree = 6;
  static constexpr std::size_t kExplicitValence = 6;
  static constexpr std::size_t kImplicitValence = 6;
  static constexpr std::size_t kHybridization = 5;
  static constexpr std::size_t kNumHs = 5;
  static constexpr std::size_t kFormalCharge = 5;
  static constexpr std::size_t kAromatic = 1;
  static constexpr std::size_t kInRing = 1;
  static constexpr std::array<std::size_t, 9> kBlocks = {kAtomType,     kTotalDegree, kExplicitValence,
                                                         kImplicitValence, kHybridization, kNumHs,
                                                         kFormalCharge, kAromatic,     kInRing};
  static constexpr std::size_t kWidth = 135;
};

struct BondFeatureLayout {
  static constexpr std::size_t kBondType = 4;
  static constexpr std::size_t kConjugated = 1;
  static constexpr std::size_t kInRing = 1;
  static constexpr std::size_t kStereo = 6;
  static constexpr std::size_t kDirection = 3;
  static constexpr std::array<std::size_t, 5> kBlocks = {kBondType, kConjugated, kInRing, kStereo, kDirection};
  static constexpr std::size_t kWidth = 15;
};

// Row-major feature matrices: atoms x 135 and bonds x 15, values 0/1.
struct FeatureEncoding {
  std::size_t num_atoms = 0;
  std::size_t num_bonds = 0;
  std::vector<double> atom_features;
  std::vector<double> bond_features;

  const double *atom_row(std::size_t i) const { return atom_features.data() + i * AtomFeatureLayout::kWidth; }
  const double *bond_row(std::size_t i) const { return bond_features.data() + i * BondFeatureLayout::kWidth; }
};

// Categorical values beyond a block's range land on the block's last index.
FeatureEncoding featurize(const MolGraph &g);

}  // namespace rcs::mol
