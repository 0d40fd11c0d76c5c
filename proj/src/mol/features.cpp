#include "rcsearch/mol/features.hpp"

#include <algorithm>

namespace rcs::mol {
namespace {

std::size_t clamp_index(int value, std::size_t width) {
  if (value < 0 || static_cast<std::size_t>(value) >= width) return width - 1;
  return static_cast<std::size_t>(value);
}

}  // namespace

FeatureEncoding featurize(const MolGraph &g) {
  using AL = AtomFeatureLayout;
  using BL = BondFeatureLayout;
  FeatureEncoding enc;
  enc.num_atoms = static_cast<std::size_t>(g.num_atoms());
  enc.num_bonds = static_cast<std::size_t>(g.num_bonds());
  enc.atom_features.assign(enc.num_atoms * AL::kWidth, 0.0);
  enc.bond_features.assign(enc.num_bonds * BL::kWidth, 0.0);

  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atom(i);
    double *row = enc.atom_features.data() + static_cast<std::size_t>(i) * AL::kWidth;
    std::size_t base = 0;
    row[base + clamp_index(a.z - 1, AL::kAtomType)] = 1.0;
    base += AL::kAtomType;
    row[base + clamp_index(a.heavy_degree + a.total_h(), AL::kTotalDegree)] = 1.0;
    base += AL::kTotalDegree;
    row[base + clamp_index(g.explicit_valence(i), AL::kExplicitValence)] = 1.0;
    base += AL::kExplicitValence;
    row[base + clamp_index(a.implicit_h, AL::kImplicitValence)] = 1.0;
    base += AL::kImplicitValence;
    row[base + clamp_index(static_cast<int>(a.hybridization), AL::kHybridization)] = 1.0;
    base += AL::kHybridization;
    row[base + clamp_index(a.total_h(), AL::kNumHs)] = 1.0;
    base += AL::kNumHs;
    row[base + clamp_index(a.formal_charge + 2, AL::kFormalCharge)] = 1.0;  // -2..+2
    base += AL::kFormalCharge;
    row[base] = a.aromatic ? 1.0 : 0.0;
    base += AL::kAromatic;
    row[base] = a.in_ring ? 1.0 : 0.0;
  }

  for (int i = 0; i < g.num_bonds(); ++i) {
    const Bond &b = g.bond(i);
    double *row = enc.bond_features.data() + static_cast<std::size_t>(i) * BL::kWidth;
    std::size_t base = 0;
    row[base + static_cast<std::size_t>(b.order)] = 1.0;
    base += BL::kBondType;
    row[base] = b.conjugated ? 1.0 : 0.0;
    base += BL::kConjugated;
    row[base] = b.in_ring ? 1.0 : 0.0;
    base += BL::kInRing;
    row[base + clamp_index(b.stereo, BL::kStereo)] = 1.0;
    base += BL::kStereo;
    row[base + clamp_index(b.direction, BL::kDirection)] = 1.0;
  }
  return enc;
}

}  // namespace rcs::mol
