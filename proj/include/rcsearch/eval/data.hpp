#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rcsearch/mol/dataset.hpp"
#include "rcsearch/random.hpp"

namespace rcs::eval {

struct Split {
  std::vector<mol::Sample> train, val, test;
};

// Seeded shuffle, then train/val/test by the given fractions (test takes the
// remainder). Throws Error(kTooFewSamples) below 10 samples.
Split split_dataset(std::span<const mol::Sample> samples, std::array<double, 3> ratios = {0.8, 0.1, 0.1},
                    std::uint64_t seed = 0);

// Planted reaction-center motifs. Each carries an element signature that the
// background palette never produces, so it occurs once per graph.
enum class Motif {
  kSulfur,        // [S]               1 atom
  kBromoCarbon,   // C-Br              2 atoms
  kPhosphoryl,    // P=O               2 atoms
  kAcylChloride,  // O=C-Cl            3 atoms
  kGemDifluoro,   // F-C-F             3 atoms
};

std::string motif_name(Motif m);
Motif parse_motif(const std::string &name);  // Error(kInvalidConfig)
// The motif as a standalone graph (the pattern a matcher looks for).
mol::MolGraph motif_pattern(Motif m);

struct GeneratorConfig {
  std::size_t count = 2400;
  int min_atoms = 12;
  int max_atoms = 20;
  // Background elements and their relative weights.
  std::vector<int> palette = {6, 7, 8};
  std::vector<double> palette_weights = {0.7, 0.15, 0.15};
  std::vector<Motif> motifs = {Motif::kSulfur, Motif::kBromoCarbon, Motif::kPhosphoryl, Motif::kAcylChloride,
                               Motif::kGemDifluoro};
  // Extra (ring-closing) bonds per atom beyond the spanning tree.
  double edge_density = 0.1;
  std::uint64_t seed = 0;
  int max_retries = 20;

  void validate() const;
};

// Each sample: a random connected background plus one planted motif; label =
// motif atoms. Sample i depends only on (seed, i). Throws
// Error(kMotifPlantFailure) if a sample cannot be built within max_retries.
std::vector<mol::Sample> generate_synthetic_dataset(const GeneratorConfig &config);
mol::Sample generate_synthetic_sample(const GeneratorConfig &config, std::size_t index);

// Random tree plus about n/2 extra single bonds over C, N and O: the
// oracle-check graphs.
mol::MolGraph random_connected_graph(Rng &rng, int n);

// Probability that the uniform-random legal policy ends exactly on `label`.
double random_policy_success(const mol::MolGraph &g, const mol::NodeSet &label, bool one_hop = true);

}  // namespace rcs::eval
