#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rcsearch/mol/dataset.hpp"
#include "rcsearch/random.hpp"

namespace rcs::baselines {

// Fixed-width bit vector.
class Fingerprint {
 public:
  Fingerprint() = default;
  explicit Fingerprint(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

  std::size_t width() const { return nbits_; }
  void set(std::size_t bit) { words_[bit / 64] |= std::uint64_t{1} << (bit % 64); }
  bool test(std::size_t bit) const { return (words_[bit / 64] >> (bit % 64)) & 1u; }
  std::size_t count() const;
  const std::vector<std::uint64_t> &words() const { return words_; }

  bool operator==(const Fingerprint &) const = default;

 private:
  std::size_t nbits_ = 0;
  std::vector<std::uint64_t> words_;
};

// Morgan/ECFP-style: atom invariants (element, degree, charge, aromatic,
// H count), then `radius` rounds combining each atom's hash with its sorted
// (bond order, neighbour hash) pairs. Every round's hashes set bit h % nbits.
// All hashing goes through hash_combine (splitmix64 finaliser).
Fingerprint ecfp_fingerprint(const mol::MolGraph &g, int radius = 2, std::size_t nbits = 2048);

// |a & b| / |a | b|, 0 when both are empty. Throws Error(kWidthMismatch).
double tanimoto(const Fingerprint &a, const Fingerprint &b);

// Every injective map m (pattern node i -> target node m[i]) preserving
// element and aromaticity, with target bonds between mapped nodes exactly
// where the pattern has them and of the same order. Lexicographic order.
// Throws Error(kMatchExplosion) past max_matches, Error(kEmptyGraph) for an
// empty pattern.
std::vector<std::vector<int>> subgraph_match(const mol::MolGraph &pattern, const mol::MolGraph &target,
                                             std::size_t max_matches = 10000);

// Distinct target node sets covered by the matches, sorted.
std::vector<mol::NodeSet> matched_node_sets(const std::vector<std::vector<int>> &matches);

struct SimOptions {
  int radius = 2;
  std::size_t nbits = 2048;
  std::size_t max_matches = 10000;
};

// Retrieval baseline: rank training products by Tanimoto similarity to the
// query, then walk the ranking, matching each neighbour's reaction-center
// pattern into the query. One prediction per neighbour with a match (a
// random one when several node sets match); duplicates are skipped.
class SimRetriever {
 public:
  SimRetriever(std::span<const mol::Sample> train, const SimOptions &options = {});

  std::size_t size() const { return fingerprints_.size(); }
  const Fingerprint &fingerprint(std::size_t i) const { return fingerprints_[i]; }

  // Training indices by descending similarity, ties in training order.
  std::vector<std::size_t> neighbours(const mol::MolGraph &query) const;

  // `repeats` ranked lists of up to kmax node sets each.
  std::vector<std::vector<mol::NodeSet>> predict(const mol::MolGraph &query, std::size_t kmax, std::size_t repeats,
                                                 Rng &rng) const;

 private:
  SimOptions options_;
  std::vector<Fingerprint> fingerprints_;
  std::vector<mol::MolGraph> patterns_;  // empty graph: unusable label
};

}  // namespace rcs::baselines
