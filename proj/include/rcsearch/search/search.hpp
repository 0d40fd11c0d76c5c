#pragma once

#include <cstddef>
#include <vector>

#include "rcsearch/model/qnet.hpp"
#include "rcsearch/mol/graph.hpp"

namespace rcs::search {

struct ScoredSet {
  mol::NodeSet nodes;
  double score = 0.0;

  bool operator==(const ScoredSet &) const = default;
};

struct BeamHypothesis {
  mol::NodeSet nodes;
  double score = 0.0;  // Q of the action that admitted it; Q(s, STOP) once completed
  bool completed = false;
  int step = 0;
};

// Score descending, then smaller set, then lexicographic ids.
bool ranks_before(const ScoredSet &a, const ScoredSet &b);

struct BeamOptions {
  std::size_t beam = 3;
  bool one_hop = true;
};

// Level-synchronous beam search over selections. Completed hypotheses live
// in a pool that persists across levels, keyed by node set, ranked by
// Q(s, STOP). Throws Error(kEmptyGraph) / Error(kInvalidConfig) for beam 0.
std::vector<ScoredSet> beam_search(const model::GraphQ &q, const mol::MolGraph &g, const BeamOptions &options);

// Argmax rollout with first-maximum tie-breaking.
ScoredSet greedy_rollout(const model::GraphQ &q, const mol::MolGraph &g, bool one_hop = true);

inline constexpr std::size_t kDefaultSubsetBound = 1'000'000;

// Every connected node subset of size <= max_size exactly once, ordered by
// size then lexicographically. Throws Error(kSizeExplosion) past `bound`.
std::vector<mol::NodeSet> enumerate_connected_subsets(const mol::MolGraph &g, std::size_t max_size,
                                                      std::size_t bound = kDefaultSubsetBound);

// Scores every connected subset by Q(S, STOP); top k by ranks_before.
std::vector<ScoredSet> exhaustive_topk(const model::GraphQ &q, const mol::MolGraph &g, std::size_t k,
                                       std::size_t max_size, std::size_t bound = kDefaultSubsetBound);

}  // namespace rcs::search
