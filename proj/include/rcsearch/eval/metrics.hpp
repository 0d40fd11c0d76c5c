#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcsearch/mol/dataset.hpp"

namespace rcs::eval {

inline constexpr std::size_t kReportK = 4;

// hits[k-1] is true iff the label equals one of the first k predictions.
std::vector<bool> topk_exact_match(std::span<const mol::NodeSet> predictions, const mol::NodeSet &label,
                                   std::size_t kmax);

struct SamplePrediction {
  std::string id;
  std::vector<mol::NodeSet> predictions;
  std::vector<double> scores;
};

struct StratumStats {
  std::size_t count = 0;
  std::array<std::size_t, kReportK> hits{};

  double accuracy(std::size_t k) const;  // k in 1..4; 0 for an empty stratum
  nlohmann::ordered_json to_json() const;
};

struct EvalReport {
  StratumStats overall;
  std::map<std::string, StratumStats> by_edges;     // atom_only, 1, 2, 3+
  std::map<std::string, StratumStats> by_rc_type;   // single, multiple
  std::map<std::string, StratumStats> by_branches;  // 1, 2, 3+
  std::optional<std::size_t> extrapolated_samples;
  std::optional<std::size_t> extrapolated_patterns;

  // Pools counts and hits, e.g. over repeated randomized runs.
  void merge(const EvalReport &other);

  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::json &j);
};

std::string edge_stratum(const mol::MolGraph &g, const mol::NodeSet &rc);
std::string rc_type_stratum(const mol::MolGraph &g, const mol::NodeSet &rc);
std::string branch_stratum(const mol::MolGraph &g, const mol::NodeSet &rc);

// Canonical form of the labelled subgraph induced by `nodes`: atoms labelled
// by element and aromaticity, bonds by order, refined by neighbourhood
// hashing until the partition is stable. Isomorphic subgraphs always agree;
// distinct ones collide only where colour refinement cannot separate them
// (regular graphs of 6+ nodes, far beyond reaction-center sizes here).
std::uint64_t pattern_hash(const mol::MolGraph &g, const mol::NodeSet &nodes);

// Aggregates predictions over `dataset` (matched by id). When `train` is
// given, also counts correct top-1 predictions whose label pattern is absent
// from the training labels, per sample and per distinct pattern.
// Throws Error(kMissingPrediction).
EvalReport stratified_report(std::span<const SamplePrediction> predictions, std::span<const mol::Sample> dataset,
                             std::span<const mol::Sample> train = {});

struct ExtrapolationCount {
  std::size_t samples = 0;
  std::size_t patterns = 0;
};

ExtrapolationCount extrapolation_count(std::span<const SamplePrediction> predictions,
                                       std::span<const mol::Sample> test, std::span<const mol::Sample> train);

}  // namespace rcs::eval
