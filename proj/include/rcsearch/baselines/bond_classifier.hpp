#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rcsearch/model/encoder.hpp"
#include "rcsearch/mol/dataset.hpp"
#include "rcsearch/search/search.hpp"

namespace rcs::baselines {

struct BondClassifierConfig {
  model::EncoderConfig encoder;
  // Disconnection-count classes 1..count_classes; larger counts clamp.
  int count_classes = 6;
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  tensor::AdamConfig adam;

  void validate() const;
};

// Bonds whose endpoints both lie in `rc`, ascending.
std::vector<int> label_bonds(const mol::MolGraph &g, const mol::NodeSet &rc);

struct BondScores {
  std::vector<double> bond_prob;   // per bond of the graph
  std::vector<double> count_prob;  // index n-1 for n disconnections
};

struct BondSet {
  std::vector<int> bonds;
  double log_prob = 0.0;
};

// The k most probable (count, bond subset) pairs, |subset| = count, under
// P(n) * prod_{b in S} p_b * prod_{b not in S} (1 - p_b); descending.
std::vector<BondSet> kbest_bond_sets(const BondScores &scores, std::size_t k);

// EGAT encoder, a per-bond logit head over [e_uv + e_vu | h_u + h_v] and a
// count head over the graph embedding.
class BondClassifier {
 public:
  explicit BondClassifier(const BondClassifierConfig &config);

  const BondClassifierConfig &config() const { return config_; }
  tensor::ParameterStore create_parameters(std::uint64_t seed) const;
  tensor::ParameterStore layout() const { return layout_; }

  struct Logits {
    tensor::Var bonds;   // num_bonds x 1, batch bond order
    tensor::Var counts;  // num_graphs x count_classes
  };
  Logits forward(tensor::Tape &t, tensor::ParameterStore &store, const model::GraphBatch &batch) const;

  BondScores score(const tensor::ParameterStore &store, const mol::MolGraph &g) const;

  // Node sets (endpoint unions) of the most probable bond subsets, distinct,
  // at most k. Empty for a graph without bonds.
  std::vector<search::ScoredSet> predict(const tensor::ParameterStore &store, const mol::MolGraph &g,
                                         std::size_t k) const;

 private:
  BondClassifierConfig config_;
  tensor::ParameterStore layout_;
  model::Encoder encoder_;
  model::Mlp2 bond_head_;
  model::Mlp2 count_head_;
};

struct BondTrainResult {
  std::vector<double> epoch_loss;
  std::size_t excluded = 0;  // atom-only or invalid labels
};

// Joint loss: mean per-bond binary cross-entropy + count cross-entropy.
// Throws Error(kEmptyTrainSet) when no sample has a bond in its label.
BondTrainResult train_bond_classifier(const BondClassifier &model, tensor::ParameterStore &store,
                                      std::span<const mol::Sample> train, std::uint64_t seed);

}  // namespace rcs::baselines
