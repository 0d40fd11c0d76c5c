#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rcsearch/env/action.hpp"
#include "rcsearch/model/encoder.hpp"

namespace rcs::model {

using env::Action;

// Q(s, a) = MLP(h_G | h_rc | h_a), 3d -> d -> d -> 1 with ELU.
class QNetwork {
 public:
  QNetwork() = default;
  explicit QNetwork(const EncoderConfig &config);

  const EncoderConfig &config() const { return encoder_.config(); }
  const Encoder &encoder() const { return encoder_; }

  // Fresh, seeded parameters in the layout this network indexes into. Values
  // are rounded to float precision so checkpoints reproduce them exactly.
  ParameterStore create_parameters(std::uint64_t seed) const;
  // Empty store with the right layout (for loading checkpoints).
  ParameterStore layout() const { return layout_; }

  std::size_t h_stop() const { return h_stop_; }
  const Linear &q_layer(int i) const { return q_[static_cast<std::size_t>(i)]; }

  struct Query {
    std::size_t graph = 0;  // index within the batch
    const mol::NodeSet *selected = nullptr;
    Action action;
  };

  // One Q value per query (Q x 1), differentiable.
  Var q_values(Tape &t, ParameterStore &store, const GraphBatch &batch, const EncodedBatch &enc,
               std::span<const Query> queries) const;

 private:
  ParameterStore layout_;
  Encoder encoder_;
  std::size_t h_stop_ = 0;
  std::vector<Linear> q_;
};

// Q values for one graph under frozen parameters, without a tape. The
// encoder runs once; each state then costs one subgraph mean plus the Q-head
// on the candidate actions. The Q-head's first layer is applied blockwise so
// the graph and per-node terms are shared across states.
class GraphQ {
 public:
  GraphQ(const QNetwork &net, const ParameterStore &store, const PreparedGraph &graph);

  std::size_t num_nodes() const { return node_embs_.rows(); }
  const Matrix &node_embeddings() const { return node_embs_; }
  const Matrix &graph_embedding() const { return graph_emb_; }

  // Q(selected, a) for every action, appended in order to `out` (cleared).
  void q_values(const mol::NodeSet &selected, std::span<const Action> actions, std::vector<double> &out) const;
  double q_value(const mol::NodeSet &selected, Action action) const;

 private:
  Matrix node_embs_;
  Matrix graph_emb_;
  Matrix graph_term_;  // h_G W0[0:d] + b0
  Matrix node_term_;   // H W0[2d:3d]
  Matrix stop_term_;   // h_stop W0[2d:3d]
  Matrix rc_weight_;   // W0[d:2d]
  Matrix w1_, b1_, w2_, b2_;
};

}  // namespace rcs::model
