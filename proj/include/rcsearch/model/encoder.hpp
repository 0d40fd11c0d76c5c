#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rcsearch/mol/features.hpp"
#include "rcsearch/mol/graph.hpp"
#include "rcsearch/tensor/ops.hpp"
#include "rcsearch/tensor/params.hpp"

namespace rcs::model {

using tensor::Matrix;
using tensor::ParameterStore;
using tensor::Segments;
using tensor::Tape;
using tensor::Var;

struct EncoderConfig {
  int layers = 4;
  int heads = 4;
  int dim = 256;
  // Self-loop message edges with a learnable bond feature. Without them an
  // isolated atom has nothing to attend over.
  bool self_loops = true;

  void validate() const;
};

// A molecule prepared for the encoder: features plus directed message edges
// sorted by receiver. Edge e carries a message src[e] -> dst[e]; bond[e] is
// the undirected bond it came from, or -1 for a self-loop.
struct PreparedGraph {
  const mol::MolGraph *graph = nullptr;
  mol::FeatureEncoding features;
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<int> bond;

  std::size_t num_nodes() const { return features.num_atoms; }
};

PreparedGraph prepare_graph(const mol::MolGraph &g, bool self_loops);

// Disjoint union of several prepared graphs.
struct GraphBatch {
  std::size_t num_graphs = 0;
  std::size_t num_nodes = 0;
  std::size_t num_bonds = 0;
  Matrix atom_features;  // num_nodes x 135
  Matrix bond_features;  // num_bonds x 15
  std::vector<int> src, dst;
  // Row in [bond_input ; self_bond] feeding each directed edge.
  std::vector<int> edge_input_row;
  Segments receivers;     // per node: its incoming edges
  Segments graph_nodes;   // per graph: its nodes
  std::vector<int> bond_edges;  // non-self directed edges, grouped by graph
  Segments graph_bond_edges;    // per graph: its range in bond_edges
  std::vector<std::size_t> node_offset;  // first node of each graph

  static GraphBatch build(std::span<const PreparedGraph *const> graphs);
};

struct EncodedBatch {
  Var nodes;   // num_nodes x d
  Var edges;   // num_directed_edges x d
  Var graph;   // num_graphs x d
  Var h_nodes, h_edges;  // readout inputs, num_graphs x d
  // Attention coefficients per layer and head (num_directed_edges x 1).
  std::vector<std::vector<Var>> attention;
};

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore &store, const std::string &name, std::size_t in, std::size_t out, bool bias = true);

  Var operator()(Tape &t, ParameterStore &store, Var x) const;
  std::size_t weight() const { return w_; }
  std::size_t bias() const { return b_; }
  bool has_bias() const { return has_bias_; }

 private:
  std::size_t w_ = 0;
  std::size_t b_ = 0;
  bool has_bias_ = false;
};

// Two affine maps with ELU between.
class Mlp2 {
 public:
  Mlp2() = default;
  Mlp2(ParameterStore &store, const std::string &name, std::size_t in, std::size_t hidden, std::size_t out);
  Var operator()(Tape &t, ParameterStore &store, Var x) const;

  const Linear &first() const { return l0_; }
  const Linear &second() const { return l1_; }

 private:
  Linear l0_, l1_;
};

struct EgatHead {
  std::size_t W = 0, A = 0, a = 0;
};

struct EgatLayer {
  std::vector<EgatHead> heads;
  std::size_t edge_fusion = 0;
  Mlp2 node_mlp;
};

// Edge-featured graph attention stack with mean/abs-difference readout.
class Encoder {
 public:
  Encoder() = default;
  Encoder(ParameterStore &store, const EncoderConfig &config);

  const EncoderConfig &config() const { return config_; }

  EncodedBatch forward(Tape &t, ParameterStore &store, const GraphBatch &batch) const;

 private:
  EncoderConfig config_;
  Linear atom_in_, bond_in_;
  std::size_t self_bond_ = 0;
  std::vector<EgatLayer> layers_;
  Mlp2 readout_;
};

// Mean of the selected rows of `node_embs` (zero row for an empty set).
Matrix subgraph_embedding(const Matrix &node_embs, const mol::NodeSet &selected);

}  // namespace rcs::model
