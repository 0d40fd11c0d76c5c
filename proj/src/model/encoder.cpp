#include "rcsearch/model/encoder.hpp"

#include "rcsearch/error.hpp"

namespace rcs::model {

using namespace tensor;

void EncoderConfig::validate() const {
  if (layers < 1 || heads < 1 || dim < 1) {
    throw Error(ErrorCode::kInvalidConfig, "encoder needs layers, heads and dim >= 1 (got L=" +
                                               std::to_string(layers) + " K=" + std::to_string(heads) +
                                               " d=" + std::to_string(dim) + ")");
  }
}

PreparedGraph prepare_graph(const mol::MolGraph &g, bool self_loops) {
  PreparedGraph p;
  p.graph = &g;
  p.features = mol::featurize(g);
  for (int i = 0; i < g.num_atoms(); ++i) {
    bool self_done = !self_loops;
    for (const mol::Neighbor &nb : g.neighbors(i)) {
      if (!self_done && nb.node > i) {
        p.src.push_back(i);
        p.dst.push_back(i);
        p.bond.push_back(-1);
        self_done = true;
      }
      p.src.push_back(nb.node);
      p.dst.push_back(i);
      p.bond.push_back(nb.bond);
    }
    if (!self_done) {
      p.src.push_back(i);
      p.dst.push_back(i);
      p.bond.push_back(-1);
    }
  }
  return p;
}

GraphBatch GraphBatch::build(std::span<const PreparedGraph *const> graphs) {
  GraphBatch b;
  b.num_graphs = graphs.size();
  std::size_t edges = 0;
  for (const PreparedGraph *g : graphs) {
    b.num_nodes += g->features.num_atoms;
    b.num_bonds += g->features.num_bonds;
    edges += g->src.size();
  }
  b.atom_features = Matrix(b.num_nodes, mol::AtomFeatureLayout::kWidth);
  b.bond_features = Matrix(b.num_bonds, mol::BondFeatureLayout::kWidth);
  b.src.reserve(edges);
  b.dst.reserve(edges);
  b.edge_input_row.reserve(edges);

  std::size_t node_base = 0;
  std::size_t bond_base = 0;
  std::vector<std::size_t> incoming(b.num_nodes, 0);
  for (const PreparedGraph *g : graphs) {
    b.node_offset.push_back(node_base);
    std::copy(g->features.atom_features.begin(), g->features.atom_features.end(),
              b.atom_features.data() + node_base * mol::AtomFeatureLayout::kWidth);
    std::copy(g->features.bond_features.begin(), g->features.bond_features.end(),
              b.bond_features.data() + bond_base * mol::BondFeatureLayout::kWidth);
    b.graph_nodes.push(g->features.num_atoms);
    std::size_t bond_edges = 0;
    for (std::size_t e = 0; e < g->src.size(); ++e) {
      const int s = g->src[e] + static_cast<int>(node_base);
      const int d = g->dst[e] + static_cast<int>(node_base);
      if (g->bond[e] >= 0) {
        b.edge_input_row.push_back(g->bond[e] + static_cast<int>(bond_base));
        b.bond_edges.push_back(static_cast<int>(b.src.size()));
        ++bond_edges;
      } else {
        b.edge_input_row.push_back(-1);
      }
      b.src.push_back(s);
      b.dst.push_back(d);
      ++incoming[static_cast<std::size_t>(d)];
    }
    b.graph_bond_edges.push(bond_edges);
    node_base += g->features.num_atoms;
    bond_base += g->features.num_bonds;
  }
  // Self-loops read the extra row appended after the bond inputs.
  for (int &r : b.edge_input_row) {
    if (r < 0) r = static_cast<int>(b.num_bonds);
  }
  for (std::size_t i = 0; i < b.num_nodes; ++i) {
    if (incoming[i] == 0) {
      throw Error(ErrorCode::kIsolatedNode, "node " + std::to_string(i) + " has no incoming message edge");
    }
    b.receivers.push(incoming[i]);
  }
  return b;
}

Linear::Linear(ParameterStore &store, const std::string &name, std::size_t in, std::size_t out, bool bias)
    : has_bias_(bias) {
  w_ = store.add(name + ".W", in, out);
  if (bias) b_ = store.add(name + ".b", 1, out);
}

Var Linear::operator()(Tape &t, ParameterStore &store, Var x) const {
  Var y = matmul(x, t.param(store, w_));
  return has_bias_ ? add(y, t.param(store, b_)) : y;
}

Mlp2::Mlp2(ParameterStore &store, const std::string &name, std::size_t in, std::size_t hidden, std::size_t out)
    : l0_(store, name + ".0", in, hidden), l1_(store, name + ".1", hidden, out) {}

Var Mlp2::operator()(Tape &t, ParameterStore &store, Var x) const { return l1_(t, store, elu(l0_(t, store, x))); }

Encoder::Encoder(ParameterStore &store, const EncoderConfig &config) : config_(config) {
  config.validate();
  const auto d = static_cast<std::size_t>(config.dim);
  const auto k = static_cast<std::size_t>(config.heads);
  atom_in_ = Linear(store, "input.atom", mol::AtomFeatureLayout::kWidth, d);
  bond_in_ = Linear(store, "input.bond", mol::BondFeatureLayout::kWidth, d);
  self_bond_ = store.add("input.self_bond", 1, d);
  for (int l = 0; l < config.layers; ++l) {
    const std::string prefix = "egat." + std::to_string(l);
    EgatLayer layer;
    for (int h = 0; h < config.heads; ++h) {
      const std::string hp = prefix + "." + std::to_string(h);
      layer.heads.push_back({store.add(hp + ".W", d, d), store.add(hp + ".A", 3 * d, d), store.add(hp + ".a", 1, d)});
    }
    layer.edge_fusion = store.add(prefix + ".edge_fusion", k * d, d);
    layer.node_mlp = Mlp2(store, prefix + ".node_mlp", k * d, d, d);
    layers_.push_back(std::move(layer));
  }
  readout_ = Mlp2(store, "readout", 2 * d, d, d);
}

EncodedBatch Encoder::forward(Tape &t, ParameterStore &store, const GraphBatch &batch) const {
  const auto d = static_cast<std::size_t>(config_.dim);
  EncodedBatch out;
  Var h = atom_in_(t, store, t.constant(batch.atom_features));
  Var bond_rows = bond_in_(t, store, t.constant(batch.bond_features));
  Var f = gather_rows(concat({bond_rows, t.param(store, self_bond_)}, 0), batch.edge_input_row);

  for (const EgatLayer &layer : layers_) {
    std::vector<Var> node_heads, edge_heads, attention;
    for (const EgatHead &head : layer.heads) {
      const Var A = t.param(store, head.A);
      const Var hw = matmul(h, t.param(store, head.W));
      // [h_i W | f_ij | h_j W] A split into the three row blocks of A.
      const Var recv = matmul(hw, slice_rows(A, 0, d));
      const Var send = matmul(hw, slice_rows(A, 2 * d, d));
      const Var fe = matmul(f, slice_rows(A, d, d));
      const Var fp = leaky_relu(add(add(gather_rows(recv, batch.dst), fe), gather_rows(send, batch.src)));
      const Var logits = matmul(fp, transpose(t.param(store, head.a)));
      const Var alpha = segment_softmax(logits, batch.receivers);
      const Var msg = scale_rows(gather_rows(hw, batch.src), alpha);
      node_heads.push_back(elu(segment_sum(msg, batch.receivers)));
      edge_heads.push_back(fp);
      attention.push_back(alpha);
    }
    const Var hcat = node_heads.size() == 1 ? node_heads.front() : concat(node_heads, 1);
    const Var fcat = edge_heads.size() == 1 ? edge_heads.front() : concat(edge_heads, 1);
    h = layer.node_mlp(t, store, hcat);
    f = matmul(fcat, t.param(store, layer.edge_fusion));
    out.attention.push_back(std::move(attention));
  }

  const Var h_nodes = segment_mean(h, batch.graph_nodes);
  const Var h_edges = segment_mean(gather_rows(f, batch.bond_edges), batch.graph_bond_edges);
  const Var joined = concat({abs(sub(h_nodes, h_edges)), add(h_nodes, h_edges)}, 1);
  out.h_nodes = h_nodes;
  out.h_edges = h_edges;
  out.nodes = h;
  out.edges = f;
  out.graph = readout_(t, store, joined);
  return out;
}

Matrix subgraph_embedding(const Matrix &node_embs, const mol::NodeSet &selected) {
  Matrix out(1, node_embs.cols());
  if (selected.empty()) return out;
  for (int i : selected) {
    if (i < 0 || static_cast<std::size_t>(i) >= node_embs.rows()) {
      throw Error(ErrorCode::kInvalidNodeId, "node " + std::to_string(i) + " outside [0," +
                                                 std::to_string(node_embs.rows()) + ")");
    }
    const auto row = node_embs.row(static_cast<std::size_t>(i));
    for (std::size_t c = 0; c < out.cols(); ++c) out[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(selected.size());
  for (std::size_t c = 0; c < out.cols(); ++c) out[c] *= inv;
  return out;
}

}  // namespace rcs::model
