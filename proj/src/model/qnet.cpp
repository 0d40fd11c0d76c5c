#include "rcsearch/model/qnet.hpp"

#include <cmath>

#include "rcsearch/error.hpp"
#include "rcsearch/random.hpp"
#include "rcsearch/tensor/kernels.hpp"

namespace rcs::model {

using namespace tensor;

QNetwork::QNetwork(const EncoderConfig &config) {
  encoder_ = Encoder(layout_, config);
  const auto d = static_cast<std::size_t>(config.dim);
  h_stop_ = layout_.add("h_stop", 1, d);
  q_.emplace_back(layout_, "q_head.0", 3 * d, d);
  q_.emplace_back(layout_, "q_head.1", d, d);
  q_.emplace_back(layout_, "q_head.2", d, 1);
}

ParameterStore QNetwork::create_parameters(std::uint64_t seed) const {
  ParameterStore store = layout_;
  Rng rng(derive_seed(seed, "init"));
  for (Parameter &p : store.all()) {
    const bool is_bias = p.name.size() > 2 && p.name.compare(p.name.size() - 2, 2, ".b") == 0;
    if (is_bias) {
      p.value.fill(0.0);
    } else {
      init_glorot_uniform(p.value, rng);
    }
  }
  return store;
}

Var QNetwork::q_values(Tape &t, ParameterStore &store, const GraphBatch &batch, const EncodedBatch &enc,
                       std::span<const Query> queries) const {
  std::vector<int> graph_rows, rc_rows, action_rows;
  Segments rc_segs;
  const auto stop_row = static_cast<int>(batch.num_nodes);
  for (const Query &q : queries) {
    if (q.graph >= batch.num_graphs) {
      throw Error(ErrorCode::kInvalidNodeId, "query graph " + std::to_string(q.graph) + " not in batch");
    }
    const auto base = static_cast<int>(batch.node_offset[q.graph]);
    const auto n = static_cast<int>(batch.graph_nodes.length(q.graph));
    graph_rows.push_back(static_cast<int>(q.graph));
    for (int i : *q.selected) {
      if (i < 0 || i >= n) throw Error(ErrorCode::kInvalidNodeId, "selected node " + std::to_string(i));
      rc_rows.push_back(base + i);
    }
    rc_segs.push(q.selected->size());
    if (q.action.is_stop()) {
      action_rows.push_back(stop_row);
    } else {
      if (q.action.node < 0 || q.action.node >= n) {
        throw Error(ErrorCode::kInvalidNodeId, "action node " + std::to_string(q.action.node));
      }
      action_rows.push_back(base + q.action.node);
    }
  }
  const Var h_g = gather_rows(enc.graph, graph_rows);
  const Var h_rc = segment_mean(gather_rows(enc.nodes, rc_rows), rc_segs);
  const Var h_a = gather_rows(concat({enc.nodes, t.param(store, h_stop_)}, 0), action_rows);
  Var z = q_[0](t, store, concat({h_g, h_rc, h_a}, 1));
  z = q_[1](t, store, elu(z));
  return q_[2](t, store, elu(z));
}

namespace {

Matrix rows_of(const Matrix &m, std::size_t begin, std::size_t count) {
  Matrix out(count, m.cols());
  std::copy(m.data() + begin * m.cols(), m.data() + (begin + count) * m.cols(), out.data());
  return out;
}

inline double elu1(double v) { return v > 0.0 ? v : std::expm1(v); }

}  // namespace

GraphQ::GraphQ(const QNetwork &net, const ParameterStore &store, const PreparedGraph &graph) {
  if (graph.num_nodes() == 0) throw Error(ErrorCode::kEmptyGraph, "cannot score a graph without atoms");
  // A values-only tape never writes gradients back into the store.
  auto &mutable_store = const_cast<ParameterStore &>(store);
  Tape t(false);
  const PreparedGraph *one[] = {&graph};
  const GraphBatch batch = GraphBatch::build(one);
  const EncodedBatch enc = net.encoder().forward(t, mutable_store, batch);
  node_embs_ = enc.nodes.value();
  graph_emb_ = enc.graph.value();

  const std::size_t d = node_embs_.cols();
  const Matrix &w0 = store[net.q_layer(0).weight()].value;
  const Matrix &b0 = store[net.q_layer(0).bias()].value;
  kernels::matmul(graph_emb_, rows_of(w0, 0, d), graph_term_);
  for (std::size_t c = 0; c < d; ++c) graph_term_[c] += b0[c];
  rc_weight_ = rows_of(w0, d, d);
  const Matrix wa = rows_of(w0, 2 * d, d);
  kernels::matmul(node_embs_, wa, node_term_);
  kernels::matmul(store[net.h_stop()].value, wa, stop_term_);
  w1_ = store[net.q_layer(1).weight()].value;
  b1_ = store[net.q_layer(1).bias()].value;
  w2_ = store[net.q_layer(2).weight()].value;
  b2_ = store[net.q_layer(2).bias()].value;
}

void GraphQ::q_values(const mol::NodeSet &selected, std::span<const Action> actions,
                      std::vector<double> &out) const {
  out.clear();
  if (actions.empty()) return;
  const std::size_t d = node_embs_.cols();
  Matrix rc_term;
  kernels::matmul(subgraph_embedding(node_embs_, selected), rc_weight_, rc_term);
  Matrix z1(actions.size(), d);
  for (std::size_t r = 0; r < actions.size(); ++r) {
    const Action a = actions[r];
    const double *act;
    if (a.is_stop()) {
      act = stop_term_.data();
    } else {
      if (a.node < 0 || static_cast<std::size_t>(a.node) >= num_nodes()) {
        throw Error(ErrorCode::kInvalidNodeId, "action node " + std::to_string(a.node));
      }
      act = node_term_.data() + static_cast<std::size_t>(a.node) * d;
    }
    for (std::size_t c = 0; c < d; ++c) z1(r, c) = elu1(graph_term_[c] + rc_term[c] + act[c]);
  }
  Matrix z2;
  kernels::matmul(z1, w1_, z2);
  for (std::size_t r = 0; r < actions.size(); ++r) {
    double q = b2_[0];
    for (std::size_t c = 0; c < d; ++c) q += elu1(z2(r, c) + b1_[c]) * w2_[c];
    out.push_back(q);
  }
}

double GraphQ::q_value(const mol::NodeSet &selected, Action action) const {
  std::vector<double> out;
  const Action one[] = {action};
  q_values(selected, one, out);
  return out.front();
}

}  // namespace rcs::model
