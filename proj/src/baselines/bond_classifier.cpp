#include "rcsearch/baselines/bond_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <string>

#include "rcsearch/error.hpp"
#include "rcsearch/random.hpp"

namespace rcs::baselines {

using namespace tensor;

void BondClassifierConfig::validate() const {
  encoder.validate();
  if (count_classes < 1) throw Error(ErrorCode::kInvalidConfig, "count_classes must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidConfig, "bond classifier batch_size must be >= 1");
  adam.validate();
}

std::vector<int> label_bonds(const mol::MolGraph &g, const mol::NodeSet &rc) {
  std::vector<int> out;
  for (int b = 0; b < g.num_bonds(); ++b) {
    const mol::Bond &bond = g.bond(b);
    if (std::binary_search(rc.begin(), rc.end(), bond.a) && std::binary_search(rc.begin(), rc.end(), bond.b)) {
      out.push_back(b);
    }
  }
  return out;
}

namespace {

double safe_log(double p) { return std::log(std::clamp(p, 1e-300, 1.0)); }

}  // namespace

std::vector<BondSet> kbest_bond_sets(const BondScores &scores, std::size_t k) {
  const std::size_t m = scores.bond_prob.size();
  if (k == 0 || m == 0) return {};
  // Rank bonds by log-odds; a size-n subset's score is the shared base plus
  // the log-odds of its members.
  std::vector<double> odds(m);
  double base = 0.0;
  for (std::size_t b = 0; b < m; ++b) {
    const double p = scores.bond_prob[b];
    base += safe_log(1.0 - p);
    odds[b] = safe_log(p) - safe_log(1.0 - p);
  }
  std::vector<int> rank(m);
  for (std::size_t i = 0; i < m; ++i) rank[i] = static_cast<int>(i);
  std::stable_sort(rank.begin(), rank.end(), [&](int a, int b) { return odds[static_cast<std::size_t>(a)] > odds[static_cast<std::size_t>(b)]; });

  struct Entry {
    double score;
    std::vector<int> pos;  // ascending positions into `rank`
    bool operator<(const Entry &o) const { return score != o.score ? score < o.score : pos > o.pos; }
  };
  auto score_of = [&](const std::vector<int> &pos) {
    double s = base + safe_log(scores.count_prob[pos.size() - 1]);
    for (int p : pos) s += odds[static_cast<std::size_t>(rank[static_cast<std::size_t>(p)])];
    return s;
  };
  std::priority_queue<Entry> heap;
  std::set<std::vector<int>> seen;
  const std::size_t max_n = std::min(m, scores.count_prob.size());
  for (std::size_t n = 1; n <= max_n; ++n) {
    std::vector<int> pos(n);
    for (std::size_t i = 0; i < n; ++i) pos[i] = static_cast<int>(i);
    seen.insert(pos);
    heap.push({score_of(pos), std::move(pos)});
  }
  std::vector<BondSet> out;
  while (!heap.empty() && out.size() < k) {
    Entry top = heap.top();
    heap.pop();
    BondSet set;
    for (int p : top.pos) set.bonds.push_back(rank[static_cast<std::size_t>(p)]);
    std::sort(set.bonds.begin(), set.bonds.end());
    set.log_prob = top.score;
    out.push_back(std::move(set));
    // Successors: shift one member to the next free position.
    for (std::size_t i = 0; i < top.pos.size(); ++i) {
      const int limit = i + 1 < top.pos.size() ? top.pos[i + 1] : static_cast<int>(m);
      if (top.pos[i] + 1 >= limit) continue;
      std::vector<int> next = top.pos;
      ++next[i];
      if (seen.insert(next).second) heap.push({score_of(next), std::move(next)});
    }
  }
  return out;
}

BondClassifier::BondClassifier(const BondClassifierConfig &config) : config_(config) {
  config.validate();
  encoder_ = model::Encoder(layout_, config.encoder);
  const auto d = static_cast<std::size_t>(config.encoder.dim);
  bond_head_ = model::Mlp2(layout_, "bond_head", 2 * d, d, 1);
  count_head_ = model::Mlp2(layout_, "count_head", d, d, static_cast<std::size_t>(config.count_classes));
}

ParameterStore BondClassifier::create_parameters(std::uint64_t seed) const {
  ParameterStore store = layout_;
  Rng rng(derive_seed(seed, "bond-classifier-init"));
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

BondClassifier::Logits BondClassifier::forward(Tape &t, ParameterStore &store, const model::GraphBatch &batch) const {
  const model::EncodedBatch enc = encoder_.forward(t, store, batch);
  // Both directed edges of every bond, in batch bond order.
  std::vector<int> fwd(batch.num_bonds, -1), bwd(batch.num_bonds, -1), u(batch.num_bonds), v(batch.num_bonds);
  for (std::size_t e = 0; e < batch.edge_input_row.size(); ++e) {
    const auto row = static_cast<std::size_t>(batch.edge_input_row[e]);
    if (row >= batch.num_bonds) continue;
    if (fwd[row] < 0) {
      fwd[row] = static_cast<int>(e);
      u[row] = batch.src[e];
      v[row] = batch.dst[e];
    } else {
      bwd[row] = static_cast<int>(e);
    }
  }
  Logits out;
  out.counts = count_head_(t, store, enc.graph);
  if (batch.num_bonds == 0) return out;
  const Var edge = add(gather_rows(enc.edges, fwd), gather_rows(enc.edges, bwd));
  const Var ends = add(gather_rows(enc.nodes, u), gather_rows(enc.nodes, v));
  out.bonds = bond_head_(t, store, concat({edge, ends}, 1));
  return out;
}

BondScores BondClassifier::score(const ParameterStore &store, const mol::MolGraph &g) const {
  if (g.empty()) throw Error(ErrorCode::kEmptyGraph, "bond classifier needs a non-empty graph");
  const model::PreparedGraph prep = model::prepare_graph(g, config_.encoder.self_loops);
  const model::PreparedGraph *ptr = &prep;
  const model::GraphBatch batch = model::GraphBatch::build({&ptr, 1});
  Tape t(false);
  const Logits l = forward(t, const_cast<ParameterStore &>(store), batch);
  BondScores s;
  if (l.bonds.valid()) {
    for (double x : l.bonds.value().storage()) s.bond_prob.push_back(1.0 / (1.0 + std::exp(-x)));
  }
  const Matrix &c = l.counts.value();
  double mx = -INFINITY;
  for (std::size_t j = 0; j < c.cols(); ++j) mx = std::max(mx, c(0, j));
  double sum = 0.0;
  for (std::size_t j = 0; j < c.cols(); ++j) {
    s.count_prob.push_back(std::exp(c(0, j) - mx));
    sum += s.count_prob.back();
  }
  for (double &p : s.count_prob) p /= sum;
  return s;
}

std::vector<search::ScoredSet> BondClassifier::predict(const ParameterStore &store, const mol::MolGraph &g,
                                                       std::size_t k) const {
  const BondScores s = score(store, g);
  std::vector<search::ScoredSet> out;
  // Different bond subsets can span the same atoms; draw a few extra.
  const std::vector<BondSet> sets = kbest_bond_sets(s, 4 * k + 8);
  for (const BondSet &bs : sets) {
    std::vector<int> nodes;
    for (int b : bs.bonds) {
      nodes.push_back(g.bond(b).a);
      nodes.push_back(g.bond(b).b);
    }
    search::ScoredSet cand{mol::make_node_set(std::move(nodes)), std::exp(bs.log_prob)};
    const bool dup = std::any_of(out.begin(), out.end(), [&](const auto &o) { return o.nodes == cand.nodes; });
    if (!dup) out.push_back(std::move(cand));
    if (out.size() == k) break;
  }
  return out;
}

BondTrainResult train_bond_classifier(const BondClassifier &model, ParameterStore &store,
                                      std::span<const mol::Sample> train, std::uint64_t seed) {
  const BondClassifierConfig &cfg = model.config();
  BondTrainResult result;
  std::vector<std::size_t> usable;
  std::vector<std::vector<int>> bonds(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const mol::Sample &s = train[i];
    const bool valid = std::all_of(s.rc.begin(), s.rc.end(), [&](int v) { return s.product.valid_node(v); });
    if (valid) bonds[i] = label_bonds(s.product, s.rc);
    if (bonds[i].empty()) {
      ++result.excluded;
    } else {
      usable.push_back(i);
    }
  }
  if (usable.empty()) throw Error(ErrorCode::kEmptyTrainSet, "no training label contains a bond");

  std::vector<model::PreparedGraph> prepared(train.size());
  for (std::size_t i : usable) prepared[i] = model::prepare_graph(train[i].product, cfg.encoder.self_loops);

  Rng rng(derive_seed(seed, "bond-classifier-train"));
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = usable;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    double total = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const model::PreparedGraph *> graphs;
      std::vector<double> targets;
      std::vector<int> counts;
      for (std::size_t j = start; j < end; ++j) {
        const std::size_t i = order[j];
        graphs.push_back(&prepared[i]);
        const std::size_t before = targets.size();
        targets.resize(before + static_cast<std::size_t>(train[i].product.num_bonds()), 0.0);
        for (int b : bonds[i]) targets[before + static_cast<std::size_t>(b)] = 1.0;
        counts.push_back(std::min(static_cast<int>(bonds[i].size()), cfg.count_classes) - 1);
      }
      const model::GraphBatch batch = model::GraphBatch::build(graphs);
      Tape t;
      const BondClassifier::Logits l = model.forward(t, store, batch);
      const std::size_t rows = targets.size();
      const Var loss = add(bce_with_logits(l.bonds, t.constant(Matrix(rows, 1, std::move(targets)))),
                           softmax_cross_entropy(l.counts, counts));
      total += loss.value()[0];
      ++steps;
      t.backward(loss);
      adam_step(store, cfg.adam);
    }
    result.epoch_loss.push_back(total / static_cast<double>(steps));
  }
  return result;
}

}  // namespace rcs::baselines
