#include "rcsearch/search/search.hpp"

#include <algorithm>
#include <map>

#include "rcsearch/env/env.hpp"
#include "rcsearch/error.hpp"

namespace rcs::search {

using env::Action;

bool ranks_before(const ScoredSet &a, const ScoredSet &b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
  return a.nodes < b.nodes;
}

namespace {

struct Candidate {
  mol::NodeSet nodes;
  double score;
  bool stop;
};

mol::NodeSet with_node(const mol::NodeSet &s, int v) {
  mol::NodeSet out;
  out.reserve(s.size() + 1);
  const auto pos = std::upper_bound(s.begin(), s.end(), v);
  out.insert(out.end(), s.begin(), pos);
  out.push_back(v);
  out.insert(out.end(), pos, s.end());
  return out;
}

void complete(std::map<mol::NodeSet, double> &pool, const mol::NodeSet &nodes, double score) {
  const auto [it, inserted] = pool.emplace(nodes, score);
  if (!inserted) it->second = std::max(it->second, score);
}

}  // namespace

std::vector<ScoredSet> beam_search(const model::GraphQ &q, const mol::MolGraph &g, const BeamOptions &options) {
  if (g.empty()) throw Error(ErrorCode::kEmptyGraph, "beam search on a graph without atoms");
  if (options.beam == 0) throw Error(ErrorCode::kInvalidConfig, "beam size must be >= 1");
  const std::size_t k = options.beam;
  const auto cap = static_cast<std::size_t>(g.num_atoms());

  std::vector<BeamHypothesis> alive = {BeamHypothesis{}};
  std::map<mol::NodeSet, double> completed;
  std::vector<double> scores;
  std::vector<std::size_t> order;
  while (!alive.empty()) {
    std::vector<Candidate> pool;
    for (const BeamHypothesis &h : alive) {
      const std::vector<Action> actions = env::legal_actions(g, h.nodes, options.one_hop);
      q.q_values(h.nodes, actions, scores);
      order.resize(actions.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
      for (std::size_t r = 0; r < std::min(k, order.size()); ++r) {
        const Action a = actions[order[r]];
        if (a.is_stop()) {
          pool.push_back({h.nodes, scores[order[r]], true});
        } else {
          pool.push_back({with_node(h.nodes, a.node), scores[order[r]], false});
        }
      }
    }
    // The same node set reached along different paths is one state.
    std::vector<Candidate> unique;
    std::map<std::pair<mol::NodeSet, bool>, std::size_t> seen;
    for (Candidate &c : pool) {
      const auto [it, inserted] = seen.emplace(std::make_pair(c.nodes, c.stop), unique.size());
      if (inserted) {
        unique.push_back(std::move(c));
      } else if (c.score > unique[it->second].score) {
        unique[it->second].score = c.score;
      }
    }
    std::stable_sort(unique.begin(), unique.end(),
                     [](const Candidate &a, const Candidate &b) { return a.score > b.score; });
    if (unique.size() > k) unique.resize(k);

    std::vector<BeamHypothesis> next;
    for (Candidate &c : unique) {
      if (c.stop) {
        complete(completed, c.nodes, c.score);
      } else if (c.nodes.size() >= cap) {
        // Step cap: the episode ends here and is ranked like a STOP.
        complete(completed, c.nodes, q.q_value(c.nodes, Action::stop()));
      } else {
        const int step = static_cast<int>(c.nodes.size());
        next.push_back(BeamHypothesis{std::move(c.nodes), c.score, false, step});
      }
    }
    alive = std::move(next);
  }

  std::vector<ScoredSet> out;
  out.reserve(completed.size());
  for (auto &[nodes, score] : completed) out.push_back({nodes, score});
  std::sort(out.begin(), out.end(), ranks_before);
  if (out.size() > k) out.resize(k);
  return out;
}

ScoredSet greedy_rollout(const model::GraphQ &q, const mol::MolGraph &g, bool one_hop) {
  if (g.empty()) throw Error(ErrorCode::kEmptyGraph, "rollout on a graph without atoms");
  mol::NodeSet s;
  std::vector<double> scores;
  for (;;) {
    const std::vector<Action> actions = env::legal_actions(g, s, one_hop);
    q.q_values(s, actions, scores);
    const auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    if (actions[best].is_stop()) return {s, scores[best]};
    s = with_node(s, actions[best].node);
    if (s.size() >= static_cast<std::size_t>(g.num_atoms())) return {s, q.q_value(s, Action::stop())};
  }
}

namespace {

// Each connected set is produced once, from its minimum node `root`: a node
// joins the extension set only through its first discovery.
class SubsetEnumerator {
 public:
  SubsetEnumerator(const mol::MolGraph &g, std::size_t max_size, std::size_t bound)
      : g_(g), max_size_(max_size), bound_(bound), marks_(static_cast<std::size_t>(g.num_atoms()), 0) {}

  std::vector<mol::NodeSet> run() {
    for (int v = 0; v < g_.num_atoms(); ++v) {
      root_ = v;
      current_ = {v};
      ++marks_[static_cast<std::size_t>(v)];
      std::vector<int> ext;
      for (const mol::Neighbor &nb : g_.neighbors(v)) {
        if (nb.node > v) {
          ext.push_back(nb.node);
          ++marks_[static_cast<std::size_t>(nb.node)];
        }
      }
      extend(ext);
      for (int u : ext) --marks_[static_cast<std::size_t>(u)];
      --marks_[static_cast<std::size_t>(v)];
    }
    std::sort(out_.begin(), out_.end(), [](const mol::NodeSet &a, const mol::NodeSet &b) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return std::move(out_);
  }

 private:
  void extend(std::vector<int> ext) {
    emit();
    if (current_.size() >= max_size_) return;
    while (!ext.empty()) {
      const int w = ext.back();
      ext.pop_back();
      // Exclusive neighbours of w: not yet selected or discovered.
      std::vector<int> added;
      for (const mol::Neighbor &nb : g_.neighbors(w)) {
        if (nb.node > root_ && marks_[static_cast<std::size_t>(nb.node)] == 0) {
          added.push_back(nb.node);
          ++marks_[static_cast<std::size_t>(nb.node)];
        }
      }
      current_.push_back(w);
      std::vector<int> next = ext;
      next.insert(next.end(), added.begin(), added.end());
      extend(std::move(next));
      current_.pop_back();
      for (int u : added) --marks_[static_cast<std::size_t>(u)];
    }
  }

  void emit() {
    if (out_.size() >= bound_) {
      throw Error(ErrorCode::kSizeExplosion, "more than " + std::to_string(bound_) + " connected subsets");
    }
    out_.push_back(mol::make_node_set(current_));
  }

  const mol::MolGraph &g_;
  std::size_t max_size_;
  std::size_t bound_;
  std::vector<int> marks_;
  std::vector<int> current_;
  int root_ = 0;
  std::vector<mol::NodeSet> out_;
};

}  // namespace

std::vector<mol::NodeSet> enumerate_connected_subsets(const mol::MolGraph &g, std::size_t max_size,
                                                      std::size_t bound) {
  if (max_size < 1) throw Error(ErrorCode::kInvalidConfig, "max_size must be >= 1");
  return SubsetEnumerator(g, max_size, bound).run();
}

std::vector<ScoredSet> exhaustive_topk(const model::GraphQ &q, const mol::MolGraph &g, std::size_t k,
                                       std::size_t max_size, std::size_t bound) {
  std::vector<ScoredSet> all;
  for (mol::NodeSet &s : enumerate_connected_subsets(g, max_size, bound)) {
    const double score = q.q_value(s, Action::stop());
    all.push_back({std::move(s), score});
  }
  std::sort(all.begin(), all.end(), ranks_before);
  if (all.size() > k) all.resize(k);
  return all;
}

}  // namespace rcs::search
