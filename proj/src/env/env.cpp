#include "rcsearch/env/env.hpp"

#include <algorithm>

#include "rcsearch/error.hpp"

namespace rcs::env {

State initial_state(const mol::MolGraph &g) {
  if (g.empty()) throw Error(ErrorCode::kEmptyGraph, "product graph has no atoms");
  return State{&g, {}, 0};
}

std::vector<Action> legal_actions(const mol::MolGraph &g, const mol::NodeSet &selected, bool one_hop) {
  std::vector<Action> out;
  if (selected.empty()) {
    out.reserve(static_cast<std::size_t>(g.num_atoms()));
    for (int i = 0; i < g.num_atoms(); ++i) out.push_back(Action::select(i));
    return out;
  }
  if (one_hop) {
    for (int i : mol::one_hop_frontier(g, selected)) out.push_back(Action::select(i));
  } else {
    for (int i = 0; i < g.num_atoms(); ++i) {
      if (!std::binary_search(selected.begin(), selected.end(), i)) out.push_back(Action::select(i));
    }
  }
  out.push_back(Action::stop());
  return out;
}

std::vector<Action> legal_actions(const State &s, bool one_hop) { return legal_actions(*s.graph, s.selected, one_hop); }

bool is_legal(const State &s, Action a, bool one_hop) {
  if (a.is_stop()) return !s.selected.empty();
  const mol::MolGraph &g = *s.graph;
  if (!g.valid_node(a.node)) return false;
  if (std::binary_search(s.selected.begin(), s.selected.end(), a.node)) return false;
  if (s.selected.empty() || !one_hop) return true;
  for (const mol::Neighbor &nb : g.neighbors(a.node)) {
    if (std::binary_search(s.selected.begin(), s.selected.end(), nb.node)) return true;
  }
  return false;
}

Environment::Environment(const mol::MolGraph &g, mol::NodeSet label, bool one_hop)
    : graph_(&g), label_(mol::make_node_set(std::move(label))), one_hop_(one_hop) {
  if (g.empty()) throw Error(ErrorCode::kEmptyGraph, "product graph has no atoms");
  for (int i : label_) {
    if (!g.valid_node(i)) throw Error(ErrorCode::kInvalidNodeId, "label node " + std::to_string(i));
  }
}

StepResult Environment::step(const State &s, Action a) const {
  if (!is_legal(s, a, one_hop_)) {
    throw Error(ErrorCode::kIllegalAction, a.to_string() + " at step " + std::to_string(s.step));
  }
  StepResult r;
  r.next = s;
  if (a.is_stop()) {
    r.terminal = true;
  } else {
    r.next.selected.insert(std::upper_bound(r.next.selected.begin(), r.next.selected.end(), a.node), a.node);
    r.next.step = s.step + 1;
    r.terminal = r.next.step >= step_cap();
  }
  if (r.terminal) r.reward = r.next.selected == label_ ? 1.0 : 0.0;
  return r;
}

std::vector<std::pair<State, Action>> ground_truth_trajectory(const mol::MolGraph &g, const mol::NodeSet &label,
                                                              Rng &rng) {
  if (label.empty()) throw Error(ErrorCode::kEmptySelection, "empty reaction-center label");
  if (!mol::is_connected_subset(g, label)) {
    throw Error(ErrorCode::kUnreachableTarget, "label spans " + std::to_string(mol::connected_component_count(g, label)) +
                                                   " branches; one-hop expansion cannot reach it");
  }
  std::vector<std::pair<State, Action>> out;
  State s = initial_state(g);
  int next = label[rng.uniform_index(label.size())];
  for (;;) {
    out.emplace_back(s, Action::select(next));
    s.selected.insert(std::upper_bound(s.selected.begin(), s.selected.end(), next), next);
    ++s.step;
    if (s.selected.size() == label.size()) break;
    std::vector<int> options;
    for (int v : mol::one_hop_frontier(g, s.selected)) {
      if (std::binary_search(label.begin(), label.end(), v)) options.push_back(v);
    }
    next = options[rng.uniform_index(options.size())];
  }
  // A label covering the whole graph ends at the step cap without STOP.
  if (static_cast<int>(label.size()) < g.num_atoms()) out.emplace_back(s, Action::stop());
  return out;
}

}  // namespace rcs::env
