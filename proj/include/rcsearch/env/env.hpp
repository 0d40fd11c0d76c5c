#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rcsearch/env/action.hpp"
#include "rcsearch/mol/graph.hpp"
#include "rcsearch/random.hpp"

namespace rcs::env {

struct State {
  const mol::MolGraph *graph = nullptr;
  mol::NodeSet selected;
  int step = 0;
};

// Throws Error(kEmptyGraph).
State initial_state(const mol::MolGraph &g);

// t = 0: every node, no STOP. Later: the one-hop frontier (or, with
// one_hop = false, every unselected node) followed by STOP.
std::vector<Action> legal_actions(const mol::MolGraph &g, const mol::NodeSet &selected, bool one_hop = true);
std::vector<Action> legal_actions(const State &s, bool one_hop = true);
bool is_legal(const State &s, Action a, bool one_hop = true);

struct StepResult {
  State next;
  double reward = 0.0;
  bool terminal = false;
};

struct Transition {
  std::size_t graph = 0;  // index into the owning dataset
  mol::NodeSet selected;
  int step = 0;
  Action action;
  double reward = 0.0;
  mol::NodeSet next_selected;
  int next_step = 0;
  bool terminal = false;
  // next_selected holds a node outside the label, so no continuation can
  // succeed and the return is exactly `reward`.
  bool dead_end = false;
};

class Environment {
 public:
  Environment(const mol::MolGraph &g, mol::NodeSet label, bool one_hop = true);

  const mol::MolGraph &graph() const { return *graph_; }
  const mol::NodeSet &label() const { return label_; }
  bool one_hop() const { return one_hop_; }
  // Episodes are forced to end after |V_p| selections.
  int step_cap() const { return graph_->num_atoms(); }

  State reset() const { return initial_state(*graph_); }
  // Throws Error(kIllegalAction).
  StepResult step(const State &s, Action a) const;

 private:
  const mol::MolGraph *graph_;
  mol::NodeSet label_;
  bool one_hop_;
};

// A random connected expansion of `label` followed by STOP (omitted when the
// label is the whole graph, where the step cap ends the episode). Throws
// Error(kUnreachableTarget) for a disconnected label and
// Error(kEmptySelection) for an empty one.
std::vector<std::pair<State, Action>> ground_truth_trajectory(const mol::MolGraph &g, const mol::NodeSet &label,
                                                              Rng &rng);

}  // namespace rcs::env
