#include <algorithm>
#include <set>

#include "doctest.h"
#include "rcsearch/env/env.hpp"
#include "rcsearch/error.hpp"
#include "rcsearch/mol/smiles.hpp"

using namespace rcs;
using namespace rcs::env;

namespace {

mol::MolGraph path(int n) {
  std::vector<mol::Bond> bonds;
  for (int i = 0; i + 1 < n; ++i) bonds.push_back({i, i + 1});
  return mol::MolGraph(std::vector<mol::Atom>(static_cast<std::size_t>(n)), bonds);
}

}  // namespace

TEST_CASE("env: initial state and legal actions") {
  const mol::MolGraph g = mol::parse_smiles("CCO");
  const State s0 = initial_state(g);
  CHECK(s0.selected.empty());
  CHECK(s0.step == 0);
  CHECK(legal_actions(s0) == std::vector<Action>{Action::select(0), Action::select(1), Action::select(2)});
  CHECK(legal_actions(g, {1}) == std::vector<Action>{Action::select(0), Action::select(2), Action::stop()});
  CHECK(legal_actions(g, {0, 1, 2}) == std::vector<Action>{Action::stop()});
  CHECK(legal_actions(g, {0}, false) == std::vector<Action>{Action::select(1), Action::select(2), Action::stop()});
  CHECK_NOTHROW(initial_state(mol::parse_smiles("C")));
  CHECK_THROWS_AS(initial_state(mol::MolGraph()), Error);
}

TEST_CASE("env: step and rewards") {
  const mol::MolGraph g = mol::parse_smiles("CCO");
  const Environment env(g, {1});
  auto r1 = env.step(env.reset(), Action::select(1));
  CHECK_FALSE(r1.terminal);
  CHECK(r1.reward == 0.0);
  auto r2 = env.step(r1.next, Action::stop());
  CHECK(r2.terminal);
  CHECK(r2.reward == 1.0);

  auto m = env.step(env.step(env.reset(), Action::select(0)).next, Action::stop());
  CHECK(m.reward == 0.0);

  const State at0 = env.step(env.reset(), Action::select(0)).next;
  try {
    env.step(at0, Action::select(2));
    FAIL("no throw");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kIllegalAction);
  }
  CHECK_THROWS_AS(env.step(env.reset(), Action::stop()), Error);
  CHECK_THROWS_AS(env.step(at0, Action::select(0)), Error);

  // Selecting every atom hits the cap and ends the episode.
  const Environment whole(g, {0, 1, 2});
  State s = whole.reset();
  StepResult r;
  for (int i : {0, 1, 2}) {
    r = whole.step(s, Action::select(i));
    s = r.next;
  }
  CHECK(r.terminal);
  CHECK(r.reward == 1.0);
}

TEST_CASE("env: ground-truth trajectories") {
  const mol::MolGraph g = mol::parse_smiles("CCO");
  Rng rng(1);
  const auto t1 = ground_truth_trajectory(g, {1}, rng);
  REQUIRE(t1.size() == 2);
  CHECK(t1[0].first.selected.empty());
  CHECK(t1[0].second == Action::select(1));
  CHECK(t1[1].first.selected == mol::NodeSet{1});
  CHECK(t1[1].second == Action::stop());

  try {
    ground_truth_trajectory(path(4), {0, 3}, rng);
    FAIL("no throw");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kUnreachableTarget);
  }

  std::set<int> firsts;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng a(seed), b(seed);
    const auto x = ground_truth_trajectory(g, {0, 1}, a);
    const auto y = ground_truth_trajectory(g, {0, 1}, b);
    REQUIRE(x.size() == 3);
    CHECK(x[0].second == y[0].second);
    firsts.insert(x[0].second.node);
  }
  CHECK(firsts == std::set<int>{0, 1});

  const mol::MolGraph ring = mol::parse_smiles("c1ccccc1CCN");
  const Environment env(ring, {4, 5, 6, 7});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng r(seed);
    const auto traj = ground_truth_trajectory(ring, env.label(), r);
    State s = env.reset();
    StepResult last;
    for (const auto &[state, action] : traj) {
      CHECK(state.selected == s.selected);
      last = env.step(s, action);
      s = last.next;
    }
    CHECK(last.terminal);
    CHECK(last.reward == 1.0);
  }
}
