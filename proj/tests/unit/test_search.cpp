#include <algorithm>

#include "doctest.h"
#include "rcsearch/error.hpp"
#include "rcsearch/mol/smiles.hpp"
#include "rcsearch/search/search.hpp"

using namespace rcs;
using namespace rcs::search;

namespace {

mol::MolGraph from_edges(int n, std::vector<std::pair<int, int>> edges) {
  std::vector<mol::Bond> bonds;
  for (auto [a, b] : edges) bonds.push_back({a, b});
  return mol::MolGraph(std::vector<mol::Atom>(static_cast<std::size_t>(n)), bonds);
}

mol::MolGraph random_graph(Rng &rng, int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.emplace_back(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i))), i);
  for (int e = 0; e < n / 2; ++e) {
    const int a = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    const int b = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    if (a == b) continue;
    const auto key = std::minmax(a, b);
    if (std::find(edges.begin(), edges.end(), std::pair<int, int>(key.first, key.second)) == edges.end() &&
        std::find(edges.begin(), edges.end(), std::pair<int, int>(key.second, key.first)) == edges.end()) {
      edges.emplace_back(key.first, key.second);
    }
  }
  return from_edges(n, edges);
}

// All connected subsets by scanning every bitmask.
std::vector<mol::NodeSet> brute_subsets(const mol::MolGraph &g, std::size_t max_size) {
  std::vector<mol::NodeSet> out;
  const int n = g.num_atoms();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    mol::NodeSet s;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) s.push_back(i);
    if (s.size() <= max_size && mol::is_connected_subset(g, s)) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.size() != b.size() ? a.size() < b.size() : a < b; });
  return out;
}

}  // namespace

TEST_CASE("enumerate: hand counts") {
  CHECK(enumerate_connected_subsets(from_edges(3, {{0, 1}, {1, 2}}), 3).size() == 6);
  CHECK(enumerate_connected_subsets(from_edges(3, {{0, 1}, {1, 2}, {0, 2}}), 3).size() == 7);
  CHECK(enumerate_connected_subsets(from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}), 2).size() == 9);
  CHECK_THROWS_AS(enumerate_connected_subsets(from_edges(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}), 6, 10), Error);
}

TEST_CASE("enumerate: matches bitmask brute force") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(10));
    const mol::MolGraph g = random_graph(rng, n);
    const std::size_t m = 1 + rng.uniform_index(static_cast<std::uint64_t>(n));
    CHECK(enumerate_connected_subsets(g, m) == brute_subsets(g, m));
  }
}

TEST_CASE("beam: k=1 is greedy, saturating beam equals the oracle") {
  const model::QNetwork net(model::EncoderConfig{2, 2, 8, true});
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(8));
    const mol::MolGraph g = random_graph(rng, n);
    const auto store = net.create_parameters(static_cast<std::uint64_t>(trial));
    const model::PreparedGraph p = model::prepare_graph(g, true);
    const model::GraphQ q(net, store, p);

    const auto greedy = greedy_rollout(q, g);
    const auto b1 = beam_search(q, g, {1, true});
    REQUIRE(b1.size() == 1);
    CHECK(b1[0] == greedy);

    const std::size_t count = enumerate_connected_subsets(g, static_cast<std::size_t>(n)).size();
    const auto beam = beam_search(q, g, {count, true});
    const auto oracle = exhaustive_topk(q, g, count, static_cast<std::size_t>(n));
    CHECK(beam == oracle);

    const auto b3 = beam_search(q, g, {3, true});
    for (std::size_t i = 1; i < b3.size(); ++i) CHECK(b3[i - 1].score >= b3[i].score);
    for (const auto &s : b3) CHECK(mol::is_connected_subset(g, s.nodes));
  }
  CHECK_THROWS_AS(beam_search(model::GraphQ(net, net.create_parameters(0), model::prepare_graph(mol::parse_smiles("C"), true)),
                              mol::MolGraph(), {1, true}),
                  Error);
}
