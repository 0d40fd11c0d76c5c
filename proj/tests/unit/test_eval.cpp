#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "rcsearch/env/env.hpp"
#include "rcsearch/error.hpp"
#include "rcsearch/eval/data.hpp"
#include "rcsearch/eval/metrics.hpp"
#include "rcsearch/mol/smiles.hpp"

using namespace rcs;
using namespace rcs::eval;

namespace {

mol::MolGraph labelled(std::vector<int> z, std::vector<std::tuple<int, int, mol::BondOrder>> edges) {
  std::vector<mol::Atom> atoms;
  for (int e : z) {
    mol::Atom a;
    a.z = e;
    atoms.push_back(a);
  }
  std::vector<mol::Bond> bonds;
  for (auto [a, b, o] : edges) bonds.push_back({a, b, o});
  return mol::MolGraph(std::move(atoms), std::move(bonds));
}

mol::NodeSet all_nodes(const mol::MolGraph &g) {
  mol::NodeSet s(static_cast<std::size_t>(g.num_atoms()));
  std::iota(s.begin(), s.end(), 0);
  return s;
}

// Lexicographically smallest (labels, adjacency) string over all
// permutations: exact isomorphism class.
std::vector<int> brute_canonical(const mol::MolGraph &g) {
  const int n = g.num_atoms();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best;
  do {
    std::vector<int> code;
    for (int i = 0; i < n; ++i) code.push_back(g.atom(perm[i]).z * 2 + g.atom(perm[i]).aromatic);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const auto b = g.bond_between(perm[i], perm[j]);
        code.push_back(b ? 1 + static_cast<int>(g.bond(*b).order) : 0);
      }
    }
    if (best.empty() || code < best) best = code;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

mol::Sample sample(std::string id, const std::string &smiles, mol::NodeSet rc) {
  return mol::Sample{std::move(id), smiles, mol::parse_smiles(smiles), std::move(rc)};
}

}  // namespace

TEST_CASE("topk: examples") {
  const std::vector<mol::NodeSet> preds = {{0, 1}, {2}, {1, 2}};
  CHECK(topk_exact_match(preds, {2}, 4) == std::vector<bool>{false, true, true, true});
  CHECK(topk_exact_match({}, {2}, 4) == std::vector<bool>(4, false));
  const std::vector<mol::NodeSet> dup = {{1}, {1}, {3}};
  CHECK(topk_exact_match(dup, {3}, 4) == std::vector<bool>{false, false, true, true});
}

TEST_CASE("topk: agrees with a naive oracle") {
  Rng rng(4);
  auto random_set = [&] {
    mol::NodeSet s;
    for (int i = 0; i < 5; ++i)
      if (rng.bernoulli(0.4)) s.push_back(i);
    return s;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<mol::NodeSet> preds(rng.uniform_index(6));
    for (auto &p : preds) p = random_set();
    const mol::NodeSet label = random_set();
    const auto hits = topk_exact_match(preds, label, 4);
    for (std::size_t k = 1; k <= 4; ++k) {
      bool naive = false;
      for (std::size_t i = 0; i < std::min(k, preds.size()); ++i) {
        std::vector<int> a = preds[i], b = label;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        naive = naive || a == b;
      }
      CHECK(hits[k - 1] == naive);
    }
  }
}

TEST_CASE("report: strata, monotonicity, JSON") {
  const std::vector<mol::Sample> data = {
      sample("a", "CCO", {2}),              // atom only
      sample("b", "CCO", {1, 2}),           // one edge
      sample("c", "CC(=O)Cl", {1, 2, 3}),   // two edges
      sample("d", "C1CC1C", {0, 1, 2}),     // three edges
      sample("e", "CCCCO", {0, 4}),         // two branches
      sample("f", "CCCCCCO", {0, 3, 6}),    // three branches
  };
  CHECK(edge_stratum(data[0].product, data[0].rc) == "atom_only");
  CHECK(edge_stratum(data[1].product, data[1].rc) == "1");
  CHECK(edge_stratum(data[2].product, data[2].rc) == "2");
  CHECK(edge_stratum(data[3].product, data[3].rc) == "3+");
  CHECK(rc_type_stratum(data[1].product, data[1].rc) == "single");
  CHECK(rc_type_stratum(data[2].product, data[2].rc) == "multiple");
  CHECK(branch_stratum(data[4].product, data[4].rc) == "2");
  CHECK(branch_stratum(data[5].product, data[5].rc) == "3+");

  std::vector<SamplePrediction> perfect;
  for (const auto &s : data) perfect.push_back({s.id, {s.rc}, {1.0}});
  const EvalReport all = stratified_report(perfect, data);
  CHECK(all.overall.count == data.size());
  for (std::size_t k = 1; k <= 4; ++k) CHECK(all.overall.accuracy(k) == 1.0);
  for (const auto *m : {&all.by_edges, &all.by_rc_type, &all.by_branches}) {
    std::size_t total = 0;
    for (const auto &[name, st] : *m) {
      total += st.count;
      if (st.count > 0) CHECK(st.accuracy(1) == 1.0);
    }
    CHECK(total == data.size());
  }

  std::vector<SamplePrediction> mixed = perfect;
  mixed[0].predictions = {{0}, {1}, {2}};
  mixed[1].predictions = {{0, 1}, {1, 2}};
  mixed[2].predictions = {};
  mixed[3].predictions = {{0}, {1}, {2}, {3}, {0, 1, 2}};
  const EvalReport r = stratified_report(mixed, data);
  CHECK(r.overall.accuracy(1) == doctest::Approx(2.0 / 6));
  CHECK(r.overall.accuracy(2) == doctest::Approx(3.0 / 6));
  CHECK(r.overall.accuracy(3) == doctest::Approx(4.0 / 6));
  CHECK(r.overall.accuracy(4) == doctest::Approx(4.0 / 6));
  for (std::size_t k = 1; k < 4; ++k) CHECK(r.overall.accuracy(k) <= r.overall.accuracy(k + 1));

  const auto j = r.to_json();
  for (const char *key : {"n", "top1", "top2", "top3", "top4", "strata", "extrapolation"}) CHECK(j.contains(key));
  CHECK(j["extrapolation"].is_null());
  const EvalReport back = EvalReport::from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.to_json().dump() == j.dump());

  std::vector<SamplePrediction> missing(perfect.begin(), perfect.end() - 1);
  CHECK_THROWS_AS(stratified_report(missing, data), Error);
}

TEST_CASE("pattern hash: exact on all unlabelled graphs with up to 5 nodes") {
  for (int n = 1; n <= 5; ++n) {
    std::vector<std::pair<int, int>> slots;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) slots.emplace_back(i, j);
    std::map<std::vector<int>, std::uint64_t> class_hash;
    std::map<std::uint64_t, std::vector<int>> hash_class;
    for (unsigned mask = 0; mask < (1u << slots.size()); ++mask) {
      std::vector<std::tuple<int, int, mol::BondOrder>> edges;
      for (std::size_t e = 0; e < slots.size(); ++e)
        if (mask & (1u << e)) edges.emplace_back(slots[e].first, slots[e].second, mol::BondOrder::kSingle);
      const auto g = labelled(std::vector<int>(static_cast<std::size_t>(n), 6), edges);
      const auto canon = brute_canonical(g);
      const auto h = pattern_hash(g, all_nodes(g));
      const auto [it, fresh] = class_hash.emplace(canon, h);
      CHECK(it->second == h);
      const auto [jt, fresh2] = hash_class.emplace(h, canon);
      CHECK(jt->second == canon);
    }
  }
}

TEST_CASE("pattern hash: labelled isomorphs and non-isomorphs") {
  Rng rng(12);
  const std::vector<int> alphabet = {6, 7, 8};
  const std::vector<mol::BondOrder> orders = {mol::BondOrder::kSingle, mol::BondOrder::kDouble};
  std::map<std::vector<int>, std::uint64_t> class_hash;
  std::map<std::uint64_t, std::vector<int>> hash_class;
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(4));
    std::vector<int> z;
    for (int i = 0; i < n; ++i) z.push_back(alphabet[rng.uniform_index(alphabet.size())]);
    std::vector<std::tuple<int, int, mol::BondOrder>> edges;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.bernoulli(0.5)) edges.emplace_back(i, j, orders[rng.uniform_index(2)]);
    const auto g = labelled(z, edges);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
    const auto h = pattern_hash(g, all_nodes(g));
    const auto moved = mol::relabel(g, perm);
    CHECK(pattern_hash(moved, all_nodes(moved)) == h);

    const auto canon = brute_canonical(g);
    CHECK(class_hash.emplace(canon, h).first->second == h);
    CHECK(hash_class.emplace(h, canon).first->second == canon);
  }
  // Node subsets of a larger graph hash as their induced subgraph.
  const auto big = mol::parse_smiles("CC(=O)OCCN");
  const auto small = mol::parse_smiles("OCC");
  CHECK(pattern_hash(big, {3, 4, 5}) == pattern_hash(small, all_nodes(small)));
  CHECK(pattern_hash(big, {1, 2}) != pattern_hash(big, {1, 3}));
}

TEST_CASE("extrapolation counting") {
  const std::vector<mol::Sample> train = {sample("t0", "CCO", {1, 2}), sample("t1", "CCN", {2})};
  const std::vector<mol::Sample> test = {
      sample("s0", "OCC", {0, 1}),       // same C-O pattern, different ids
      sample("s1", "CC(=O)Cl", {1, 2, 3}),  // novel, correct
      sample("s2", "CC(=O)Cl", {1, 2, 3}),  // novel, same pattern again
      sample("s3", "CC(F)F", {1, 2, 3}),    // novel but wrong
  };
  std::vector<SamplePrediction> preds;
  for (const auto &s : test) preds.push_back({s.id, {s.rc}, {0.0}});
  preds[3].predictions = {{0, 1}};
  const auto c = extrapolation_count(preds, test, train);
  CHECK(c.samples == 2);
  CHECK(c.patterns == 1);
  const EvalReport r = stratified_report(preds, test, train);
  REQUIRE(r.extrapolated_samples.has_value());
  CHECK(*r.extrapolated_samples == 2);
  CHECK(*r.extrapolated_patterns == 1);
}

TEST_CASE("split: sizes, determinism, exhaustive") {
  GeneratorConfig gc;
  gc.count = 1000;
  gc.seed = 3;
  const auto data = generate_synthetic_dataset(gc);
  const Split a = split_dataset(data, {0.8, 0.1, 0.1}, 42);
  CHECK(a.train.size() == 800);
  CHECK(a.val.size() == 100);
  CHECK(a.test.size() == 100);
  const Split b = split_dataset(data, {0.8, 0.1, 0.1}, 42);
  auto ids = [](const std::vector<mol::Sample> &v) {
    std::vector<std::string> out;
    for (const auto &s : v) out.push_back(s.id);
    return out;
  };
  CHECK(ids(a.train) == ids(b.train));
  CHECK(ids(a.val) == ids(b.val));
  CHECK(ids(a.test) == ids(b.test));
  CHECK(ids(split_dataset(data, {0.8, 0.1, 0.1}, 43).train) != ids(a.train));
  std::multiset<std::string> all;
  for (const auto *part : {&a.train, &a.val, &a.test})
    for (const auto &s : *part) all.insert(s.id);
  std::multiset<std::string> input;
  for (const auto &s : data) input.insert(s.id);
  CHECK(all == input);
  CHECK_THROWS_AS(split_dataset(std::span(data).first(9)), Error);
}

TEST_CASE("generator: deterministic, valid labels") {
  GeneratorConfig gc;
  gc.count = 300;
  gc.seed = 77;
  const auto a = generate_synthetic_dataset(gc);
  const auto b = generate_synthetic_dataset(gc);
  REQUIRE(a.size() == 300);
  std::map<std::size_t, int> sizes;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(mol::sample_to_json_line(a[i]) == mol::sample_to_json_line(b[i]));
    CHECK(mol::is_connected_subset(a[i].product, a[i].rc));
    CHECK(a[i].rc.size() >= 1);
    CHECK(a[i].rc.size() <= 3);
    ++sizes[a[i].rc.size()];
    const std::size_t motif_atoms = a[i].rc.size();
    CHECK(a[i].product.num_atoms() >= gc.min_atoms);
    CHECK(a[i].product.num_atoms() <= gc.max_atoms + static_cast<int>(motif_atoms));
  }
  CHECK(sizes.size() == 3);
  // Sample i depends only on (seed, i).
  CHECK(mol::sample_to_json_line(generate_synthetic_sample(gc, 123)) == mol::sample_to_json_line(a[123]));
  gc.count = 50;
  CHECK(mol::sample_to_json_line(generate_synthetic_dataset(gc)[17]) == mol::sample_to_json_line(a[17]));
  gc.seed = 78;
  CHECK(mol::sample_to_json_line(generate_synthetic_dataset(gc)[17]) != mol::sample_to_json_line(a[17]));
  CHECK(parse_motif(motif_name(Motif::kAcylChloride)) == Motif::kAcylChloride);
  CHECK_THROWS_AS(parse_motif("benzene"), Error);
}

TEST_CASE("random policy: exact probabilities") {
  const auto single = labelled({6}, {});
  CHECK(random_policy_success(single, {0}) == doctest::Approx(1.0));
  const auto pair = labelled({6, 8}, {{0, 1, mol::BondOrder::kSingle}});
  // t=0 picks node 0 w.p. 1/2, then STOP among {1, STOP} w.p. 1/2.
  CHECK(random_policy_success(pair, {0}) == doctest::Approx(0.25));
  // Both nodes: either first pick, then node 1 of {other, STOP}; cap ends it.
  CHECK(random_policy_success(pair, {0, 1}) == doctest::Approx(0.5));
  CHECK(random_policy_success(pair, {}) == 0.0);
}

TEST_CASE("random policy: matches simulation") {
  GeneratorConfig gc;
  gc.count = 4;
  gc.seed = 5;
  const auto data = generate_synthetic_dataset(gc);
  Rng rng(99);
  for (bool one_hop : {true, false}) {
    for (const auto &s : data) {
      const double p = random_policy_success(s.product, s.rc, one_hop);
      const env::Environment env(s.product, s.rc, one_hop);
      const int episodes = 20000;
      int wins = 0;
      for (int e = 0; e < episodes; ++e) {
        env::State st = env.reset();
        for (;;) {
          const auto actions = env::legal_actions(st, one_hop);
          auto r = env.step(st, actions[rng.uniform_index(actions.size())]);
          if (r.terminal) {
            wins += r.reward == 1.0;
            break;
          }
          st = std::move(r.next);
        }
      }
      const double sigma = std::sqrt(p * (1 - p) / episodes);
      CAPTURE(p);
      CHECK(std::abs(static_cast<double>(wins) / episodes - p) <= 4 * sigma + 1e-12);
    }
  }
}
