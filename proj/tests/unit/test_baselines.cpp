#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "rcsearch/baselines/bond_classifier.hpp"
#include "rcsearch/baselines/sim.hpp"
#include "rcsearch/error.hpp"
#include "rcsearch/eval/data.hpp"
#include "rcsearch/mol/smiles.hpp"
#include "rcsearch/tensor/gradcheck.hpp"

using namespace rcs;
using namespace rcs::baselines;

namespace {

std::vector<int> random_perm(int n, Rng &rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[rng.uniform_index(i)]);
  return p;
}

mol::MolGraph random_labelled(Rng &rng, int n, double p_edge) {
  std::vector<mol::Atom> atoms(static_cast<std::size_t>(n));
  const int alphabet[] = {6, 7, 8};
  for (auto &a : atoms) a.z = alphabet[rng.uniform_index(3)];
  std::vector<mol::Bond> bonds;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.bernoulli(p_edge)) bonds.push_back({i, j, rng.bernoulli(0.3) ? mol::BondOrder::kDouble : mol::BondOrder::kSingle});
  return mol::MolGraph(std::move(atoms), std::move(bonds));
}

// Every injective map, checked pairwise.
std::vector<std::vector<int>> brute_match(const mol::MolGraph &p, const mol::MolGraph &t) {
  std::vector<std::vector<int>> out;
  const int np = p.num_atoms(), nt = t.num_atoms();
  std::vector<int> m(static_cast<std::size_t>(np));
  std::function<void(int)> rec = [&](int i) {
    if (i == np) {
      for (int a = 0; a < np; ++a) {
        if (p.atom(a).z != t.atom(m[a]).z || p.atom(a).aromatic != t.atom(m[a]).aromatic) return;
        for (int b = a + 1; b < np; ++b) {
          const auto pb = p.bond_between(a, b);
          const auto tb = t.bond_between(m[a], m[b]);
          if (pb.has_value() != tb.has_value()) return;
          if (pb && p.bond(*pb).order != t.bond(*tb).order) return;
        }
      }
      out.push_back(m);
      return;
    }
    for (int v = 0; v < nt; ++v) {
      if (std::find(m.begin(), m.begin() + i, v) != m.begin() + i) continue;
      m[static_cast<std::size_t>(i)] = v;
      rec(i + 1);
    }
  };
  rec(0);
  return out;
}

mol::Sample sample(std::string id, const std::string &smiles, mol::NodeSet rc) {
  return mol::Sample{std::move(id), smiles, mol::parse_smiles(smiles), std::move(rc)};
}

}  // namespace

TEST_CASE("fingerprint: determinism and relabelling invariance") {
  const auto a = ecfp_fingerprint(mol::parse_smiles("CCO"));
  CHECK(a.width() == 2048);
  CHECK(a == ecfp_fingerprint(mol::parse_smiles("CCO")));
  CHECK(a == ecfp_fingerprint(mol::parse_smiles("OCC")));
  CHECK(tanimoto(a, ecfp_fingerprint(mol::parse_smiles("CCO"))) == 1.0);
  CHECK(a.count() > 0);
  CHECK(tanimoto(a, ecfp_fingerprint(mol::parse_smiles("CCN"))) < 1.0);

  eval::GeneratorConfig gc;
  gc.count = 1000;
  gc.seed = 31;
  const auto data = eval::generate_synthetic_dataset(gc);
  Rng rng(2);
  for (const auto &s : data) {
    const auto moved = mol::relabel(s.product, random_perm(s.product.num_atoms(), rng));
    CHECK(ecfp_fingerprint(moved) == ecfp_fingerprint(s.product));
  }
  CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("tanimoto: examples, symmetry, range") {
  Fingerprint a(64), b(64), c(64);
  CHECK(tanimoto(a, b) == 0.0);
  a.set(1);
  a.set(5);
  b.set(1);
  b.set(5);
  b.set(9);
  b.set(40);
  c.set(2);
  CHECK(tanimoto(a, a) == 1.0);
  CHECK(tanimoto(a, b) == 0.5);
  CHECK(tanimoto(a, c) == 0.0);
  CHECK_THROWS_AS(tanimoto(a, Fingerprint(128)), Error);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    Fingerprint x(100), y(100);
    for (int j = 0; j < 100; ++j) {
      if (rng.bernoulli(0.2)) x.set(static_cast<std::size_t>(j));
      if (rng.bernoulli(0.2)) y.set(static_cast<std::size_t>(j));
    }
    const double t = tanimoto(x, y);
    CHECK(t == tanimoto(y, x));
    CHECK(t >= 0.0);
    CHECK(t <= 1.0);
  }
}

TEST_CASE("subgraph match: examples") {
  const auto cco = mol::parse_smiles("CCO");
  CHECK(subgraph_match(mol::parse_smiles("C"), cco) == std::vector<std::vector<int>>{{0}, {1}});
  const auto co = subgraph_match(mol::parse_smiles("CO"), cco);
  REQUIRE(co.size() == 1);
  CHECK(mol::make_node_set(co[0]) == mol::NodeSet{1, 2});
  CHECK(subgraph_match(mol::parse_smiles("CCC"), cco).empty());
  // Induced: a C-C pattern does not match two carbons joined by a double bond.
  CHECK(subgraph_match(mol::parse_smiles("CC"), mol::parse_smiles("C=C")).empty());
  // Induced: an open C.C.C path does not embed into a triangle.
  CHECK(subgraph_match(mol::parse_smiles("CCC"), mol::parse_smiles("C1CC1")).empty());
  const auto fcf = subgraph_match(mol::parse_smiles("FCF"), mol::parse_smiles("CC(F)(F)O"));
  CHECK(fcf.size() == 2);
  CHECK(matched_node_sets(fcf).size() == 1);
  CHECK_THROWS_AS(subgraph_match(mol::parse_smiles("C"), mol::parse_smiles("CCCCCCCCCC"), 5), Error);
  CHECK_THROWS_AS(subgraph_match(mol::MolGraph(), cco), Error);
}

TEST_CASE("subgraph match: brute force on random small graphs") {
  Rng rng(5);
  for (int trial = 0; trial < 1500; ++trial) {
    const auto t = random_labelled(rng, 1 + static_cast<int>(rng.uniform_index(6)), 0.5);
    const auto p = random_labelled(rng, 1 + static_cast<int>(rng.uniform_index(3)), 0.6);
    CHECK(subgraph_match(p, t) == brute_match(p, t));
  }
}

TEST_CASE("generator: planted motif matches exactly once") {
  eval::GeneratorConfig gc;
  gc.count = 500;
  gc.seed = 8;
  const auto data = eval::generate_synthetic_dataset(gc);
  std::size_t unique = 0;
  for (const auto &s : data) {
    const auto pattern = mol::induced_subgraph(s.product, s.rc).graph;
    const auto sets = matched_node_sets(subgraph_match(pattern, s.product));
    unique += sets.size() == 1 && sets.front() == s.rc;
  }
  CHECK(static_cast<double>(unique) >= 0.99 * static_cast<double>(data.size()));
}

TEST_CASE("sim baseline: retrieval, symmetric picks, determinism") {
  const std::vector<mol::Sample> train = {
      sample("t0", "CCCl", {1, 2}),
      sample("t1", "CC(=O)Cl", {1, 2, 3}),
      sample("t2", "CCl", {1}),
      sample("t3", "CCO", {}),
  };
  const SimRetriever sim(train);
  CHECK_THROWS_AS(SimRetriever({}), Error);
  Rng rng(1);
  const auto self = sim.predict(train[1].product, 4, 1, rng);
  REQUIRE(!self[0].empty());
  CHECK(self[0][0] == train[1].rc);
  CHECK(sim.neighbours(train[1].product).front() == 1);

  // The query has two Cl atoms; a lone-Cl pattern lands on either.
  const auto query = mol::parse_smiles("ClCCCl");
  const SimRetriever only_cl(std::vector<mol::Sample>{train[2]});
  const auto runs = only_cl.predict(query, 1, 10000, rng);
  int first = 0;
  for (const auto &r : runs) {
    REQUIRE(r.size() == 1);
    first += r[0] == mol::NodeSet{0};
    CHECK((r[0] == mol::NodeSet{0} || r[0] == mol::NodeSet{3}));
  }
  CHECK(std::abs(first - 5000) <= 3 * 50);

  Rng r1(9), r2(9);
  CHECK(sim.predict(query, 4, 20, r1) == sim.predict(query, 4, 20, r2));
  // Lists are duplicate-free and at most kmax long.
  for (const auto &r : sim.predict(mol::parse_smiles("CC(Cl)C(=O)Cl"), 3, 5, rng)) {
    CHECK(r.size() <= 3);
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = i + 1; j < r.size(); ++j) CHECK(r[i] != r[j]);
  }
}

TEST_CASE("bond sets: k-best enumeration matches brute force") {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    BondScores s;
    const std::size_t m = 1 + rng.uniform_index(7);
    for (std::size_t b = 0; b < m; ++b) s.bond_prob.push_back(rng.uniform(0.01, 0.99));
    double sum = 0.0;
    for (int c = 0; c < 4; ++c) {
      s.count_prob.push_back(rng.uniform(0.05, 1.0));
      sum += s.count_prob.back();
    }
    for (double &p : s.count_prob) p /= sum;

    std::vector<double> all;
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
      const auto n = static_cast<std::size_t>(std::popcount(mask));
      if (n > s.count_prob.size()) continue;
      double lp = std::log(s.count_prob[n - 1]);
      for (std::size_t b = 0; b < m; ++b) lp += std::log((mask >> b) & 1u ? s.bond_prob[b] : 1.0 - s.bond_prob[b]);
      all.push_back(lp);
    }
    std::sort(all.rbegin(), all.rend());
    const std::size_t k = 1 + rng.uniform_index(6);
    const auto got = kbest_bond_sets(s, k);
    REQUIRE(got.size() == std::min(k, all.size()));
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].log_prob == doctest::Approx(all[i]).epsilon(1e-9));
      double lp = std::log(s.count_prob[got[i].bonds.size() - 1]);
      for (std::size_t b = 0; b < m; ++b) {
        const bool in = std::binary_search(got[i].bonds.begin(), got[i].bonds.end(), static_cast<int>(b));
        lp += std::log(in ? s.bond_prob[b] : 1.0 - s.bond_prob[b]);
      }
      CHECK(lp == doctest::Approx(got[i].log_prob).epsilon(1e-9));
    }
  }
  CHECK(kbest_bond_sets(BondScores{{}, {1.0}}, 3).empty());
}

TEST_CASE("bond classifier: labels, gradients, fit, exclusions") {
  CHECK(label_bonds(mol::parse_smiles("CC(=O)Cl"), {1, 2, 3}) == std::vector<int>{1, 2});
  CHECK(label_bonds(mol::parse_smiles("CCO"), {2}).empty());

  BondClassifierConfig cfg;
  cfg.encoder = model::EncoderConfig{2, 2, 8, true};
  cfg.count_classes = 3;
  const BondClassifier model(cfg);
  {
    auto store = model.create_parameters(1);
    const auto g1 = mol::parse_smiles("CC(=O)Cl"), g2 = mol::parse_smiles("OCCN");
    const auto p1 = model::prepare_graph(g1, true), p2 = model::prepare_graph(g2, true);
    const model::PreparedGraph *two[] = {&p1, &p2};
    const auto batch = model::GraphBatch::build(two);
    const std::vector<int> counts = {1, 0};
    auto loss = [&](tensor::Tape &t) {
      const auto l = model.forward(t, store, batch);
      return tensor::add(tensor::bce_with_logits(l.bonds, t.constant(tensor::Matrix(6, 1, std::vector<double>{0, 1, 1, 0, 0, 1}))),
                         tensor::softmax_cross_entropy(l.counts, counts));
    };
    {
      tensor::Tape t;
      t.backward(loss(t));
    }
    tensor::GradCheckOptions opt;
    opt.samples_per_parameter = 8;
    const auto rep = tensor::finite_diff_check(
        [&] {
          tensor::Tape t(false);
          return loss(t).value()[0];
        },
        store, opt);
    INFO(rep.worst_parameter);
    CHECK(rep.max_relative_error < 1e-4);
  }

  const std::vector<mol::Sample> train = {
      sample("a", "CCCBr", {2, 3}),
      sample("b", "OCCC(=O)Cl", {3, 4, 5}),
      sample("c", "CCS", {2}),
  };
  auto store = model.create_parameters(2);
  BondClassifierConfig fit_cfg = cfg;
  fit_cfg.epochs = 300;
  fit_cfg.adam.learning_rate = 0.01;
  const BondClassifier fit(fit_cfg);
  const auto res = train_bond_classifier(fit, store, train, 4);
  CHECK(res.excluded == 1);
  CHECK(res.epoch_loss.back() < 0.1 * res.epoch_loss.front());
  const auto top = fit.predict(store, train[0].product, 3);
  REQUIRE(!top.empty());
  CHECK(top[0].nodes == train[0].rc);
  CHECK(fit.predict(store, train[1].product, 1)[0].nodes == train[1].rc);
  for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].score >= top[i].score);
  // An atom-only label can never be produced: predictions span bonds.
  for (const auto &p : fit.predict(store, train[2].product, 4)) CHECK(p.nodes.size() >= 2);
  CHECK(fit.predict(store, mol::parse_smiles("C"), 3).empty());

  const std::vector<mol::Sample> atoms_only = {sample("x", "CCS", {2})};
  CHECK_THROWS_AS(train_bond_classifier(fit, store, atoms_only, 1), Error);
}
