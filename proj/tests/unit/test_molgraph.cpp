#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>

#include "doctest.h"
#include "rcsearch/error.hpp"
#include "rcsearch/mol/dataset.hpp"
#include "rcsearch/mol/features.hpp"
#include "rcsearch/mol/graph.hpp"
#include "rcsearch/mol/smiles.hpp"
#include "rcsearch/random.hpp"

using namespace rcs;
using namespace rcs::mol;

namespace {

ErrorCode code_of(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIoError;
}

MolGraph path(int n) {
  std::vector<Atom> atoms(static_cast<std::size_t>(n));
  std::vector<Bond> bonds;
  for (int i = 0; i + 1 < n; ++i) bonds.push_back({i, i + 1});
  return MolGraph(atoms, bonds);
}

}  // namespace

TEST_CASE("smiles: ethanol") {
  const MolGraph g = parse_smiles("CCO");
  REQUIRE(g.num_atoms() == 3);
  REQUIRE(g.num_bonds() == 2);
  CHECK(g.atom(2).z == 8);
  CHECK(g.bond(0).a == 0);
  CHECK(g.bond(0).b == 1);
  CHECK(g.bond(1).a == 1);
  CHECK(g.bond(1).b == 2);
  CHECK(g.atom(0).implicit_h == 3);
  CHECK(g.atom(1).implicit_h == 2);
  CHECK(g.atom(2).implicit_h == 1);
  for (const Bond &b : g.bonds()) CHECK(b.order == BondOrder::kSingle);
}

TEST_CASE("smiles: rings") {
  const MolGraph c3 = parse_smiles("C1CC1");
  CHECK(c3.num_bonds() == 3);
  for (const Atom &a : c3.atoms()) CHECK(a.in_ring);
  for (const Bond &b : c3.bonds()) CHECK(b.in_ring);

  const MolGraph bz = parse_smiles("c1ccccc1");
  REQUIRE(bz.num_atoms() == 6);
  REQUIRE(bz.num_bonds() == 6);
  for (const Atom &a : bz.atoms()) {
    CHECK(a.aromatic);
    CHECK(a.implicit_h == 1);
    CHECK(a.hybridization == Hybridization::kSP2);
  }
  for (const Bond &b : bz.bonds()) CHECK(b.order == BondOrder::kAromatic);

  const MolGraph tail = parse_smiles("CC1CC1");
  CHECK_FALSE(tail.bond(0).in_ring);
  CHECK_FALSE(tail.atom(0).in_ring);
}

TEST_CASE("smiles: brackets, branches, %nn") {
  const MolGraph g = parse_smiles("C[NH3+]");
  CHECK(g.atom(1).formal_charge == 1);
  CHECK(g.atom(1).total_h() == 3);
  CHECK(g.atom(1).implicit_h == 0);

  const MolGraph acid = parse_smiles("CC(=O)O");
  CHECK(acid.num_atoms() == 4);
  CHECK(acid.bond(1).order == BondOrder::kDouble);
  CHECK(acid.atom(2).implicit_h == 0);
  CHECK(acid.atom(1).hybridization == Hybridization::kSP2);

  const MolGraph pct = parse_smiles("C%12CC%12");
  CHECK(pct.num_bonds() == 3);

  const MolGraph salt = parse_smiles("[Na+].[Cl-]");
  CHECK(salt.num_atoms() == 2);
  CHECK(salt.num_bonds() == 0);

  const MolGraph nitrile = parse_smiles("CC#N");
  CHECK(nitrile.atom(1).hybridization == Hybridization::kSP);
  CHECK(nitrile.bond(0).conjugated == false);

  const MolGraph pyrrole = parse_smiles("c1cc[nH]c1");
  CHECK(pyrrole.atom(3).total_h() == 1);

  const MolGraph dir = parse_smiles("F/C=C/F");
  CHECK(dir.bond(0).direction == static_cast<int>(BondDirection::kUp));
}

TEST_CASE("smiles: errors") {
  CHECK(code_of([] { parse_smiles("C1CC"); }) == ErrorCode::kUnmatchedRingBond);
  CHECK(code_of([] { parse_smiles("CC(C"); }) == ErrorCode::kUnbalancedBranch);
  CHECK(code_of([] { parse_smiles("CC)C"); }) == ErrorCode::kUnbalancedBranch);
  CHECK(code_of([] { parse_smiles("CXC"); }) == ErrorCode::kUnknownElement);
  CHECK(code_of([] { parse_smiles("[Xx]"); }) == ErrorCode::kUnknownElement);
  CHECK(code_of([] { parse_smiles(""); }) == ErrorCode::kEmptyInput);
  try {
    parse_smiles("CCC(C");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("position") != std::string::npos);
  }
}

TEST_CASE("featurize: widths and one-hot blocks") {
  std::size_t atom_sum = 0, bond_sum = 0;
  for (std::size_t w : AtomFeatureLayout::kBlocks) atom_sum += w;
  for (std::size_t w : BondFeatureLayout::kBlocks) bond_sum += w;
  CHECK(atom_sum == 135);
  CHECK(bond_sum == 15);
  const MolGraph g = parse_smiles("CC(=O)Oc1ccccc1[N+](=O)[O-]");
  const FeatureEncoding f = featurize(g);
  CHECK(f.atom_features.size() == 135 * static_cast<std::size_t>(g.num_atoms()));
  CHECK(f.bond_features.size() == 15 * static_cast<std::size_t>(g.num_bonds()));
  CHECK(f.atom_features[5] == 1.0);
  double first_block = 0.0;
  for (int i = 0; i < 100; ++i) first_block += f.atom_features[static_cast<std::size_t>(i)];
  CHECK(first_block == 1.0);
}

TEST_CASE("featurize: out-of-range clamps to the last index") {
  const MolGraph g = parse_smiles("[Og]");
  const FeatureEncoding f = featurize(g);
  CHECK(f.atom_features[99] == 1.0);
  const MolGraph charged = parse_smiles("[N+3]");
  const FeatureEncoding fc = featurize(charged);
  // charge block starts after 100+6+6+6+5+5
  CHECK(fc.atom_features[128 + 4] == 1.0);
}

TEST_CASE("featurize: fuzz widths and one-hot validity") {
  const char *corpus[] = {"CCO", "c1ccccc1O", "C1CC1", "CC(=O)N", "[NH4+]", "O=S(=O)(O)O", "C#CC=C", "P(Cl)(Cl)(Cl)(Cl)Cl"};
  for (const char *s : corpus) {
    const FeatureEncoding f = featurize(parse_smiles(s));
    for (std::size_t i = 0; i < f.num_atoms; ++i) {
      std::size_t off = 0;
      for (std::size_t blk = 0; blk < AtomFeatureLayout::kBlocks.size(); ++blk) {
        double sum = 0.0;
        for (std::size_t j = 0; j < AtomFeatureLayout::kBlocks[blk]; ++j) {
          const double v = f.atom_row(i)[off + j];
          CHECK((v == 0.0 || v == 1.0));
          sum += v;
        }
        CHECK(sum <= 1.0);
        off += AtomFeatureLayout::kBlocks[blk];
      }
    }
  }
}

TEST_CASE("induced subgraph and frontier") {
  const MolGraph g = parse_smiles("CCO");
  CHECK(induced_subgraph(g, {0, 1}).graph.num_bonds() == 1);
  CHECK(induced_subgraph(g, {0, 2}).graph.num_bonds() == 0);
  CHECK(induced_subgraph(g, {}).graph.num_atoms() == 0);
  CHECK(code_of([&] { induced_subgraph(g, {0, 5}); }) == ErrorCode::kInvalidNodeId);

  const MolGraph p = path(3);
  CHECK(one_hop_frontier(p, {1}) == NodeSet{0, 2});
  CHECK(one_hop_frontier(p, {0, 1}) == NodeSet{2});
  CHECK(one_hop_frontier(p, {0, 1, 2}).empty());
  CHECK(code_of([&] { one_hop_frontier(p, {}); }) == ErrorCode::kEmptySelection);

  CHECK_FALSE(is_connected_subset(p, {0, 2}));
  CHECK(is_connected_subset(p, {0, 1}));
  CHECK(is_connected_subset(p, {1}));
  CHECK_FALSE(is_connected_subset(p, {}));
  CHECK(connected_component_count(p, {0, 2}) == 2);
}

TEST_CASE("frontier and induced edges on random graphs") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(10));
    std::vector<Bond> bonds;
    for (int i = 1; i < n; ++i) bonds.push_back({static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i))), i});
    const MolGraph g(std::vector<Atom>(static_cast<std::size_t>(n)), bonds);
    std::vector<int> pick;
    for (int i = 0; i < n; ++i)
      if (rng.bernoulli(0.4)) pick.push_back(i);
    if (pick.empty()) pick.push_back(0);
    const NodeSet s = make_node_set(pick);
    const NodeSet fr = one_hop_frontier(g, s);
    for (int v : fr) {
      CHECK_FALSE(std::binary_search(s.begin(), s.end(), v));
      bool adjacent = false;
      for (int u : s) adjacent = adjacent || g.bond_between(u, v).has_value();
      CHECK(adjacent);
    }
    int naive = 0;
    for (const Bond &b : g.bonds())
      naive += std::binary_search(s.begin(), s.end(), b.a) && std::binary_search(s.begin(), s.end(), b.b);
    CHECK(induced_subgraph(g, s).graph.num_bonds() == naive);
    CHECK(induced_edge_count(g, s) == naive);
  }
}

TEST_CASE("dataset: round trip and errors") {
  const auto dir = std::filesystem::temp_directory_path() / "rcs_unit_ds";
  std::filesystem::create_directories(dir);
  std::vector<Sample> samples;
  const char *smiles[] = {"CCO", "c1ccccc1", "CC(=O)[O-]", "F/C=C/F"};
  for (int i = 0; i < 100; ++i) {
    Sample s;
    s.id = "s" + std::to_string(i);
    s.product = parse_smiles(smiles[i % 4]);
    s.rc = {0, 1};
    samples.push_back(s);
  }
  save_dataset(samples, dir / "d.jsonl");
  const auto back = load_dataset(dir / "d.jsonl");
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == samples[i].id);
    CHECK(back[i].rc == samples[i].rc);
    CHECK(back[i].product.same_structure(samples[i].product));
  }

  CHECK(code_of([] { sample_from_json_line(R"({"v":1,"id":"x","smiles":"CCO"})", 3); }) == ErrorCode::kMalformedRecord);
  CHECK(code_of([] { sample_from_json_line(R"({"v":2,"id":"x","smiles":"CCO","rc":[0]})", 1); }) ==
        ErrorCode::kSchemaVersionMismatch);
  const Sample from_smiles = sample_from_json_line(R"({"v":1,"id":"x","smiles":"CCO","rc":[1]})", 1);
  CHECK(from_smiles.product.num_atoms() == 3);

  { std::ofstream(dir / "empty.jsonl"); }
  CHECK(load_dataset(dir / "empty.jsonl").empty());
}
