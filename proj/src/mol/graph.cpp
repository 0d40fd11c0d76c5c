#include "rcsearch/mol/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rcsearch/error.hpp"
#include "rcsearch/mol/elements.hpp"

namespace rcs::mol {

std::string_view bond_order_name(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle: return "single";
    case BondOrder::kDouble: return "double";
    case BondOrder::kTriple: return "triple";
    case BondOrder::kAromatic: return "aromatic";
  }
  return "single";
}

std::optional<BondOrder> parse_bond_order(std::string_view name) {
  if (name == "single") return BondOrder::kSingle;
  if (name == "double") return BondOrder::kDouble;
  if (name == "triple") return BondOrder::kTriple;
  if (name == "aromatic") return BondOrder::kAromatic;
  return std::nullopt;
}

double bond_valence(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle: return 1.0;
    case BondOrder::kDouble: return 2.0;
    case BondOrder::kTriple: return 3.0;
    case BondOrder::kAromatic: return 1.5;
  }
  return 1.0;
}

NodeSet make_node_set(std::vector<int> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

MolGraph::MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)) {
  const int n = num_atoms();
  for (const Atom &a : atoms_) {
    if (a.z < 1 || a.z > kMaxAtomicNumber) {
      throw Error(ErrorCode::kUnknownElement, "atomic number " + std::to_string(a.z));
    }
  }
  for (const Bond &b : bonds_) {
    if (b.a < 0 || b.a >= n || b.b < 0 || b.b >= n) {
      throw Error(ErrorCode::kInvalidGraph, "bond endpoint out of range");
    }
    if (b.a == b.b) throw Error(ErrorCode::kInvalidGraph, "self-loop on atom " + std::to_string(b.a));
    if (b.stereo < 0 || b.direction < 0) throw Error(ErrorCode::kInvalidGraph, "negative bond category");
  }
  build_adjacency();
  perceive_rings();
  assign_hydrogens();
  assign_hybridization();
}

void MolGraph::build_adjacency() {
  const auto n = atoms_.size();
  std::vector<std::vector<Neighbor>> lists(n);
  for (std::size_t i = 0; i < bonds_.size(); ++i) {
    const Bond &b = bonds_[i];
    lists[static_cast<std::size_t>(b.a)].push_back({b.b, static_cast<int>(i)});
    lists[static_cast<std::size_t>(b.b)].push_back({b.a, static_cast<int>(i)});
  }
  adjacency_offsets_.assign(n + 1, 0);
  adjacency_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    auto &l = lists[i];
    std::sort(l.begin(), l.end(), [](const Neighbor &x, const Neighbor &y) { return x.node < y.node; });
    for (std::size_t k = 1; k < l.size(); ++k) {
      if (l[k].node == l[k - 1].node) {
        throw Error(ErrorCode::kInvalidGraph, "duplicate bond between atoms " + std::to_string(i) +
                                                  " and " + std::to_string(l[k].node));
      }
    }
    adjacency_.insert(adjacency_.end(), l.begin(), l.end());
    adjacency_offsets_[i + 1] = adjacency_.size();
    atoms_[i].heavy_degree = static_cast<int>(l.size());
  }
}

// A bond lies on a cycle iff it is not a bridge; bridges found with an
// iterative lowlink DFS.
void MolGraph::perceive_rings() {
  const int n = num_atoms();
  std::vector<int> disc(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> bridge(bonds_.size(), 0);
  int timer = 0;
  struct Frame {
    int node;
    int parent_bond;
    std::size_t next;
  };
  std::vector<Frame> stack;
  for (int root = 0; root < n; ++root) {
    if (disc[static_cast<std::size_t>(root)] >= 0) continue;
    stack.push_back({root, -1, 0});
    disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
    while (!stack.empty()) {
      Frame &f = stack.back();
      const auto nbrs = neighbors(f.node);
      if (f.next < nbrs.size()) {
        const Neighbor nb = nbrs[f.next++];
        if (nb.bond == f.parent_bond) continue;
        const auto v = static_cast<std::size_t>(nb.node);
        if (disc[v] < 0) {
          disc[v] = low[v] = timer++;
          stack.push_back({nb.node, nb.bond, 0});
        } else {
          auto &lu = low[static_cast<std::size_t>(f.node)];
          lu = std::min(lu, disc[v]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          const auto u = static_cast<std::size_t>(stack.back().node);
          const auto v = static_cast<std::size_t>(done.node);
          low[u] = std::min(low[u], low[v]);
          if (low[v] > disc[u]) bridge[static_cast<std::size_t>(done.parent_bond)] = 1;
        }
      }
    }
  }
  for (auto &a : atoms_) a.in_ring = false;
  for (std::size_t i = 0; i < bonds_.size(); ++i) {
    Bond &b = bonds_[i];
    b.in_ring = bridge[i] == 0;
    if (b.in_ring) {
      atoms_[static_cast<std::size_t>(b.a)].in_ring = true;
      atoms_[static_cast<std::size_t>(b.b)].in_ring = true;
    }
  }
}

void MolGraph::assign_hydrogens() {
  for (int i = 0; i < num_atoms(); ++i) {
    Atom &a = atoms_[static_cast<std::size_t>(i)];
    a.implicit_h = 0;
    if (a.explicit_h.has_value()) continue;
    const auto valences = default_valences(a.z);
    if (valences.empty()) continue;
    double used = 0.0;
    for (const Neighbor &nb : neighbors(i)) used += bond_valence(bonds_[static_cast<std::size_t>(nb.bond)].order);
    // Aromatic atoms take their lowest valence (pyrrole-type H must be explicit).
    int target = a.aromatic ? valences.front() : valences.back();
    for (int v : a.aromatic ? valences.first(1) : valences) {
      if (v >= used) {
        target = v;
        break;
      }
    }
    a.implicit_h = std::max(0, static_cast<int>(std::floor(target - used)));
  }
}

// Deterministic stand-in for toolkit hybridization perception.
void MolGraph::assign_hybridization() {
  for (int i = 0; i < num_atoms(); ++i) {
    Atom &a = atoms_[static_cast<std::size_t>(i)];
    int doubles = 0;
    int triples = 0;
    for (const Neighbor &nb : neighbors(i)) {
      const BondOrder o = bonds_[static_cast<std::size_t>(nb.bond)].order;
      doubles += o == BondOrder::kDouble;
      triples += o == BondOrder::kTriple;
    }
    const int coordination = a.heavy_degree + a.total_h();
    if ((a.z == 15 || a.z == 16) && coordination >= 5) {
      a.hybridization = coordination >= 6 ? Hybridization::kSP3D2 : Hybridization::kSP3D;
    } else if (a.aromatic) {
      a.hybridization = Hybridization::kSP2;
    } else if (triples > 0 || doubles >= 2) {
      a.hybridization = Hybridization::kSP;
    } else if (doubles == 1) {
      a.hybridization = Hybridization::kSP2;
    } else {
      a.hybridization = Hybridization::kSP3;
    }
  }
  auto unsaturated = [](const Atom &a) {
    return a.aromatic || a.hybridization == Hybridization::kSP2 || a.hybridization == Hybridization::kSP;
  };
  for (Bond &b : bonds_) {
    b.conjugated = unsaturated(atoms_[static_cast<std::size_t>(b.a)]) &&
                   unsaturated(atoms_[static_cast<std::size_t>(b.b)]);
  }
}

std::optional<int> MolGraph::bond_between(int a, int b) const {
  if (!valid_node(a) || !valid_node(b)) return std::nullopt;
  const auto nbrs = neighbors(a);
  const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), b,
                                   [](const Neighbor &x, int id) { return x.node < id; });
  if (it != nbrs.end() && it->node == b) return it->bond;
  return std::nullopt;
}

int MolGraph::explicit_valence(int i) const {
  double sum = 0.0;
  for (const Neighbor &nb : neighbors(i)) sum += bond_valence(bond(nb.bond).order);
  return static_cast<int>(std::lround(sum)) + atom(i).explicit_h.value_or(0);
}

bool MolGraph::same_structure(const MolGraph &other) const {
  if (num_atoms() != other.num_atoms() || num_bonds() != other.num_bonds()) return false;
  for (int i = 0; i < num_atoms(); ++i) {
    const Atom &x = atom(i);
    const Atom &y = other.atom(i);
    if (x.z != y.z || x.formal_charge != y.formal_charge || x.aromatic != y.aromatic ||
        x.explicit_h != y.explicit_h) {
      return false;
    }
  }
  for (int i = 0; i < num_bonds(); ++i) {
    const Bond &x = bond(i);
    const Bond &y = other.bond(i);
    if (std::minmax(x.a, x.b) != std::minmax(y.a, y.b) || x.order != y.order || x.stereo != y.stereo ||
        x.direction != y.direction) {
      return false;
    }
  }
  return true;
}

namespace {

void check_ids(const MolGraph &g, const NodeSet &nodes) {
  for (int id : nodes) {
    if (!g.valid_node(id)) throw Error(ErrorCode::kInvalidNodeId, "node id " + std::to_string(id));
  }
}

}  // namespace

InducedSubgraph induced_subgraph(const MolGraph &g, const NodeSet &nodes) {
  check_ids(g, nodes);
  const NodeSet ids = make_node_set(nodes);
  std::vector<int> remap(static_cast<std::size_t>(g.num_atoms()), -1);
  std::vector<Atom> atoms;
  atoms.reserve(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    remap[static_cast<std::size_t>(ids[k])] = static_cast<int>(k);
    Atom a = g.atom(ids[k]);
    atoms.push_back(Atom{a.z, a.formal_charge, a.aromatic, a.explicit_h});
  }
  std::vector<Bond> bonds;
  for (const Bond &b : g.bonds()) {
    const int ra = remap[static_cast<std::size_t>(b.a)];
    const int rb = remap[static_cast<std::size_t>(b.b)];
    if (ra >= 0 && rb >= 0) bonds.push_back(Bond{ra, rb, b.order, b.stereo, b.direction});
  }
  return InducedSubgraph{MolGraph(std::move(atoms), std::move(bonds)), ids};
}

NodeSet one_hop_frontier(const MolGraph &g, const NodeSet &selected) {
  if (selected.empty()) throw Error(ErrorCode::kEmptySelection, "frontier of an empty selection");
  check_ids(g, selected);
  std::vector<char> in(static_cast<std::size_t>(g.num_atoms()), 0);
  for (int id : selected) in[static_cast<std::size_t>(id)] = 1;
  std::vector<int> out;
  for (int id : selected) {
    for (const Neighbor &nb : g.neighbors(id)) {
      if (!in[static_cast<std::size_t>(nb.node)]) out.push_back(nb.node);
    }
  }
  return make_node_set(std::move(out));
}

int connected_component_count(const MolGraph &g, const NodeSet &nodes) {
  check_ids(g, nodes);
  std::vector<char> in(static_cast<std::size_t>(g.num_atoms()), 0);
  for (int id : nodes) in[static_cast<std::size_t>(id)] = 1;
  std::vector<char> seen(in.size(), 0);
  std::vector<int> stack;
  int components = 0;
  for (int start : nodes) {
    if (seen[static_cast<std::size_t>(start)]) continue;
    ++components;
    stack.push_back(start);
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (const Neighbor &nb : g.neighbors(u)) {
        const auto v = static_cast<std::size_t>(nb.node);
        if (in[v] && !seen[v]) {
          seen[v] = 1;
          stack.push_back(nb.node);
        }
      }
    }
  }
  return components;
}

bool is_connected_subset(const MolGraph &g, const NodeSet &nodes) {
  return connected_component_count(g, nodes) == 1;
}

int induced_edge_count(const MolGraph &g, const NodeSet &nodes) {
  check_ids(g, nodes);
  std::vector<char> in(static_cast<std::size_t>(g.num_atoms()), 0);
  for (int id : nodes) in[static_cast<std::size_t>(id)] = 1;
  int count = 0;
  for (const Bond &b : g.bonds()) count += in[static_cast<std::size_t>(b.a)] && in[static_cast<std::size_t>(b.b)];
  return count;
}

MolGraph relabel(const MolGraph &g, std::span<const int> perm) {
  const auto n = static_cast<std::size_t>(g.num_atoms());
  if (perm.size() != n) throw Error(ErrorCode::kInvalidGraph, "permutation size mismatch");
  std::vector<Atom> atoms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom &a = g.atom(static_cast<int>(i));
    atoms[static_cast<std::size_t>(perm[i])] = Atom{a.z, a.formal_charge, a.aromatic, a.explicit_h};
  }
  std::vector<Bond> bonds;
  bonds.reserve(static_cast<std::size_t>(g.num_bonds()));
  for (const Bond &b : g.bonds()) {
    bonds.push_back(Bond{perm[static_cast<std::size_t>(b.a)], perm[static_cast<std::size_t>(b.b)], b.order,
                         b.stereo, b.direction});
  }
  return MolGraph(std::move(atoms), std::move(bonds));
}

}  // namespace rcs::mol
