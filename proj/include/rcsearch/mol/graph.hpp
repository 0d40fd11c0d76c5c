#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace rcs::mol {

enum class BondOrder : std::uint8_t { kSingle = 0, kDouble = 1, kTriple = 2, kAromatic = 3 };

enum class Hybridization : std::uint8_t { kSP = 0, kSP2 = 1, kSP3 = 2, kSP3D = 3, kSP3D2 = 4 };

// Bond direction categories recorded from '/' and '\' tokens.
enum class BondDirection : std::uint8_t { kNone = 0, kUp = 1, kDown = 2 };

inline constexpr int kNumStereoCategories = 6;
inline constexpr int kNumDirectionCategories = 3;

std::string_view bond_order_name(BondOrder order);
std::optional<BondOrder> parse_bond_order(std::string_view name);
// Bond-order contribution to valence; aromatic bonds count 1.5.
double bond_valence(BondOrder order);

// Sorted, duplicate-free list of node ids.
using NodeSet = std::vector<int>;

NodeSet make_node_set(std::vector<int> ids);

struct Atom {
  int z = 6;
  int formal_charge = 0;
  bool aromatic = false;
  // Set for bracket atoms ([nH], [NH4+]); unset atoms get implicit hydrogens.
  std::optional<int> explicit_h;

  // Derived by MolGraph construction.
  int implicit_h = 0;
  int heavy_degree = 0;
  bool in_ring = false;
  Hybridization hybridization = Hybridization::kSP3;

  int total_h() const { return explicit_h.value_or(0) + implicit_h; }
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::kSingle;
  int stereo = 0;     // 0..5
  int direction = 0;  // BondDirection

  // Derived.
  bool conjugated = false;
  bool in_ring = false;

  int other(int node) const { return node == a ? b : a; }
};

struct Neighbor {
  int node;
  int bond;
};

// Undirected simple molecular graph. Immutable after construction; derived
// atom/bond properties (implicit H, ring flags, hybridization, conjugation)
// are computed once in the constructor.
class MolGraph {
 public:
  MolGraph() = default;

  // Throws Error(kInvalidGraph) on self-loops, duplicate bonds, or endpoints
  // out of range, and Error(kUnknownElement) on atomic numbers outside 1..118.
  MolGraph(std::vector<Atom> atoms, std::vector<Bond> bonds);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const Atom &atom(int i) const { return atoms_[static_cast<std::size_t>(i)]; }
  const Bond &bond(int i) const { return bonds_[static_cast<std::size_t>(i)]; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const Bond> bonds() const { return bonds_; }

  // Neighbors of node i, sorted by neighbor id.
  std::span<const Neighbor> neighbors(int i) const {
    const auto begin = adjacency_offsets_[static_cast<std::size_t>(i)];
    const auto end = adjacency_offsets_[static_cast<std::size_t>(i) + 1];
    return std::span<const Neighbor>(adjacency_).subspan(begin, end - begin);
  }

  std::optional<int> bond_between(int a, int b) const;

  bool valid_node(int i) const { return i >= 0 && i < num_atoms(); }

  // Explicit valence: rounded bond-order sum plus explicit hydrogens.
  int explicit_valence(int i) const;

  // Structural equality over the stored (non-derived) fields, same ids.
  bool same_structure(const MolGraph &other) const;

 private:
  void build_adjacency();
  void perceive_rings();
  void assign_hydrogens();
  void assign_hybridization();

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::size_t> adjacency_offsets_ = {0};
  std::vector<Neighbor> adjacency_;
};

struct InducedSubgraph {
  MolGraph graph;
  // original_ids[new_id] = id in the source graph
  std::vector<int> original_ids;
};

// Node-induced subgraph over `nodes`, relabelled densely in ascending
// original-id order. Throws Error(kInvalidNodeId).
InducedSubgraph induced_subgraph(const MolGraph &g, const NodeSet &nodes);

// Nodes adjacent to any selected node, excluding the selection itself.
// Throws Error(kEmptySelection) / Error(kInvalidNodeId).
NodeSet one_hop_frontier(const MolGraph &g, const NodeSet &selected);

// True iff the induced subgraph is connected; empty -> false.
bool is_connected_subset(const MolGraph &g, const NodeSet &nodes);

// Number of connected components of the induced subgraph (0 for empty).
int connected_component_count(const MolGraph &g, const NodeSet &nodes);

// Number of g-edges with both endpoints in `nodes`.
int induced_edge_count(const MolGraph &g, const NodeSet &nodes);

// Same graph with node ids permuted: new id of old node i is perm[i].
MolGraph relabel(const MolGraph &g, std::span<const int> perm);

}  // namespace rcs::mol
