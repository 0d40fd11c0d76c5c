#include "rcsearch/eval/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "rcsearch/env/env.hpp"
#include "rcsearch/error.hpp"
#include "rcsearch/random.hpp"

namespace rcs::eval {

Split split_dataset(std::span<const mol::Sample> samples, std::array<double, 3> ratios, std::uint64_t seed) {
  if (samples.size() < 10) {
    throw Error(ErrorCode::kTooFewSamples, "need at least 10 samples to split, got " + std::to_string(samples.size()));
  }
  for (double r : ratios) {
    if (r < 0.0) throw Error(ErrorCode::kInvalidConfig, "split ratios must be non-negative");
  }
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (std::fabs(total - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidConfig, "split ratios must sum to 1");
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "split"));
  rng.shuffle(order);
  const auto n = static_cast<double>(samples.size());
  const auto n_train = static_cast<std::size_t>(std::llround(n * ratios[0]));
  const auto n_val = std::min(static_cast<std::size_t>(std::llround(n * ratios[1])), samples.size() - n_train);
  Split out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto &dst = i < n_train ? out.train : (i < n_train + n_val ? out.val : out.test);
    dst.push_back(samples[order[i]]);
  }
  return out;
}

std::string motif_name(Motif m) {
  switch (m) {
    case Motif::kSulfur: return "S";
    case Motif::kBromoCarbon: return "C-Br";
    case Motif::kPhosphoryl: return "P=O";
    case Motif::kAcylChloride: return "O=C-Cl";
    case Motif::kGemDifluoro: return "F-C-F";
  }
  return "?";
}

Motif parse_motif(const std::string &name) {
  for (Motif m : {Motif::kSulfur, Motif::kBromoCarbon, Motif::kPhosphoryl, Motif::kAcylChloride, Motif::kGemDifluoro}) {
    if (motif_name(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown motif '" + name + "' (S, C-Br, P=O, O=C-Cl, F-C-F)");
}

namespace {

struct MotifSpec {
  std::vector<int> z;
  std::vector<mol::Bond> bonds;
  // Motif atom that bonds to the background, and how many bonds it may make.
  int anchor;
  int min_links;
  int max_links;
};

MotifSpec spec_of(Motif m) {
  using mol::BondOrder;
  switch (m) {
    case Motif::kSulfur: return {{16}, {}, 0, 1, 2};
    case Motif::kBromoCarbon: return {{6, 35}, {{0, 1}}, 0, 1, 3};
    case Motif::kPhosphoryl: return {{15, 8}, {{0, 1, BondOrder::kDouble}}, 0, 1, 3};
    case Motif::kAcylChloride: return {{8, 6, 17}, {{0, 1, BondOrder::kDouble}, {1, 2}}, 1, 1, 1};
    case Motif::kGemDifluoro: return {{9, 6, 9}, {{0, 1}, {1, 2}}, 1, 1, 2};
  }
  throw Error(ErrorCode::kInvalidConfig, "bad motif");
}

int max_background_degree(int z) {
  switch (z) {
    case 6: return 4;
    case 7: return 3;
    case 8: return 2;
    default: return 4;
  }
}

std::size_t weighted_pick(const std::vector<double> &w, Rng &rng) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double x = rng.uniform() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (x < w[i]) return i;
    x -= w[i];
  }
  return w.size() - 1;
}

// One attempt; returns false when the background has no room for the motif.
bool try_build(const GeneratorConfig &cfg, Rng &rng, mol::Sample &out) {
  const Motif motif = cfg.motifs[rng.uniform_index(cfg.motifs.size())];
  const MotifSpec spec = spec_of(motif);
  const int total =
      cfg.min_atoms + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(cfg.max_atoms - cfg.min_atoms + 1)));
  const int nb = total - static_cast<int>(spec.z.size());
  if (nb < 1) return false;

  std::vector<mol::Atom> atoms(static_cast<std::size_t>(nb));
  std::vector<int> room(static_cast<std::size_t>(nb));
  for (int i = 0; i < nb; ++i) {
    atoms[static_cast<std::size_t>(i)].z = cfg.palette[weighted_pick(cfg.palette_weights, rng)];
    room[static_cast<std::size_t>(i)] = max_background_degree(atoms[static_cast<std::size_t>(i)].z);
  }
  std::vector<mol::Bond> bonds;
  std::vector<std::vector<char>> linked(static_cast<std::size_t>(total), std::vector<char>(static_cast<std::size_t>(total), 0));
  auto link = [&](int a, int b, mol::BondOrder order) {
    bonds.push_back({a, b, order});
    linked[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
    linked[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = 1;
  };
  auto open_nodes = [&](int below, int except) {
    std::vector<int> v;
    for (int i = 0; i < below; ++i)
      if (room[static_cast<std::size_t>(i)] > 0 && i != except) v.push_back(i);
    return v;
  };
  // Random spanning tree, attaching each atom to an earlier one with room.
  for (int i = 1; i < nb; ++i) {
    const std::vector<int> open = open_nodes(i, -1);
    if (open.empty()) return false;
    const int p = open[rng.uniform_index(open.size())];
    link(p, i, mol::BondOrder::kSingle);
    --room[static_cast<std::size_t>(p)];
    --room[static_cast<std::size_t>(i)];
  }
  const auto extra = static_cast<int>(std::lround(cfg.edge_density * nb));
  for (int e = 0; e < extra; ++e) {
    const std::vector<int> open = open_nodes(nb, -1);
    if (open.size() < 2) break;
    const int a = open[rng.uniform_index(open.size())];
    const int b = open[rng.uniform_index(open.size())];
    if (a == b || linked[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) continue;
    link(a, b, mol::BondOrder::kSingle);
    --room[static_cast<std::size_t>(a)];
    --room[static_cast<std::size_t>(b)];
  }

  // Plant the motif and bond its anchor into the background.
  for (int z : spec.z) {
    mol::Atom a;
    a.z = z;
    atoms.push_back(a);
  }
  for (const mol::Bond &b : spec.bonds) link(b.a + nb, b.b + nb, b.order);
  std::vector<int> open = open_nodes(nb, -1);
  const int want = spec.min_links + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(spec.max_links - spec.min_links + 1)));
  if (static_cast<int>(open.size()) < spec.min_links) return false;
  rng.shuffle(open);
  const int links = std::min<int>(want, static_cast<int>(open.size()));
  for (int i = 0; i < links; ++i) link(open[static_cast<std::size_t>(i)], spec.anchor + nb, mol::BondOrder::kSingle);

  // Shuffle ids so the motif does not always sit at the end.
  std::vector<int> perm(static_cast<std::size_t>(total));
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  const mol::MolGraph g = mol::relabel(mol::MolGraph(std::move(atoms), std::move(bonds)), perm);
  std::vector<int> label;
  for (std::size_t i = 0; i < spec.z.size(); ++i) label.push_back(perm[static_cast<std::size_t>(nb) + i]);
  out.product = g;
  out.rc = mol::make_node_set(label);
  return true;
}

}  // namespace

mol::MolGraph motif_pattern(Motif m) {
  const MotifSpec spec = spec_of(m);
  std::vector<mol::Atom> atoms;
  for (int z : spec.z) {
    mol::Atom a;
    a.z = z;
    atoms.push_back(a);
  }
  return mol::MolGraph(std::move(atoms), spec.bonds);
}

void GeneratorConfig::validate() const {
  auto bad = [](const std::string &msg) { throw Error(ErrorCode::kInvalidConfig, msg); };
  if (min_atoms < 2 || max_atoms < min_atoms) bad("atom range must satisfy 2 <= min_atoms <= max_atoms");
  if (palette.empty() || palette.size() != palette_weights.size()) bad("palette and palette_weights must match");
  for (double w : palette_weights)
    if (!(w >= 0.0)) bad("palette weights must be >= 0");
  if (motifs.empty()) bad("at least one motif is required");
  if (edge_density < 0.0) bad("edge_density must be >= 0");
  if (max_retries < 1) bad("max_retries must be >= 1");
}

mol::Sample generate_synthetic_sample(const GeneratorConfig &config, std::size_t index) {
  Rng rng(derive_seed(config.seed, "synthetic", index));
  mol::Sample s;
  s.id = "syn-" + std::to_string(index);
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    if (try_build(config, rng, s)) return s;
  }
  throw Error(ErrorCode::kMotifPlantFailure, "sample " + std::to_string(index) + ": no room to plant a motif after " +
                                                 std::to_string(config.max_retries) + " attempts");
}

std::vector<mol::Sample> generate_synthetic_dataset(const GeneratorConfig &config) {
  config.validate();
  std::vector<mol::Sample> out(config.count);
  const auto n = static_cast<std::ptrdiff_t>(config.count);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = generate_synthetic_sample(config, static_cast<std::size_t>(i));
  }
  return out;
}

mol::MolGraph random_connected_graph(Rng &rng, int n) {
  static constexpr int kElements[] = {6, 7, 8};
  std::vector<mol::Atom> atoms(static_cast<std::size_t>(n));
  for (mol::Atom &a : atoms) a.z = kElements[rng.uniform_index(3)];
  std::set<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) edges.emplace(static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i))), i);
  for (int e = 0; e < n / 2; ++e) {
    const int a = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    const int b = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    if (a != b) edges.insert(std::minmax(a, b));
  }
  std::vector<mol::Bond> bonds;
  for (auto [a, b] : edges) bonds.push_back({a, b});
  return mol::MolGraph(std::move(atoms), std::move(bonds));
}

double random_policy_success(const mol::MolGraph &g, const mol::NodeSet &label, bool one_hop) {
  if (label.empty() || g.empty()) return 0.0;
  // Only selections inside the label can still end on it, so the walk is
  // tracked over label subsets.
  std::map<mol::NodeSet, double> frontier = {{mol::NodeSet{}, 1.0}};
  double success = 0.0;
  while (!frontier.empty()) {
    std::map<mol::NodeSet, double> next;
    for (const auto &[s, p] : frontier) {
      if (s == label) {
        if (static_cast<int>(s.size()) >= g.num_atoms()) {
          success += p;
        } else {
          success += p / static_cast<double>(env::legal_actions(g, s, one_hop).size());
        }
        continue;
      }
      if (static_cast<int>(s.size()) >= g.num_atoms()) continue;
      const std::vector<env::Action> actions = env::legal_actions(g, s, one_hop);
      const double share = p / static_cast<double>(actions.size());
      for (const env::Action &a : actions) {
        if (a.is_stop() || !std::binary_search(label.begin(), label.end(), a.node)) continue;
        mol::NodeSet t = s;
        t.insert(std::upper_bound(t.begin(), t.end(), a.node), a.node);
        next[t] += share;
      }
    }
    frontier = std::move(next);
  }
  return success;
}

}  // namespace rcs::eval
