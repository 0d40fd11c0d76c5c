#include "rcsearch/baselines/sim.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "rcsearch/error.hpp"

namespace rcs::baselines {

std::size_t Fingerprint::count() const {
  std::size_t c = 0;
  for (std::uint64_t w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

Fingerprint ecfp_fingerprint(const mol::MolGraph &g, int radius, std::size_t nbits) {
  if (nbits == 0) throw Error(ErrorCode::kInvalidConfig, "fingerprint width must be >= 1");
  if (radius < 0) throw Error(ErrorCode::kInvalidConfig, "fingerprint radius must be >= 0");
  Fingerprint fp(nbits);
  const auto n = static_cast<std::size_t>(g.num_atoms());
  std::vector<std::uint64_t> h(n), next(n);
  for (int i = 0; i < g.num_atoms(); ++i) {
    const mol::Atom &a = g.atom(i);
    std::uint64_t x = hash_combine(0, static_cast<std::uint64_t>(a.z));
    x = hash_combine(x, static_cast<std::uint64_t>(a.heavy_degree));
    x = hash_combine(x, static_cast<std::uint64_t>(a.formal_charge + 16));
    x = hash_combine(x, a.aromatic ? 1u : 0u);
    x = hash_combine(x, static_cast<std::uint64_t>(a.total_h()));
    h[static_cast<std::size_t>(i)] = x;
    fp.set(x % nbits);
  }
  std::vector<std::pair<std::uint64_t, std::uint64_t>> env;
  for (int round = 1; round <= radius; ++round) {
    for (int i = 0; i < g.num_atoms(); ++i) {
      env.clear();
      for (const mol::Neighbor &nb : g.neighbors(i)) {
        env.emplace_back(static_cast<std::uint64_t>(g.bond(nb.bond).order), h[static_cast<std::size_t>(nb.node)]);
      }
      std::sort(env.begin(), env.end());
      std::uint64_t x = hash_combine(static_cast<std::uint64_t>(round), h[static_cast<std::size_t>(i)]);
      for (const auto &[order, nh] : env) x = hash_combine(hash_combine(x, order), nh);
      next[static_cast<std::size_t>(i)] = x;
      fp.set(x % nbits);
    }
    h.swap(next);
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.width() != b.width()) {
    throw Error(ErrorCode::kWidthMismatch,
                "fingerprint widths " + std::to_string(a.width()) + " and " + std::to_string(b.width()));
  }
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    both += static_cast<std::size_t>(std::popcount(a.words()[i] & b.words()[i]));
    either += static_cast<std::size_t>(std::popcount(a.words()[i] | b.words()[i]));
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
}

namespace {

class Matcher {
 public:
  Matcher(const mol::MolGraph &p, const mol::MolGraph &t, std::size_t limit) : p_(p), t_(t), limit_(limit) {
    // Pattern nodes in BFS order per component, so most nodes have a mapped
    // neighbour to draw candidates from.
    const int n = p.num_atoms();
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int root = 0; root < n; ++root) {
      if (seen[static_cast<std::size_t>(root)]) continue;
      seen[static_cast<std::size_t>(root)] = 1;
      std::size_t head = order_.size();
      order_.push_back(root);
      anchor_.push_back(-1);
      while (head < order_.size()) {
        const int u = order_[head++];
        for (const mol::Neighbor &nb : p.neighbors(u)) {
          if (seen[static_cast<std::size_t>(nb.node)]) continue;
          seen[static_cast<std::size_t>(nb.node)] = 1;
          order_.push_back(nb.node);
          anchor_.push_back(u);
        }
      }
    }
    map_.assign(static_cast<std::size_t>(n), -1);
    used_.assign(static_cast<std::size_t>(t.num_atoms()), 0);
  }

  std::vector<std::vector<int>> run() {
    extend(0);
    std::sort(out_.begin(), out_.end());
    return std::move(out_);
  }

 private:
  bool compatible(int u, int v) const {
    const mol::Atom &a = p_.atom(u), &b = t_.atom(v);
    if (a.z != b.z || a.aromatic != b.aromatic) return false;
    for (int w = 0; w < p_.num_atoms(); ++w) {
      const int mw = map_[static_cast<std::size_t>(w)];
      if (mw < 0) continue;
      const auto pb = p_.bond_between(u, w);
      const auto tb = t_.bond_between(v, mw);
      if (pb.has_value() != tb.has_value()) return false;
      if (pb && p_.bond(*pb).order != t_.bond(*tb).order) return false;
    }
    return true;
  }

  void try_node(std::size_t depth, int u, int v) {
    if (used_[static_cast<std::size_t>(v)] || !compatible(u, v)) return;
    map_[static_cast<std::size_t>(u)] = v;
    used_[static_cast<std::size_t>(v)] = 1;
    extend(depth + 1);
    used_[static_cast<std::size_t>(v)] = 0;
    map_[static_cast<std::size_t>(u)] = -1;
  }

  void extend(std::size_t depth) {
    if (depth == order_.size()) {
      if (out_.size() >= limit_) {
        throw Error(ErrorCode::kMatchExplosion, "more than " + std::to_string(limit_) + " subgraph matches");
      }
      out_.push_back(map_);
      return;
    }
    const int u = order_[depth];
    const int anchor = anchor_[depth];
    if (anchor >= 0) {
      for (const mol::Neighbor &nb : t_.neighbors(map_[static_cast<std::size_t>(anchor)])) try_node(depth, u, nb.node);
    } else {
      for (int v = 0; v < t_.num_atoms(); ++v) try_node(depth, u, v);
    }
  }

  const mol::MolGraph &p_;
  const mol::MolGraph &t_;
  std::size_t limit_;
  std::vector<int> order_, anchor_, map_;
  std::vector<char> used_;
  std::vector<std::vector<int>> out_;
};

}  // namespace

std::vector<std::vector<int>> subgraph_match(const mol::MolGraph &pattern, const mol::MolGraph &target,
                                             std::size_t max_matches) {
  if (pattern.empty()) throw Error(ErrorCode::kEmptyGraph, "subgraph pattern has no atoms");
  if (pattern.num_atoms() > target.num_atoms()) return {};
  return Matcher(pattern, target, max_matches).run();
}

std::vector<mol::NodeSet> matched_node_sets(const std::vector<std::vector<int>> &matches) {
  std::vector<mol::NodeSet> sets;
  sets.reserve(matches.size());
  for (const auto &m : matches) sets.push_back(mol::make_node_set(m));
  std::sort(sets.begin(), sets.end());
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  return sets;
}

SimRetriever::SimRetriever(std::span<const mol::Sample> train, const SimOptions &options) : options_(options) {
  if (train.empty()) throw Error(ErrorCode::kEmptyTrainSet, "similarity baseline needs training samples");
  fingerprints_.resize(train.size());
  patterns_.resize(train.size());
  const auto count = static_cast<std::ptrdiff_t>(train.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const mol::Sample &s = train[i];
    fingerprints_[i] = ecfp_fingerprint(s.product, options_.radius, options_.nbits);
    const bool usable = !s.rc.empty() && std::all_of(s.rc.begin(), s.rc.end(), [&](int v) {
      return s.product.valid_node(v);
    });
    if (usable) patterns_[i] = mol::induced_subgraph(s.product, s.rc).graph;
  }
}

std::vector<std::size_t> SimRetriever::neighbours(const mol::MolGraph &query) const {
  const Fingerprint q = ecfp_fingerprint(query, options_.radius, options_.nbits);
  std::vector<double> sim(fingerprints_.size());
  for (std::size_t i = 0; i < sim.size(); ++i) sim[i] = tanimoto(q, fingerprints_[i]);
  std::vector<std::size_t> order(sim.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sim[a] > sim[b]; });
  return order;
}

std::vector<std::vector<mol::NodeSet>> SimRetriever::predict(const mol::MolGraph &query, std::size_t kmax,
                                                             std::size_t repeats, Rng &rng) const {
  const std::vector<std::size_t> order = neighbours(query);
  // Matches per visited neighbour, shared by all repeats.
  std::vector<std::vector<mol::NodeSet>> cache;
  auto sets_at = [&](std::size_t pos) -> const std::vector<mol::NodeSet> & {
    while (cache.size() <= pos) {
      const mol::MolGraph &pattern = patterns_[order[cache.size()]];
      cache.push_back(pattern.empty() ? std::vector<mol::NodeSet>{}
                                      : matched_node_sets(subgraph_match(pattern, query, options_.max_matches)));
    }
    return cache[pos];
  };

  std::vector<std::vector<mol::NodeSet>> out(repeats);
  for (auto &ranked : out) {
    for (std::size_t pos = 0; pos < order.size() && ranked.size() < kmax; ++pos) {
      const auto &sets = sets_at(pos);
      if (sets.empty()) continue;
      const mol::NodeSet &pick = sets.size() == 1 ? sets.front() : sets[rng.uniform_index(sets.size())];
      if (std::find(ranked.begin(), ranked.end(), pick) == ranked.end()) ranked.push_back(pick);
    }
  }
  return out;
}

}  // namespace rcs::baselines
