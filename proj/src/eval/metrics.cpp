#include "rcsearch/eval/metrics.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "rcsearch/error.hpp"
#include "rcsearch/random.hpp"

namespace rcs::eval {

std::vector<bool> topk_exact_match(std::span<const mol::NodeSet> predictions, const mol::NodeSet &label,
                                   std::size_t kmax) {
  std::vector<bool> hits(kmax, false);
  for (std::size_t r = 0; r < predictions.size() && r < kmax; ++r) {
    if (predictions[r] == label) {
      for (std::size_t k = r; k < kmax; ++k) hits[k] = true;
      break;
    }
  }
  return hits;
}

double StratumStats::accuracy(std::size_t k) const {
  return count == 0 ? 0.0 : static_cast<double>(hits[k - 1]) / static_cast<double>(count);
}

nlohmann::ordered_json StratumStats::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = count;
  for (std::size_t k = 1; k <= kReportK; ++k) j["top" + std::to_string(k)] = accuracy(k);
  return j;
}

void EvalReport::merge(const EvalReport &other) {
  auto add = [](StratumStats &a, const StratumStats &b) {
    a.count += b.count;
    for (std::size_t k = 0; k < kReportK; ++k) a.hits[k] += b.hits[k];
  };
  add(overall, other.overall);
  for (const auto &[mine, theirs] : {std::pair{&by_edges, &other.by_edges}, std::pair{&by_rc_type, &other.by_rc_type},
                                     std::pair{&by_branches, &other.by_branches}}) {
    for (const auto &[key, stats] : *theirs) add((*mine)[key], stats);
  }
  if (other.extrapolated_samples) {
    extrapolated_samples = extrapolated_samples.value_or(0) + *other.extrapolated_samples;
    extrapolated_patterns = extrapolated_patterns.value_or(0) + *other.extrapolated_patterns;
  }
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j = overall.to_json();
  nlohmann::ordered_json strata;
  for (const auto &[name, group] :
       {std::pair{"edges", &by_edges}, std::pair{"rc_type", &by_rc_type}, std::pair{"branches", &by_branches}}) {
    nlohmann::ordered_json g = nlohmann::ordered_json::object();
    for (const auto &[key, stats] : *group) g[key] = stats.to_json();
    strata[name] = g;
  }
  j["strata"] = strata;
  if (extrapolated_samples) {
    j["extrapolation"] = {{"per_sample", *extrapolated_samples}, {"unique_patterns", *extrapolated_patterns}};
  } else {
    j["extrapolation"] = nullptr;
  }
  return j;
}

namespace {

StratumStats stats_from_json(const nlohmann::json &j) {
  StratumStats s;
  s.count = j.at("n").get<std::size_t>();
  for (std::size_t k = 1; k <= kReportK; ++k) {
    s.hits[k - 1] = static_cast<std::size_t>(
        std::llround(j.at("top" + std::to_string(k)).get<double>() * static_cast<double>(s.count)));
  }
  return s;
}

}  // namespace

EvalReport EvalReport::from_json(const nlohmann::json &j) {
  EvalReport r;
  r.overall = stats_from_json(j);
  const auto &strata = j.at("strata");
  for (const auto &[name, group] :
       {std::pair{"edges", &r.by_edges}, std::pair{"rc_type", &r.by_rc_type}, std::pair{"branches", &r.by_branches}}) {
    for (const auto &[key, value] : strata.at(name).items()) (*group)[key] = stats_from_json(value);
  }
  if (!j.at("extrapolation").is_null()) {
    r.extrapolated_samples = j["extrapolation"].at("per_sample").get<std::size_t>();
    r.extrapolated_patterns = j["extrapolation"].at("unique_patterns").get<std::size_t>();
  }
  return r;
}

std::string edge_stratum(const mol::MolGraph &g, const mol::NodeSet &rc) {
  const int e = mol::induced_edge_count(g, rc);
  if (e == 0) return "atom_only";
  if (e >= 3) return "3+";
  return std::to_string(e);
}

std::string rc_type_stratum(const mol::MolGraph &g, const mol::NodeSet &rc) {
  // One atom, or one bond with its two atoms.
  const bool single = rc.size() == 1 || (rc.size() == 2 && mol::induced_edge_count(g, rc) == 1);
  return single ? "single" : "multiple";
}

std::string branch_stratum(const mol::MolGraph &g, const mol::NodeSet &rc) {
  const int c = mol::connected_component_count(g, rc);
  return c >= 3 ? "3+" : std::to_string(c);
}

std::uint64_t pattern_hash(const mol::MolGraph &g, const mol::NodeSet &nodes) {
  const mol::InducedSubgraph sub = mol::induced_subgraph(g, nodes);
  const mol::MolGraph &h = sub.graph;
  const auto n = static_cast<std::size_t>(h.num_atoms());
  std::vector<std::uint64_t> colour(n), next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const mol::Atom &a = h.atom(static_cast<int>(i));
    colour[i] = hash_combine(mix64(static_cast<std::uint64_t>(a.z)), a.aromatic ? 1u : 0u);
  }
  auto classes = [](const std::vector<std::uint64_t> &c) {
    return std::unordered_set<std::uint64_t>(c.begin(), c.end()).size();
  };
  std::vector<std::uint64_t> history;
  std::size_t count = classes(colour);
  for (std::size_t round = 0; round <= n; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::uint64_t> around;
      for (const mol::Neighbor &nb : h.neighbors(static_cast<int>(i))) {
        around.push_back(hash_combine(static_cast<std::uint64_t>(h.bond(nb.bond).order) + 1,
                                      colour[static_cast<std::size_t>(nb.node)]));
      }
      std::sort(around.begin(), around.end());
      std::uint64_t x = colour[i];
      for (std::uint64_t v : around) x = hash_combine(x, v);
      next[i] = mix64(x);
    }
    colour.swap(next);
    std::vector<std::uint64_t> sorted = colour;
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t summary = n;
    for (std::uint64_t v : sorted) summary = hash_combine(summary, v);
    history.push_back(summary);
    const std::size_t refined = classes(colour);
    if (refined == count && round > 0) break;
    count = refined;
  }
  std::uint64_t out = hash_combine(n, static_cast<std::uint64_t>(h.num_bonds()));
  for (std::uint64_t v : history) out = hash_combine(out, v);
  return out;
}

namespace {

std::unordered_map<std::string, const SamplePrediction *> index_predictions(std::span<const SamplePrediction> preds) {
  std::unordered_map<std::string, const SamplePrediction *> by_id;
  for (const SamplePrediction &p : preds) by_id.emplace(p.id, &p);
  return by_id;
}

const SamplePrediction &find_prediction(const std::unordered_map<std::string, const SamplePrediction *> &by_id,
                                        const std::string &id) {
  const auto it = by_id.find(id);
  if (it == by_id.end()) throw Error(ErrorCode::kMissingPrediction, "no prediction for sample '" + id + "'");
  return *it->second;
}

}  // namespace

ExtrapolationCount extrapolation_count(std::span<const SamplePrediction> predictions,
                                       std::span<const mol::Sample> test, std::span<const mol::Sample> train) {
  std::unordered_set<std::uint64_t> seen;
  for (const mol::Sample &s : train) seen.insert(pattern_hash(s.product, s.rc));
  const auto by_id = index_predictions(predictions);
  ExtrapolationCount out;
  std::unordered_set<std::uint64_t> novel;
  for (const mol::Sample &s : test) {
    const SamplePrediction &p = find_prediction(by_id, s.id);
    if (p.predictions.empty() || p.predictions.front() != s.rc) continue;
    const std::uint64_t h = pattern_hash(s.product, s.rc);
    if (seen.count(h) != 0) continue;
    ++out.samples;
    novel.insert(h);
  }
  out.patterns = novel.size();
  return out;
}

EvalReport stratified_report(std::span<const SamplePrediction> predictions, std::span<const mol::Sample> dataset,
                             std::span<const mol::Sample> train) {
  EvalReport r;
  for (const char *key : {"atom_only", "1", "2", "3+"}) r.by_edges[key];
  for (const char *key : {"single", "multiple"}) r.by_rc_type[key];
  for (const char *key : {"1", "2", "3+"}) r.by_branches[key];
  const auto by_id = index_predictions(predictions);
  for (const mol::Sample &s : dataset) {
    const SamplePrediction &p = find_prediction(by_id, s.id);
    const std::vector<bool> hits = topk_exact_match(p.predictions, s.rc, kReportK);
    for (StratumStats *st : {&r.overall, &r.by_edges[edge_stratum(s.product, s.rc)],
                             &r.by_rc_type[rc_type_stratum(s.product, s.rc)],
                             &r.by_branches[branch_stratum(s.product, s.rc)]}) {
      ++st->count;
      for (std::size_t k = 0; k < kReportK; ++k) st->hits[k] += hits[k] ? 1 : 0;
    }
  }
  if (!train.empty()) {
    const ExtrapolationCount e = extrapolation_count(predictions, dataset, train);
    r.extrapolated_samples = e.samples;
    r.extrapolated_patterns = e.patterns;
  }
  return r;
}

}  // namespace rcs::eval
