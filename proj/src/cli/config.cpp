#include "rcsearch/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "rcsearch/error.hpp"
#include "rcsearch/mol/elements.hpp"

namespace rcs::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string &msg) { throw Error(ErrorCode::kInvalidConfig, msg); }

// Reads the keys of one object, remembering which were consumed so the rest
// can be reported as unknown.
class Section {
 public:
  Section(const json &j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) bad(where() + " must be a JSON object");
  }

  template <class T>
  void get(const char *key, T &out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception &) {
      bad(where(key) + " has the wrong type (" + std::string(j_.at(key).type_name()) + ")");
    }
    if constexpr (std::is_unsigned_v<T>) {
      if (j_.at(key).is_number_integer() && j_.at(key).get<std::int64_t>() < 0) bad(where(key) + " must be >= 0");
    }
  }

  const json *child(const char *key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto &[key, value] : j_.items()) {
      if (!seen_.count(key)) {
        std::string known;
        for (const auto &k : seen_) known += (known.empty() ? "" : ", ") + k;
        bad("unknown key " + where(key.c_str()) + " (known: " + known + ")");
      }
    }
  }

  std::string where(const char *key = nullptr) const {
    std::string p = path_;
    if (key) p += (p.empty() ? "" : ".") + std::string(key);
    return "'" + (p.empty() ? std::string("<root>") : p) + "'";
  }

 private:
  const json &j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void section(Section &parent, const char *key, const std::string &path, F &&fill) {
  if (const json *c = parent.child(key)) {
    Section s(*c, path);
    fill(s);
    s.finish();
  }
}

}  // namespace

RunConfig RunConfig::from_json(const json &j) {
  RunConfig c;
  Section root(j, "");
  root.get("seed", c.seed);
  root.get("workers", c.workers);
  section(root, "encoder", "encoder", [&](Section &s) {
    s.get("layers", c.encoder.layers);
    s.get("heads", c.encoder.heads);
    s.get("dim", c.encoder.dim);
    s.get("self_loops", c.encoder.self_loops);
  });
  section(root, "train", "train", [&](Section &s) {
    auto &t = c.train;
    s.get("gamma", t.gamma);
    s.get("total_iterations", t.total_iterations);
    s.get("imitation_iterations", t.imitation_iterations);
    s.get("batch_size", t.batch_size);
    s.get("replay_capacity", t.replay_capacity);
    s.get("epsilon_start", t.epsilon_start);
    s.get("epsilon_end", t.epsilon_end);
    s.get("epsilon_decay_begin", t.epsilon_decay_begin);
    s.get("epsilon_decay_end", t.epsilon_decay_end);
    s.get("target_sync_period", t.target_sync_period);
    std::string mode = agent::target_mode_name(t.target_mode);
    s.get("target_mode", mode);
    t.target_mode = agent::parse_target_mode(mode);
    s.get("checkpoint_period", t.checkpoint_period);
    s.get("log_period", t.log_period);
    s.get("one_hop", t.one_hop);
    s.get("imitation_counterfactuals", t.imitation_counterfactuals);
    s.get("validation_limit", t.validation_limit);
  });
  section(root, "adam", "adam", [&](Section &s) {
    s.get("learning_rate", c.train.adam.learning_rate);
    s.get("beta1", c.train.adam.beta1);
    s.get("beta2", c.train.adam.beta2);
    s.get("epsilon", c.train.adam.epsilon);
  });
  section(root, "generator", "generator", [&](Section &s) {
    auto &g = c.generator;
    s.get("count", g.count);
    s.get("min_atoms", g.min_atoms);
    s.get("max_atoms", g.max_atoms);
    std::vector<std::string> palette;
    for (int z : g.palette) palette.emplace_back(mol::element_symbol(z));
    s.get("palette", palette);
    g.palette.clear();
    for (const auto &sym : palette) {
      const auto z = mol::atomic_number(sym);
      if (!z) bad("generator.palette: unknown element '" + sym + "'");
      g.palette.push_back(*z);
    }
    s.get("palette_weights", g.palette_weights);
    std::vector<std::string> motifs;
    for (eval::Motif m : g.motifs) motifs.push_back(eval::motif_name(m));
    s.get("motifs", motifs);
    g.motifs.clear();
    for (const auto &m : motifs) g.motifs.push_back(eval::parse_motif(m));
    s.get("edge_density", g.edge_density);
    s.get("max_retries", g.max_retries);
  });
  section(root, "split", "split", [&](Section &s) { s.get("ratios", c.split); });
  section(root, "search", "search", [&](Section &s) {
    s.get("beam", c.search.beam);
    s.get("one_hop", c.search.one_hop);
  });
  section(root, "oracle", "oracle", [&](Section &s) {
    s.get("graphs", c.oracle.graphs);
    s.get("max_nodes", c.oracle.max_nodes);
  });
  section(root, "baseline", "baseline", [&](Section &s) {
    auto &b = c.baseline;
    s.get("kind", b.kind);
    s.get("kmax", b.kmax);
    s.get("repeats", b.repeats);
    s.get("radius", b.radius);
    s.get("nbits", b.nbits);
    s.get("epochs", b.epochs);
    s.get("batch_size", b.batch_size);
    s.get("count_classes", b.count_classes);
  });
  section(root, "paths", "paths", [&](Section &s) {
    s.get("in", c.paths.in);
    s.get("out", c.paths.out);
    s.get("checkpoint", c.paths.checkpoint);
    s.get("data", c.paths.data);
    s.get("train", c.paths.train);
  });
  root.finish();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    bad(path.string() + ": invalid JSON: " + e.what());
  }
  return from_json(j);
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["workers"] = workers;
  j["encoder"] = {{"layers", encoder.layers}, {"heads", encoder.heads}, {"dim", encoder.dim},
                  {"self_loops", encoder.self_loops}};
  const auto &t = train;
  ordered_json tj;
  tj["gamma"] = t.gamma;
  tj["total_iterations"] = t.total_iterations;
  tj["imitation_iterations"] = t.imitation_iterations;
  tj["batch_size"] = t.batch_size;
  tj["replay_capacity"] = t.replay_capacity;
  tj["epsilon_start"] = t.epsilon_start;
  tj["epsilon_end"] = t.epsilon_end;
  tj["epsilon_decay_begin"] = t.epsilon_decay_begin;
  tj["epsilon_decay_end"] = t.epsilon_decay_end;
  tj["target_sync_period"] = t.target_sync_period;
  tj["target_mode"] = agent::target_mode_name(t.target_mode);
  tj["checkpoint_period"] = t.checkpoint_period;
  tj["log_period"] = t.log_period;
  tj["one_hop"] = t.one_hop;
  tj["imitation_counterfactuals"] = t.imitation_counterfactuals;
  tj["validation_limit"] = t.validation_limit;
  j["train"] = tj;
  j["adam"] = {{"learning_rate", t.adam.learning_rate}, {"beta1", t.adam.beta1}, {"beta2", t.adam.beta2},
               {"epsilon", t.adam.epsilon}};
  ordered_json gj;
  gj["count"] = generator.count;
  gj["min_atoms"] = generator.min_atoms;
  gj["max_atoms"] = generator.max_atoms;
  std::vector<std::string> palette, motifs;
  for (int z : generator.palette) palette.emplace_back(mol::element_symbol(z));
  for (eval::Motif m : generator.motifs) motifs.push_back(eval::motif_name(m));
  gj["palette"] = palette;
  gj["palette_weights"] = generator.palette_weights;
  gj["motifs"] = motifs;
  gj["edge_density"] = generator.edge_density;
  gj["max_retries"] = generator.max_retries;
  j["generator"] = gj;
  j["split"] = {{"ratios", split}};
  j["search"] = {{"beam", search.beam}, {"one_hop", search.one_hop}};
  j["oracle"] = {{"graphs", oracle.graphs}, {"max_nodes", oracle.max_nodes}};
  ordered_json bj;
  bj["kind"] = baseline.kind;
  bj["kmax"] = baseline.kmax;
  bj["repeats"] = baseline.repeats;
  bj["radius"] = baseline.radius;
  bj["nbits"] = baseline.nbits;
  bj["epochs"] = baseline.epochs;
  bj["batch_size"] = baseline.batch_size;
  bj["count_classes"] = baseline.count_classes;
  j["baseline"] = bj;
  j["paths"] = {{"in", paths.in}, {"out", paths.out}, {"checkpoint", paths.checkpoint},
                {"data", paths.data}, {"train", paths.train}};
  return j;
}

void RunConfig::save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

void RunConfig::validate() const {
  if (workers < 0) bad("workers must be >= 0");
  encoder.validate();
  train.validate();
  generator_config().validate();
  double sum = 0.0;
  for (double r : split) {
    if (!(r >= 0.0)) bad("split.ratios must be >= 0");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) bad("split.ratios must sum to 1");
  if (search.beam < 1) bad("search.beam must be >= 1");
  if (oracle.graphs < 1 || oracle.max_nodes < 1 || oracle.max_nodes > 16) {
    bad("oracle needs graphs >= 1 and 1 <= max_nodes <= 16");
  }
  if (baseline.kind != "sim" && baseline.kind != "bond") bad("baseline.kind must be 'sim' or 'bond'");
  if (baseline.kmax < 1 || baseline.repeats < 1 || baseline.nbits < 1 || baseline.radius < 0) {
    bad("baseline needs kmax, repeats, nbits >= 1 and radius >= 0");
  }
  if (baseline.count_classes < 1 || baseline.batch_size < 1) bad("baseline count_classes and batch_size must be >= 1");
}

eval::GeneratorConfig RunConfig::generator_config() const {
  eval::GeneratorConfig g = generator;
  g.seed = seed;
  return g;
}

}  // namespace rcs::cli
