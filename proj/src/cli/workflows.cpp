#include "rcsearch/cli/workflows.hpp"

#include <omp.h>

#include <cmath>
#include <fstream>
#include <map>

#include "rcsearch/baselines/bond_classifier.hpp"
#include "rcsearch/baselines/sim.hpp"
#include "rcsearch/error.hpp"
#include "rcsearch/eval/data.hpp"
#include "rcsearch/search/search.hpp"
#include "rcsearch/tensor/checkpoint.hpp"

namespace rcs::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string &msg) { throw Error(ErrorCode::kInvalidConfig, msg); }

// A file, or `name` inside a directory.
fs::path resolve(const std::string &path, const char *name, const char *what) {
  if (path.empty()) bad(std::string("no ") + what + " given");
  fs::path p(path);
  if (fs::is_directory(p)) p /= name;
  if (!fs::is_regular_file(p)) bad(std::string(what) + " not found: " + p.string());
  return p;
}

fs::path output_dir(const RunConfig &config, const char *command) {
  if (config.paths.out.empty()) bad(std::string(command) + " needs an output directory (--out)");
  const fs::path out(config.paths.out);
  fs::create_directories(out);
  config.save(out / (std::string(command) + ".config.json"));
  return out;
}

void write_json(const fs::path &path, const ordered_json &j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<eval::SamplePrediction> samples_of(const std::vector<eval::PredictionRecord> &records) {
  std::vector<eval::SamplePrediction> out;
  out.reserve(records.size());
  for (const auto &r : records) out.push_back(r.sample);
  return out;
}

// One report per repeat (records without "repeat" form a single group),
// pooled; per-repeat accuracies are summarised alongside.
ordered_json score_records(const std::vector<eval::PredictionRecord> &records, std::span<const mol::Sample> data,
                           std::span<const mol::Sample> train) {
  std::map<int, std::vector<eval::PredictionRecord>> groups;
  for (const auto &r : records) groups[r.repeat.value_or(-1)].push_back(r);
  if (groups.empty()) groups[-1];
  std::optional<eval::EvalReport> pooled;
  std::array<std::vector<double>, eval::kReportK> per_repeat;
  for (const auto &[repeat, group] : groups) {
    const eval::EvalReport r = eval::stratified_report(samples_of(group), data, train);
    for (std::size_t k = 1; k <= eval::kReportK; ++k) per_repeat[k - 1].push_back(r.overall.accuracy(k));
    if (pooled) {
      pooled->merge(r);
    } else {
      pooled = r;
    }
  }
  ordered_json j = pooled->to_json();
  if (groups.size() > 1 || groups.begin()->first >= 0) {
    ordered_json rep;
    rep["count"] = groups.size();
    for (std::size_t k = 1; k <= eval::kReportK; ++k) {
      const auto &v = per_repeat[k - 1];
      double mean = 0.0, var = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      for (double x : v) var += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
      rep["top" + std::to_string(k)] = {{"mean", mean}, {"std", sd}};
    }
    j["repeats"] = rep;
  }
  return j;
}

std::vector<mol::Sample> optional_dataset(const std::string &path, const char *name, const char *what) {
  if (path.empty()) return {};
  return mol::load_dataset(resolve(path, name, what));
}

}  // namespace

std::string version_string() {
  return std::string("rcsearch ") + kVersion + " (checkpoint format v" + std::to_string(tensor::kCheckpointVersion) +
         ", dataset schema v" + std::to_string(mol::kDatasetSchemaVersion) + ", built with " + __VERSION__ + ")";
}

void apply_workers(const RunConfig &config) {
  if (config.workers > 0) omp_set_num_threads(config.workers);
}

GenDataSummary gen_data(const RunConfig &config) {
  config.validate();
  const fs::path out = output_dir(config, "gen-data");
  const std::vector<mol::Sample> samples = eval::generate_synthetic_dataset(config.generator_config());
  const eval::Split split = eval::split_dataset(samples, config.split, config.seed);
  mol::save_dataset(samples, out / "dataset.jsonl");
  mol::save_dataset(split.train, out / "train.jsonl");
  mol::save_dataset(split.val, out / "val.jsonl");
  mol::save_dataset(split.test, out / "test.jsonl");

  ordered_json manifest;
  manifest["seed"] = config.seed;
  manifest["ratios"] = config.split;
  for (const auto &[name, part] : {std::pair<const char *, const std::vector<mol::Sample> *>{"train", &split.train},
                                   {"val", &split.val},
                                   {"test", &split.test}}) {
    std::vector<std::string> ids;
    for (const auto &s : *part) ids.push_back(s.id);
    manifest[name] = {{"count", ids.size()}, {"ids", ids}};
  }
  write_json(out / "split.json", manifest);
  return {samples.size(), split.train.size(), split.val.size(), split.test.size()};
}

agent::TrainResult train(const RunConfig &config) {
  config.validate();
  if (config.paths.in.empty()) bad("train needs a training set (--in)");
  std::vector<mol::Sample> train_set, val_set;
  if (fs::is_directory(config.paths.in)) {
    train_set = mol::load_dataset(resolve(config.paths.in, "train.jsonl", "training set"));
    const fs::path val = fs::path(config.paths.in) / "val.jsonl";
    if (fs::is_regular_file(val)) val_set = mol::load_dataset(val);
  } else {
    train_set = mol::load_dataset(resolve(config.paths.in, "", "training set"));
    val_set = optional_dataset(config.paths.data, "val.jsonl", "validation set");
  }
  if (train_set.empty()) throw Error(ErrorCode::kEmptyTrainSet, "training set is empty");
  const fs::path out = output_dir(config, "train");

  const model::QNetwork net(config.encoder);
  tensor::ParameterStore store = net.create_parameters(config.seed);
  agent::Trainer trainer(net, store, config.train, train_set, config.seed);
  agent::TrainResult result = trainer.run(val_set, out);

  ordered_json summary;
  summary["iterations"] = config.train.total_iterations;
  summary["train_samples"] = train_set.size();
  summary["val_samples"] = val_set.size();
  summary["skipped_unreachable"] = result.skipped_unreachable;
  summary["best_iteration"] = result.best_iteration;
  summary["best_val_top1"] = result.best_val_top1;
  summary["final_loss"] = result.log.empty() ? 0.0 : result.log.back().loss;
  write_json(out / "train_summary.json", summary);
  return result;
}

std::vector<eval::PredictionRecord> predict(const RunConfig &config) {
  config.validate();
  const std::vector<mol::Sample> data = mol::load_dataset(resolve(config.paths.in, "test.jsonl", "input dataset"));
  const model::QNetwork net(config.encoder);
  tensor::ParameterStore store = net.layout();
  tensor::load_checkpoint(resolve(config.paths.checkpoint, "best.bin", "checkpoint"), store);
  const fs::path out = output_dir(config, "predict");

  const search::BeamOptions options{config.search.beam, config.search.one_hop};
  std::vector<eval::PredictionRecord> records(data.size());
  const auto n = static_cast<std::ptrdiff_t>(data.size());
  std::string failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    eval::PredictionRecord &r = records[i];
    r.sample.id = data[i].id;
    r.k = config.search.beam;
    try {
      const model::PreparedGraph prepared = model::prepare_graph(data[i].product, config.encoder.self_loops);
      const model::GraphQ q(net, store, prepared);
      for (const search::ScoredSet &s : search::beam_search(q, data[i].product, options)) {
        r.sample.predictions.push_back(s.nodes);
        r.sample.scores.push_back(s.score);
      }
    } catch (const std::exception &e) {
#pragma omp critical(predict_failure)
      if (failure.empty()) failure = data[i].id + ": " + e.what();
    }
  }
  if (!failure.empty()) throw std::runtime_error("prediction failed for " + failure);
  eval::save_predictions(records, out / "predictions.jsonl");
  return records;
}

nlohmann::ordered_json evaluate(const RunConfig &config) {
  config.validate();
  const std::vector<eval::PredictionRecord> records =
      eval::load_predictions(resolve(config.paths.in, "predictions.jsonl", "prediction file"));
  const std::vector<mol::Sample> data =
      mol::load_dataset(resolve(config.paths.data, "test.jsonl", "labelled dataset (--data)"));
  const std::vector<mol::Sample> train_set = optional_dataset(config.paths.train, "train.jsonl", "training set");
  const fs::path out = output_dir(config, "evaluate");
  const ordered_json report = score_records(records, data, train_set);
  write_json(out / "report.json", report);
  return report;
}

OracleSummary oracle_check(const RunConfig &config) {
  config.validate();
  if (!config.paths.out.empty()) output_dir(config, "oracle-check");
  const model::QNetwork net(config.encoder);
  OracleSummary summary;
  summary.graphs = config.oracle.graphs;
  std::vector<std::string> outcome(config.oracle.graphs);
  const auto n = static_cast<std::ptrdiff_t>(config.oracle.graphs);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::uint64_t>(ii);
    Rng rng(derive_seed(config.seed, "oracle", i));
    const int nodes = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(config.oracle.max_nodes)));
    const mol::MolGraph g = eval::random_connected_graph(rng, nodes);
    const tensor::ParameterStore store = net.create_parameters(derive_seed(config.seed, "oracle-params", i));
    const model::PreparedGraph prepared = model::prepare_graph(g, config.encoder.self_loops);
    const model::GraphQ q(net, store, prepared);
    const auto size = static_cast<std::size_t>(nodes);
    const std::size_t count = search::enumerate_connected_subsets(g, size).size();
    const auto beam = search::beam_search(q, g, {count, true});
    const auto oracle = search::exhaustive_topk(q, g, count, size);
    if (beam != oracle) {
      std::size_t first = 0;
      while (first < std::min(beam.size(), oracle.size()) && beam[first] == oracle[first]) ++first;
      outcome[i] = "graph " + std::to_string(i) + " (" + std::to_string(nodes) + " nodes, " + std::to_string(count) +
                   " subsets): beam returned " + std::to_string(beam.size()) + ", oracle " +
                   std::to_string(oracle.size()) + ", first difference at rank " + std::to_string(first + 1);
    }
  }
  for (auto &o : outcome) {
    if (o.empty()) continue;
    ++summary.mismatches;
    if (summary.details.size() < 10) summary.details.push_back(std::move(o));
  }
  if (!config.paths.out.empty()) {
    write_json(fs::path(config.paths.out) / "oracle.json",
               {{"graphs", summary.graphs}, {"mismatches", summary.mismatches}, {"details", summary.details}});
  }
  return summary;
}

nlohmann::ordered_json baseline(const RunConfig &config) {
  config.validate();
  const std::string train_path = !config.paths.train.empty() ? config.paths.train : config.paths.in;
  const std::vector<mol::Sample> train_set = mol::load_dataset(resolve(train_path, "train.jsonl", "training set"));
  const std::vector<mol::Sample> test = mol::load_dataset(resolve(config.paths.in, "test.jsonl", "test set"));
  const fs::path out = output_dir(config, "baseline");
  const auto &b = config.baseline;
  std::vector<eval::PredictionRecord> records;

  if (b.kind == "sim") {
    const baselines::SimRetriever sim(train_set, {b.radius, b.nbits, 10000});
    std::vector<std::vector<std::vector<mol::NodeSet>>> lists(test.size());
    const auto n = static_cast<std::ptrdiff_t>(test.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      Rng rng(derive_seed(config.seed, "sim", i));
      lists[i] = sim.predict(test[i].product, b.kmax, b.repeats, rng);
    }
    for (std::size_t rep = 0; rep < b.repeats; ++rep) {
      for (std::size_t i = 0; i < test.size(); ++i) {
        eval::PredictionRecord r;
        r.sample.id = test[i].id;
        r.k = b.kmax;
        r.repeat = static_cast<int>(rep);
        // Rank order is all the baseline provides; scores are reciprocal ranks.
        for (const mol::NodeSet &s : lists[i][rep]) {
          r.sample.scores.push_back(1.0 / static_cast<double>(r.sample.predictions.size() + 1));
          r.sample.predictions.push_back(s);
        }
        records.push_back(std::move(r));
      }
    }
  } else {
    baselines::BondClassifierConfig bc;
    bc.encoder = config.encoder;
    bc.count_classes = b.count_classes;
    bc.epochs = b.epochs;
    bc.batch_size = b.batch_size;
    bc.adam = config.train.adam;
    bc.validate();
    const baselines::BondClassifier model(bc);
    tensor::ParameterStore store = model.create_parameters(config.seed);
    const baselines::BondTrainResult trained = baselines::train_bond_classifier(model, store, train_set, config.seed);
    tensor::save_checkpoint(store, out / "bond_classifier.bin");
    records.resize(test.size());
    const auto n = static_cast<std::ptrdiff_t>(test.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      records[i].sample.id = test[i].id;
      records[i].k = b.kmax;
      for (const search::ScoredSet &s : model.predict(store, test[i].product, b.kmax)) {
        records[i].sample.predictions.push_back(s.nodes);
        records[i].sample.scores.push_back(s.score);
      }
    }
    ordered_json log;
    log["excluded"] = trained.excluded;
    log["epoch_loss"] = trained.epoch_loss;
    write_json(out / "bond_training.json", log);
  }
  eval::save_predictions(records, out / "predictions.jsonl");
  const ordered_json report = score_records(records, test, train_set);
  write_json(out / "report.json", report);
  return report;
}

}  // namespace rcs::cli
