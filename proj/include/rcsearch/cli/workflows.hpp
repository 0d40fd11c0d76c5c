#pragma once

#include <string>
#include <vector>

#include "rcsearch/agent/agent.hpp"
#include "rcsearch/cli/config.hpp"
#include "rcsearch/eval/metrics.hpp"
#include "rcsearch/eval/predictions.hpp"

// The CLI subcommands as library calls. Each validates the config, writes
// the resolved config to <out>/<command>.config.json and never touches its
// inputs. Missing inputs raise Error(kInvalidConfig).
namespace rcs::cli {

inline constexpr const char *kVersion = "0.1.0";
std::string version_string();

// Applies `workers` to the OpenMP runtime (0 leaves the default).
void apply_workers(const RunConfig &config);

struct GenDataSummary {
  std::size_t samples = 0, train = 0, val = 0, test = 0;
};
// dataset.jsonl, train/val/test.jsonl and split.json under paths.out.
GenDataSummary gen_data(const RunConfig &config);

// paths.in: a gen-data directory (train.jsonl, optional val.jsonl) or a
// training file, with paths.data as the optional validation file.
// Writes checkpoints/, best.bin, final.bin, train_log.jsonl, train_summary.json.
agent::TrainResult train(const RunConfig &config);

// Beam search with search.beam over paths.in (file, or directory ->
// test.jsonl) using paths.checkpoint (file, or directory -> best.bin).
// Writes predictions.jsonl.
std::vector<eval::PredictionRecord> predict(const RunConfig &config);

// paths.in: predictions file; paths.data: labelled dataset; paths.train
// (optional): training set for extrapolation counts. Records carrying
// "repeat" are scored per repeat and pooled. Writes report.json.
nlohmann::ordered_json evaluate(const RunConfig &config);

struct OracleSummary {
  std::size_t graphs = 0;
  std::size_t mismatches = 0;
  std::vector<std::string> details;  // first few mismatches
};
// Saturating beam vs exhaustive top-k on oracle.graphs random graphs with
// fresh random parameters each. Writes oracle.json when paths.out is set.
OracleSummary oracle_check(const RunConfig &config);

// baseline.kind sim or bond. Training set from paths.train (or
// <paths.in>/train.jsonl), test set from paths.in (file or directory ->
// test.jsonl). Writes predictions.jsonl and report.json.
nlohmann::ordered_json baseline(const RunConfig &config);

}  // namespace rcs::cli
