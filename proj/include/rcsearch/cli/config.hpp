#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "rcsearch/agent/agent.hpp"
#include "rcsearch/eval/data.hpp"
#include "rcsearch/model/encoder.hpp"

namespace rcs::cli {

struct SearchConfig {
  std::size_t beam = 3;
  bool one_hop = true;
};

struct OracleConfig {
  std::size_t graphs = 100;
  int max_nodes = 10;
};

struct BaselineConfig {
  std::string kind = "sim";  // sim | bond
  std::size_t kmax = 4;
  // sim
  std::size_t repeats = 20;
  int radius = 2;
  std::size_t nbits = 2048;
  // bond classifier (encoder and adam sections are shared)
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  int count_classes = 6;
};

struct PathsConfig {
  std::string in;          // command input (dataset, directory or predictions)
  std::string out;         // output directory
  std::string checkpoint;  // Q-network checkpoint for predict
  std::string data;        // labelled dataset for evaluate
  std::string train;       // training set (evaluate extrapolation, baseline)
};

// Everything a run needs, as one JSON document. Every field has a default;
// unknown keys are errors. All randomness derives from `seed`:
//   derive_seed(seed, "synthetic", i)     generator sample i
//   derive_seed(seed, "split")            train/val/test shuffle
//   derive_seed(seed, "init")             Q-network parameters
//   derive_seed(seed, "train")            replay sampling, exploration
//   derive_seed(seed, "sim")              random picks among matches
//   derive_seed(seed, "bond-classifier-init" / "-train")
//   derive_seed(seed, "oracle", i)        oracle graph i and its parameters
struct RunConfig {
  std::uint64_t seed = 0;
  int workers = 0;  // 0: OpenMP default
  model::EncoderConfig encoder;
  agent::TrainConfig train;  // train.adam is serialised as "adam"
  eval::GeneratorConfig generator;
  // 2000 / 200 / 200 of the default 2400 samples.
  std::array<double, 3> split = {2000.0 / 2400.0, 200.0 / 2400.0, 200.0 / 2400.0};
  SearchConfig search;
  OracleConfig oracle;
  BaselineConfig baseline;
  PathsConfig paths;

  // Throws Error(kInvalidConfig) naming the offending key.
  static RunConfig from_json(const nlohmann::json &j);
  // Throws Error(kIoError) when unreadable, Error(kInvalidConfig) otherwise.
  static RunConfig load(const std::filesystem::path &path);
  nlohmann::ordered_json to_json() const;
  void save(const std::filesystem::path &path) const;

  void validate() const;

  eval::GeneratorConfig generator_config() const;  // seed filled in
};

}  // namespace rcs::cli
