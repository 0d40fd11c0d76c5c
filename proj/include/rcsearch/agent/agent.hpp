#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcsearch/env/env.hpp"
#include "rcsearch/model/qnet.hpp"
#include "rcsearch/mol/dataset.hpp"
#include "rcsearch/random.hpp"

namespace rcs::agent {

using env::Action;
using env::Transition;

enum class TargetMode { kStandard, kPaperLiteral };

const char *target_mode_name(TargetMode mode);
TargetMode parse_target_mode(const std::string &name);  // Error(kInvalidConfig)

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition &operator[](std::size_t i) const { return items_[i]; }

  // `count` distinct slots, uniformly. Throws Error(kBufferTooSmall).
  std::vector<std::size_t> sample_indices(std::size_t count, Rng &rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

// y for one transition given max_a' Q(s', a') (ignored when terminal).
double bellman_target(double reward, bool terminal, double max_next_q, double gamma, TargetMode mode);

// Same, evaluating the max over s' legal actions with `target`.
double bellman_target(const Transition &t, const model::GraphQ &target, const mol::MolGraph &g, double gamma,
                      TargetMode mode, bool one_hop);

// Uniform over legal actions with probability epsilon, otherwise the first
// maximum of Q in legal-action order.
Action act_epsilon_greedy(const model::GraphQ &q, const mol::MolGraph &g, const mol::NodeSet &selected,
                          double epsilon, Rng &rng, bool one_hop = true);

struct TrainConfig {
  double gamma = 0.99;
  std::int64_t total_iterations = 100000;
  std::int64_t imitation_iterations = 10000;
  std::size_t batch_size = 32;
  std::size_t replay_capacity = 100000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::int64_t epsilon_decay_begin = 10000;
  std::int64_t epsilon_decay_end = 60000;
  // 0 bootstraps from the online parameters.
  std::int64_t target_sync_period = 1000;
  TargetMode target_mode = TargetMode::kStandard;
  std::int64_t checkpoint_period = 1000;
  std::int64_t log_period = 100;
  bool one_hop = true;
  // Imitation episodes also push, per ground-truth state, a premature STOP
  // and one off-label selection, both with exact targets.
  bool imitation_counterfactuals = true;
  // Validation samples scored at each checkpoint (0 = all).
  std::size_t validation_limit = 0;
  tensor::AdamConfig adam;

  void validate() const;
  double epsilon_at(std::int64_t iteration) const;
};

struct LogRecord {
  std::int64_t iteration = 0;
  double loss = 0.0;
  double epsilon = 0.0;
  std::size_t buffer = 0;
  std::optional<double> val_top1;

  std::string to_json_line() const;
};

struct TrainResult {
  std::vector<LogRecord> log;
  std::int64_t best_iteration = -1;
  double best_val_top1 = -1.0;
  std::size_t skipped_unreachable = 0;
  // Parameters at the best checkpoint (values and optimizer state).
  tensor::ParameterStore best_parameters;
};

// Greedy top-1 exact match of `store` over samples (disconnected labels
// count as misses).
double greedy_top1(const model::QNetwork &net, const tensor::ParameterStore &store,
                   std::span<const mol::Sample> samples, bool one_hop, std::size_t limit = 0);

class Trainer {
 public:
  Trainer(const model::QNetwork &net, tensor::ParameterStore &online, const TrainConfig &config,
          std::span<const mol::Sample> train, std::uint64_t seed);

  ReplayBuffer &buffer() { return buffer_; }
  const tensor::ParameterStore &target() const { return target_; }
  void sync_target() { target_.copy_values_from(online_); }

  // Pushes one ground-truth episode of train sample `index`. Returns false
  // for a label the one-hop agent cannot reach.
  bool push_imitation_episode(std::size_t index);
  // Runs one epsilon-greedy episode on train sample `index` with the online
  // parameters and pushes its transitions.
  void push_self_play_episode(std::size_t index, double epsilon);

  // One minibatch update; returns the batch loss. Error(kBufferTooSmall).
  double train_step();

  // Full schedule. `out_dir` receives checkpoints and train_log.jsonl when
  // non-empty; `validation` drives best-checkpoint selection.
  TrainResult run(std::span<const mol::Sample> validation, const std::filesystem::path &out_dir);

 private:
  const model::QNetwork &net_;
  tensor::ParameterStore &online_;
  tensor::ParameterStore target_;
  TrainConfig config_;
  std::span<const mol::Sample> train_;
  std::vector<model::PreparedGraph> prepared_;
  ReplayBuffer buffer_;
  Rng rng_;
};

}  // namespace rcs::agent
