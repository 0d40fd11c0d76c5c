#include "rcsearch/agent/agent.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <unordered_set>

#include "json.hpp"
#include "rcsearch/error.hpp"
#include "rcsearch/search/search.hpp"
#include "rcsearch/tensor/checkpoint.hpp"

namespace rcs::agent {

using namespace tensor;

const char *target_mode_name(TargetMode mode) {
  return mode == TargetMode::kStandard ? "standard" : "paper-literal";
}

TargetMode parse_target_mode(const std::string &name) {
  if (name == "standard") return TargetMode::kStandard;
  if (name == "paper-literal") return TargetMode::kPaperLiteral;
  throw Error(ErrorCode::kInvalidConfig, "target mode '" + name + "' (expected standard or paper-literal)");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error(ErrorCode::kInvalidConfig, "replay capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, Rng &rng) const {
  if (items_.size() < count) {
    throw Error(ErrorCode::kBufferTooSmall,
                "buffer holds " + std::to_string(items_.size()) + " transitions, batch needs " + std::to_string(count));
  }
  // Floyd's algorithm: distinct indices, uniform over all subsets.
  std::vector<std::size_t> out;
  out.reserve(count);
  std::unordered_set<std::size_t> taken;
  const std::size_t n = items_.size();
  for (std::size_t j = n - count; j < n; ++j) {
    const std::size_t t = rng.uniform_index(j + 1);
    if (taken.insert(t).second) {
      out.push_back(t);
    } else {
      taken.insert(j);
      out.push_back(j);
    }
  }
  return out;
}

double bellman_target(double reward, bool terminal, double max_next_q, double gamma, TargetMode mode) {
  if (terminal) return reward;
  return mode == TargetMode::kStandard ? reward + gamma * max_next_q : gamma * reward + max_next_q;
}

double bellman_target(const Transition &t, const model::GraphQ &target, const mol::MolGraph &g, double gamma,
                      TargetMode mode, bool one_hop) {
  if (t.terminal || t.dead_end) return t.reward;
  const std::vector<Action> actions = env::legal_actions(g, t.next_selected, one_hop);
  std::vector<double> q;
  target.q_values(t.next_selected, actions, q);
  const double best = q.empty() ? 0.0 : *std::max_element(q.begin(), q.end());
  return bellman_target(t.reward, false, best, gamma, mode);
}

Action act_epsilon_greedy(const model::GraphQ &q, const mol::MolGraph &g, const mol::NodeSet &selected,
                          double epsilon, Rng &rng, bool one_hop) {
  const std::vector<Action> actions = env::legal_actions(g, selected, one_hop);
  if (epsilon > 0.0 && rng.uniform() < epsilon) return actions[rng.uniform_index(actions.size())];
  std::vector<double> scores;
  q.q_values(selected, actions, scores);
  return actions[static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin())];
}

void TrainConfig::validate() const {
  auto bad = [](const std::string &msg) { throw Error(ErrorCode::kInvalidConfig, msg); };
  if (!(gamma > 0.0 && gamma <= 1.0)) bad("gamma must be in (0,1]");
  if (total_iterations < 1) bad("total_iterations must be >= 1");
  if (imitation_iterations < 0 || imitation_iterations > total_iterations) {
    bad("imitation_iterations must be in [0, total_iterations]");
  }
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (replay_capacity < batch_size) bad("replay_capacity must be >= batch_size");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 || epsilon_end > 1.0) {
    bad("epsilon values must be in [0,1]");
  }
  if (epsilon_decay_end < epsilon_decay_begin) bad("epsilon_decay_end must be >= epsilon_decay_begin");
  if (target_sync_period < 0) bad("target_sync_period must be >= 0");
  if (checkpoint_period < 1 || log_period < 1) bad("checkpoint_period and log_period must be >= 1");
  adam.validate();
}

double TrainConfig::epsilon_at(std::int64_t iteration) const {
  if (iteration <= epsilon_decay_begin) return epsilon_start;
  if (iteration >= epsilon_decay_end) return epsilon_end;
  const double frac = static_cast<double>(iteration - epsilon_decay_begin) /
                      static_cast<double>(epsilon_decay_end - epsilon_decay_begin);
  return epsilon_start + frac * (epsilon_end - epsilon_start);
}

std::string LogRecord::to_json_line() const {
  nlohmann::ordered_json j;
  j["iter"] = iteration;
  j["loss"] = loss;
  j["eps"] = epsilon;
  j["buffer"] = buffer;
  j["val_top1"] = val_top1 ? nlohmann::ordered_json(*val_top1) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

double greedy_top1(const model::QNetwork &net, const ParameterStore &store, std::span<const mol::Sample> samples,
                   bool one_hop, std::size_t limit) {
  const std::size_t n = limit == 0 ? samples.size() : std::min(limit, samples.size());
  if (n == 0) return 0.0;
  std::vector<char> hit(n, 0);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < count; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const mol::Sample &s = samples[i];
    const model::PreparedGraph p = model::prepare_graph(s.product, net.config().self_loops);
    const model::GraphQ q(net, store, p);
    hit[i] = search::greedy_rollout(q, s.product, one_hop).nodes == s.rc;
  }
  std::size_t hits = 0;
  for (char h : hit) hits += static_cast<std::size_t>(h);
  return static_cast<double>(hits) / static_cast<double>(n);
}

Trainer::Trainer(const model::QNetwork &net, ParameterStore &online, const TrainConfig &config,
                 std::span<const mol::Sample> train, std::uint64_t seed)
    : net_(net),
      online_(online),
      target_(online),
      config_(config),
      train_(train),
      buffer_(config.replay_capacity),
      rng_(derive_seed(seed, "train")) {
  config.validate();
  if (train.empty()) throw Error(ErrorCode::kEmptyTrainSet, "no training samples");
  prepared_.reserve(train.size());
  for (const mol::Sample &s : train) prepared_.push_back(model::prepare_graph(s.product, net.config().self_loops));
}

bool Trainer::push_imitation_episode(std::size_t index) {
  const mol::Sample &s = train_[index];
  if (s.rc.empty() || !mol::is_connected_subset(s.product, s.rc)) return false;
  const env::Environment env(s.product, s.rc, config_.one_hop);
  const auto trajectory = env::ground_truth_trajectory(s.product, s.rc, rng_);
  auto push = [&](const env::State &state, Action a, bool dead_end) {
    const env::StepResult r = env.step(state, a);
    buffer_.push(Transition{index, state.selected, state.step, a, r.reward, r.next.selected, r.next.step, r.terminal,
                            dead_end && !r.terminal});
  };
  for (const auto &[state, action] : trajectory) {
    push(state, action, false);
    if (!config_.imitation_counterfactuals) continue;
    if (state.step > 0 && !action.is_stop()) push(state, Action::stop(), false);
    std::vector<Action> off;
    for (const Action a : env::legal_actions(state, config_.one_hop)) {
      if (!a.is_stop() && !std::binary_search(s.rc.begin(), s.rc.end(), a.node)) off.push_back(a);
    }
    if (!off.empty()) push(state, off[rng_.uniform_index(off.size())], true);
  }
  return true;
}

void Trainer::push_self_play_episode(std::size_t index, double epsilon) {
  const mol::Sample &s = train_[index];
  const env::Environment env(s.product, s.rc, config_.one_hop);
  const model::GraphQ q(net_, online_, prepared_[index]);
  env::State state = env.reset();
  for (;;) {
    const Action a = act_epsilon_greedy(q, s.product, state.selected, epsilon, rng_, config_.one_hop);
    env::StepResult r = env.step(state, a);
    buffer_.push(Transition{index, state.selected, state.step, a, r.reward, r.next.selected, r.next.step, r.terminal});
    if (r.terminal) break;
    state = std::move(r.next);
  }
}

double Trainer::train_step() {
  const std::vector<std::size_t> picks = buffer_.sample_indices(config_.batch_size, rng_);
  std::map<std::size_t, std::size_t> slot;
  std::vector<const model::PreparedGraph *> graphs;
  for (std::size_t i : picks) {
    const std::size_t g = buffer_[i].graph;
    if (slot.emplace(g, graphs.size()).second) graphs.push_back(&prepared_[g]);
  }

  const ParameterStore &bootstrap = config_.target_sync_period > 0 ? target_ : online_;
  std::map<std::size_t, std::unique_ptr<model::GraphQ>> target_q;
  std::vector<double> y;
  y.reserve(picks.size());
  for (std::size_t i : picks) {
    const Transition &t = buffer_[i];
    if (t.terminal || t.dead_end) {
      y.push_back(t.reward);
      continue;
    }
    auto &tq = target_q[t.graph];
    if (!tq) tq = std::make_unique<model::GraphQ>(net_, bootstrap, prepared_[t.graph]);
    y.push_back(bellman_target(t, *tq, train_[t.graph].product, config_.gamma, config_.target_mode, config_.one_hop));
  }

  const model::GraphBatch batch = model::GraphBatch::build(graphs);
  std::vector<model::QNetwork::Query> queries;
  queries.reserve(picks.size());
  for (std::size_t i : picks) {
    const Transition &t = buffer_[i];
    queries.push_back({slot.at(t.graph), &t.selected, t.action});
  }
  Tape tape;
  const model::EncodedBatch enc = net_.encoder().forward(tape, online_, batch);
  const Var q = net_.q_values(tape, online_, batch, enc, queries);
  const std::size_t rows = y.size();
  const Var loss = squared_error(q, tape.constant(Matrix(rows, 1, std::move(y))));
  const double value = loss.value()[0];
  tape.backward(loss);
  adam_step(online_, config_.adam);
  return value;
}

TrainResult Trainer::run(std::span<const mol::Sample> validation, const std::filesystem::path &out_dir) {
  TrainResult result;
  std::vector<std::size_t> reachable;
  for (std::size_t i = 0; i < train_.size(); ++i) {
    if (!train_[i].rc.empty() && mol::is_connected_subset(train_[i].product, train_[i].rc)) {
      reachable.push_back(i);
    }
  }
  result.skipped_unreachable = train_.size() - reachable.size();
  if (config_.imitation_iterations > 0 && reachable.empty()) {
    throw Error(ErrorCode::kEmptyTrainSet, "no training sample has a connected reaction center");
  }

  std::ofstream log;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir / "checkpoints");
    log.open(out_dir / "train_log.jsonl", std::ios::trunc);
    if (!log) throw Error(ErrorCode::kIoError, "cannot write " + (out_dir / "train_log.jsonl").string());
  }

  double window_loss = 0.0;
  std::size_t window_steps = 0;
  for (std::int64_t it = 1; it <= config_.total_iterations; ++it) {
    if (it <= config_.imitation_iterations) {
      push_imitation_episode(reachable[rng_.uniform_index(reachable.size())]);
    } else {
      push_self_play_episode(rng_.uniform_index(train_.size()), config_.epsilon_at(it));
    }
    if (buffer_.size() >= config_.batch_size) {
      window_loss += train_step();
      ++window_steps;
    }
    if (config_.target_sync_period > 0 && it % config_.target_sync_period == 0) sync_target();

    std::optional<double> val;
    if (it % config_.checkpoint_period == 0 || it == config_.total_iterations) {
      if (!out_dir.empty()) {
        save_checkpoint(online_, out_dir / "checkpoints" / ("ckpt_" + std::to_string(it) + ".bin"));
      }
      if (!validation.empty()) {
        val = greedy_top1(net_, online_, validation, config_.one_hop, config_.validation_limit);
      }
      // Ties go to the later checkpoint: same accuracy, more training.
      const double score = val.value_or(0.0);
      if (result.best_iteration < 0 || score >= result.best_val_top1) {
        result.best_iteration = it;
        result.best_val_top1 = score;
        result.best_parameters = online_;
        if (!out_dir.empty()) save_checkpoint(online_, out_dir / "best.bin");
      }
    }
    if (it % config_.log_period == 0 || val || it == config_.total_iterations) {
      LogRecord rec{it, window_steps ? window_loss / static_cast<double>(window_steps) : 0.0, config_.epsilon_at(it),
                    buffer_.size(), val};
      if (log.is_open()) log << rec.to_json_line() << std::endl;
      result.log.push_back(rec);
      window_loss = 0.0;
      window_steps = 0;
    }
  }
  if (!out_dir.empty()) save_checkpoint(online_, out_dir / "final.bin");
  return result;
}

}  // namespace rcs::agent
