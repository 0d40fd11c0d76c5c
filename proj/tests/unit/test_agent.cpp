#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rcsearch/agent/agent.hpp"
#include "rcsearch/error.hpp"
#include "rcsearch/eval/data.hpp"
#include "rcsearch/mol/smiles.hpp"
#include "rcsearch/tensor/checkpoint.hpp"

using namespace rcs;
using namespace rcs::agent;

namespace {

model::EncoderConfig tiny() { return model::EncoderConfig{2, 2, 8, true}; }

std::vector<mol::Sample> small_corpus(std::size_t n, std::uint64_t seed) {
  eval::GeneratorConfig gc;
  gc.count = n;
  gc.seed = seed;
  return eval::generate_synthetic_dataset(gc);
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("rcs_agent_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("bellman: formula examples") {
  CHECK(bellman_target(1.0, true, 123.0, 0.99, TargetMode::kStandard) == 1.0);
  CHECK(bellman_target(1.0, true, 123.0, 0.99, TargetMode::kPaperLiteral) == 1.0);
  CHECK(bellman_target(0.0, false, 2.0, 0.5, TargetMode::kStandard) == doctest::Approx(1.0));
  CHECK(bellman_target(0.0, false, 2.0, 0.5, TargetMode::kPaperLiteral) == doctest::Approx(2.0));
  CHECK(bellman_target(1.0, false, 2.0, 0.5, TargetMode::kStandard) == doctest::Approx(2.0));
  CHECK(bellman_target(1.0, false, 2.0, 0.5, TargetMode::kPaperLiteral) == doctest::Approx(2.5));
  CHECK(parse_target_mode("paper-literal") == TargetMode::kPaperLiteral);
  CHECK_THROWS_AS(parse_target_mode("double"), Error);
}

TEST_CASE("bellman: max over the next state's legal actions") {
  const model::QNetwork net(tiny());
  const auto store = net.create_parameters(3);
  const mol::MolGraph g = mol::parse_smiles("CC(=O)OCC");
  const auto prep = model::prepare_graph(g, true);
  const model::GraphQ q(net, store, prep);

  Transition t;
  t.selected = {1};
  t.step = 1;
  t.action = Action::select(2);
  t.next_selected = {1, 2};
  t.next_step = 2;
  double best = -INFINITY;
  for (Action a : env::legal_actions(g, t.next_selected)) best = std::max(best, q.q_value(t.next_selected, a));
  CHECK(bellman_target(t, q, g, 0.9, TargetMode::kStandard, true) == doctest::Approx(0.9 * best).epsilon(1e-12));
  t.reward = 0.25;
  CHECK(bellman_target(t, q, g, 0.9, TargetMode::kPaperLiteral, true) ==
        doctest::Approx(0.9 * 0.25 + best).epsilon(1e-12));
  t.terminal = true;
  CHECK(bellman_target(t, q, g, 0.9, TargetMode::kStandard, true) == 0.25);
  t.terminal = false;
  t.dead_end = true;
  CHECK(bellman_target(t, q, g, 0.9, TargetMode::kStandard, true) == 0.25);
}

TEST_CASE("epsilon-greedy: uniform exploration") {
  const model::QNetwork net(tiny());
  const auto store = net.create_parameters(4);
  const mol::MolGraph g = mol::parse_smiles("CC(C)C(=O)NC1CCCC1");
  const auto prep = model::prepare_graph(g, true);
  const model::GraphQ q(net, store, prep);
  const mol::NodeSet sel = {3};
  const auto actions = env::legal_actions(g, sel);
  REQUIRE(actions.size() >= 4);

  Rng rng(11);
  const int draws = 10000;
  std::map<Action, int> freq;
  for (int i = 0; i < draws; ++i) ++freq[act_epsilon_greedy(q, g, sel, 1.0, rng)];
  const double m = static_cast<double>(actions.size());
  const double p = 1.0 / m;
  const double mean = draws * p, sigma = std::sqrt(draws * p * (1 - p));
  double chi2 = 0.0;
  for (Action a : actions) {
    const double c = freq[a];
    CHECK(std::abs(c - mean) <= 3 * sigma);
    chi2 += (c - mean) * (c - mean) / mean;
  }
  CHECK(freq.size() == actions.size());
  // chi-square, m-1 dof: mean m-1, sd sqrt(2(m-1)).
  CHECK(chi2 <= (m - 1) + 3 * std::sqrt(2 * (m - 1)));
}

TEST_CASE("epsilon-greedy: argmax, ties and bias shift") {
  const model::QNetwork net(tiny());
  auto store = net.create_parameters(5);
  const mol::MolGraph g = mol::parse_smiles("OCC(N)CC=O");
  const auto prep = model::prepare_graph(g, true);
  Rng rng(1);

  const std::vector<mol::NodeSet> states = {{}, {2}, {2, 3}, {1, 2, 3}};
  std::vector<Action> chosen;
  {
    const model::GraphQ q(net, store, prep);
    for (const auto &s : states) {
      const Action a = act_epsilon_greedy(q, g, s, 0.0, rng);
      const auto legal = env::legal_actions(g, s);
      std::vector<double> v;
      q.q_values(s, legal, v);
      CHECK(a == legal[static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin())]);
      chosen.push_back(a);
    }
  }
  // A constant shift of every output leaves the argmax alone.
  const std::size_t bias = net.q_layer(2).bias();
  store[bias].value[0] += 7.5;
  {
    const model::GraphQ q(net, store, prep);
    for (std::size_t i = 0; i < states.size(); ++i) CHECK(act_epsilon_greedy(q, g, states[i], 0.0, rng) == chosen[i]);
  }
  // Zero last layer: all Q equal, first legal action wins.
  const std::size_t w = net.q_layer(2).weight();
  store[w].value.fill(0.0);
  const model::GraphQ flat(net, store, prep);
  CHECK(act_epsilon_greedy(flat, g, {}, 0.0, rng) == Action::select(0));
  CHECK(act_epsilon_greedy(flat, g, {2, 3}, 0.0, rng) == Action::select(1));
  CHECK(act_epsilon_greedy(flat, g, {0, 1, 2, 3, 4, 5, 6}, 0.0, rng) == Action::stop());
}

TEST_CASE("replay: ring, distinct batches, uniform slots") {
  ReplayBuffer buf(50);
  Rng rng(8);
  CHECK_THROWS_AS(buf.sample_indices(1, rng), Error);
  for (int i = 0; i < 80; ++i) {
    Transition t;
    t.step = i;
    buf.push(t);
  }
  CHECK(buf.size() == 50);
  int lo = 1000, hi = -1;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    lo = std::min(lo, buf[i].step);
    hi = std::max(hi, buf[i].step);
  }
  CHECK(lo == 30);
  CHECK(hi == 79);
  CHECK_THROWS_AS(buf.sample_indices(51, rng), Error);

  const std::size_t batch = 10, rounds = 10000;
  std::vector<int> count(50, 0);
  for (std::size_t r = 0; r < rounds; ++r) {
    auto idx = buf.sample_indices(batch, rng);
    REQUIRE(idx.size() == batch);
    std::sort(idx.begin(), idx.end());
    CHECK(std::adjacent_find(idx.begin(), idx.end()) == idx.end());
    for (std::size_t i : idx) ++count[i];
  }
  const double p = static_cast<double>(batch) / 50.0;
  const double mean = rounds * p, sigma = std::sqrt(rounds * p * (1 - p));
  for (int c : count) CHECK(std::abs(c - mean) <= 3 * sigma);
}

TEST_CASE("train config: defaults, schedule, validation") {
  TrainConfig c;
  CHECK(c.gamma == 0.99);
  CHECK(c.total_iterations == 100000);
  CHECK(c.imitation_iterations == 10000);
  CHECK(c.target_sync_period == 1000);
  CHECK(c.checkpoint_period == 1000);
  CHECK(c.epsilon_at(1) == 1.0);
  CHECK(c.epsilon_at(10000) == 1.0);
  CHECK(c.epsilon_at(35000) == doctest::Approx(0.525));
  CHECK(c.epsilon_at(60000) == 0.05);
  CHECK(c.epsilon_at(90000) == 0.05);
  c.validate();
  auto bad = c;
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.imitation_iterations = c.total_iterations + 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.replay_capacity = 4;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("log record: schema") {
  const LogRecord a{100, 0.5, 0.75, 42, std::nullopt};
  const auto ja = nlohmann::json::parse(a.to_json_line());
  CHECK(ja["iter"] == 100);
  CHECK(ja["loss"] == 0.5);
  CHECK(ja["eps"] == 0.75);
  CHECK(ja["buffer"] == 42);
  CHECK(ja["val_top1"].is_null());
  CHECK(ja.size() == 5);
  const LogRecord b{200, 0.1, 0.5, 7, 0.25};
  CHECK(nlohmann::json::parse(b.to_json_line())["val_top1"] == 0.25);
}

TEST_CASE("imitation: ground truth plus counterfactuals with exact targets") {
  const auto data = small_corpus(6, 21);
  const model::QNetwork net(tiny());
  auto store = net.create_parameters(1);
  TrainConfig cfg;
  cfg.batch_size = 4;
  for (bool counterfactuals : {false, true}) {
    cfg.imitation_counterfactuals = counterfactuals;
    Trainer tr(net, store, cfg, data, 2);
    for (std::size_t i = 0; i < data.size(); ++i) REQUIRE(tr.push_imitation_episode(i));
    std::size_t successes = 0;
    for (std::size_t i = 0; i < tr.buffer().size(); ++i) {
      const Transition &t = tr.buffer()[i];
      const mol::NodeSet &label = data[t.graph].rc;
      CHECK(mol::is_connected_subset(data[t.graph].product, t.next_selected));
      if (t.dead_end) {
        CHECK(counterfactuals);
        CHECK(!std::includes(label.begin(), label.end(), t.next_selected.begin(), t.next_selected.end()));
        CHECK(t.reward == 0.0);
      }
      if (t.terminal && t.reward == 1.0) ++successes;
      if (t.terminal && t.next_selected != label) CHECK(t.reward == 0.0);
    }
    // Labels below the whole graph end with STOP; each episode has one success.
    CHECK(successes == data.size());
  }
  mol::Sample broken = data[0];
  broken.rc = {broken.rc.front()};
  for (int v = 0; v < broken.product.num_atoms(); ++v) {
    if (!mol::is_connected_subset(broken.product, {broken.rc.front(), v}) && v != broken.rc.front()) {
      broken.rc = mol::make_node_set({broken.rc.front(), v});
      break;
    }
  }
  REQUIRE(!mol::is_connected_subset(broken.product, broken.rc));
  const std::vector<mol::Sample> one = {broken};
  Trainer tr(net, store, cfg, one, 2);
  CHECK(!tr.push_imitation_episode(0));
  CHECK(tr.buffer().size() == 0);
}

TEST_CASE("train_step: targets are constants") {
  const auto data = small_corpus(3, 5);
  const model::QNetwork net(tiny());
  auto store = net.create_parameters(7);
  TrainConfig cfg;
  cfg.batch_size = 1;
  cfg.replay_capacity = 1;
  Trainer tr(net, store, cfg, data, 1);
  CHECK_THROWS_AS(tr.train_step(), Error);

  // Prediction equal to the target: zero loss, zero gradient, no movement.
  const mol::NodeSet sel = {data[1].rc.front()};
  const auto prep = model::prepare_graph(data[1].product, true);
  const model::PreparedGraph *ptr = &prep;
  const auto batch = model::GraphBatch::build({&ptr, 1});
  tensor::Tape tape;
  const auto enc = net.encoder().forward(tape, store, batch);
  const model::QNetwork::Query query{0, &sel, Action::stop()};
  const double current = net.q_values(tape, store, batch, enc, {&query, 1}).value()[0];

  Transition t;
  t.graph = 1;
  t.selected = sel;
  t.step = 1;
  t.action = Action::stop();
  t.reward = current;
  t.next_selected = sel;
  t.next_step = 2;
  t.terminal = true;
  tr.buffer().push(t);
  const tensor::ParameterStore before = store;
  CHECK(tr.train_step() == 0.0);
  for (std::size_t i = 0; i < store.size(); ++i) CHECK(store[i].value == before[i].value);

  // Detached copy of the prediction as target: every gradient is exactly 0.
  tensor::Tape t2;
  const auto enc2 = net.encoder().forward(t2, store, batch);
  const auto q = net.q_values(t2, store, batch, enc2, {&query, 1});
  t2.backward(tensor::squared_error(q, t2.constant(q.value())));
  for (std::size_t i = 0; i < store.size(); ++i) {
    for (double g : store[i].grad.storage()) CHECK(g == 0.0);
  }
}

TEST_CASE("train_step: overfitting one transition lowers the loss") {
  const auto data = small_corpus(3, 6);
  const model::QNetwork net(tiny());
  auto store = net.create_parameters(8);
  TrainConfig cfg;
  cfg.batch_size = 1;
  cfg.replay_capacity = 1;
  cfg.adam.learning_rate = 1e-4;
  Trainer tr(net, store, cfg, data, 1);
  Transition t;
  t.graph = 0;
  t.selected = {data[0].rc.front()};
  t.step = 1;
  t.action = Action::stop();
  t.reward = 1.0;
  t.next_selected = t.selected;
  t.next_step = 2;
  t.terminal = true;
  tr.buffer().push(t);
  std::vector<double> losses;
  for (int i = 0; i < 200; ++i) losses.push_back(tr.train_step());
  int increases = 0;
  for (std::size_t i = 1; i < losses.size(); ++i) increases += losses[i] > losses[i - 1];
  CHECK(increases == 0);
  CHECK(losses.back() < 0.01 * losses.front());
}

TEST_CASE("training run: deterministic, logged, checkpointed") {
  const auto data = small_corpus(12, 9);
  const std::span<const mol::Sample> train(data.data(), 8), val(data.data() + 8, 4);
  const model::QNetwork net(tiny());
  TrainConfig cfg;
  cfg.total_iterations = 60;
  cfg.imitation_iterations = 20;
  cfg.epsilon_decay_begin = 20;
  cfg.epsilon_decay_end = 50;
  cfg.batch_size = 8;
  cfg.replay_capacity = 200;
  cfg.target_sync_period = 10;
  cfg.checkpoint_period = 20;
  cfg.log_period = 10;

  std::vector<std::filesystem::path> dirs = {scratch("run_a"), scratch("run_b")};
  std::vector<TrainResult> results;
  for (const auto &dir : dirs) {
    auto store = net.create_parameters(3);
    Trainer tr(net, store, cfg, train, 17);
    results.push_back(tr.run(val, dir));
  }
  for (const char *f : {"checkpoints/ckpt_20.bin", "checkpoints/ckpt_40.bin", "checkpoints/ckpt_60.bin", "best.bin",
                        "final.bin", "train_log.jsonl"}) {
    CAPTURE(f);
    REQUIRE(std::filesystem::exists(dirs[0] / f));
    CHECK(slurp(dirs[0] / f) == slurp(dirs[1] / f));
  }
  const auto &log = results[0].log;
  REQUIRE(log.size() == 6);
  for (std::size_t i = 0; i < log.size(); ++i) {
    CHECK(log[i].iteration == static_cast<std::int64_t>(10 * (i + 1)));
    CHECK(log[i].val_top1.has_value() == (log[i].iteration % 20 == 0));
  }
  CHECK(log[0].epsilon == 1.0);
  CHECK(log.back().epsilon == cfg.epsilon_end);
  CHECK(results[0].best_iteration > 0);

  // Checkpoints round-trip to identical bytes through a fresh layout.
  auto loaded = net.layout();
  tensor::load_checkpoint(dirs[0] / "final.bin", loaded);
  const auto again = scratch("again.bin");
  tensor::save_checkpoint(loaded, again);
  CHECK(slurp(again) == slurp(dirs[0] / "final.bin"));
  auto wrong = model::QNetwork(model::EncoderConfig{2, 2, 16, true}).layout();
  try {
    tensor::load_checkpoint(dirs[0] / "final.bin", wrong);
    FAIL("expected a version mismatch");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kVersionMismatch);
  }
}
