#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "rcsearch/cli/workflows.hpp"
#include "rcsearch/error.hpp"

using namespace rcs;

namespace {

struct Flags {
  std::string config, in, out, checkpoint, data, train, mode, kind;
  std::optional<std::size_t> beam;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void add_common(CLI::App *cmd, Flags &f) {
  cmd->add_option("--config", f.config, "RunConfig JSON; flags override its fields")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "root seed");
  cmd->add_option("--workers", f.workers, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", f.out, "output directory");
}

cli::RunConfig resolve(const Flags &f) {
  cli::RunConfig c = f.config.empty() ? cli::RunConfig{} : cli::RunConfig::load(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.workers) c.workers = *f.workers;
  if (f.beam) c.search.beam = *f.beam;
  if (!f.mode.empty()) c.train.target_mode = agent::parse_target_mode(f.mode);
  if (!f.kind.empty()) c.baseline.kind = f.kind;
  if (!f.in.empty()) c.paths.in = f.in;
  if (!f.out.empty()) c.paths.out = f.out;
  if (!f.checkpoint.empty()) c.paths.checkpoint = f.checkpoint;
  if (!f.data.empty()) c.paths.data = f.data;
  if (!f.train.empty()) c.paths.train = f.train;
  c.validate();
  cli::apply_workers(c);
  return c;
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kMalformedRecord:
    case ErrorCode::kSchemaVersionMismatch:
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kInvalidNodeId:
    case ErrorCode::kInvalidGraph:
    case ErrorCode::kUnknownElement:
      return true;
    default:
      return false;
  }
}

void print_report(const nlohmann::ordered_json &r) {
  std::cout << "top1 " << r.at("top1").get<double>() << "  top2 " << r.at("top2").get<double>() << "  top3 "
            << r.at("top3").get<double>() << "  top4 " << r.at("top4").get<double>() << "  (n="
            << r.at("n").get<std::size_t>() << ")\n";
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Reaction-center search: data generation, training, inference and evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::version_string());
  Flags f;

  auto *gen = app.add_subcommand("gen-data", "generate the synthetic dataset and its split");
  add_common(gen, f);

  auto *train = app.add_subcommand("train", "train the Q-network");
  add_common(train, f);
  train->add_option("--in", f.in, "gen-data directory or training JSONL");
  train->add_option("--data", f.data, "validation JSONL when --in is a file");
  train->add_option("--mode", f.mode, "Bellman target form")->check(CLI::IsMember({"standard", "paper-literal"}));

  auto *predict = app.add_subcommand("predict", "beam-search predictions for a dataset");
  add_common(predict, f);
  predict->add_option("--in", f.in, "dataset JSONL or directory (test.jsonl)");
  predict->add_option("--checkpoint", f.checkpoint, "checkpoint file or training directory (best.bin)");
  predict->add_option("--beam", f.beam, "beam size k")->check(CLI::PositiveNumber);

  auto *evaluate = app.add_subcommand("evaluate", "score predictions against labels");
  add_common(evaluate, f);
  evaluate->add_option("--in", f.in, "prediction JSONL or directory");
  evaluate->add_option("--data", f.data, "labelled dataset JSONL or directory (test.jsonl)");
  evaluate->add_option("--train", f.train, "training set for extrapolation counts");

  auto *oracle = app.add_subcommand("oracle-check", "saturating beam vs exhaustive enumeration");
  add_common(oracle, f);

  auto *base = app.add_subcommand("baseline", "similarity or bond-classifier baseline");
  add_common(base, f);
  base->add_option("--kind", f.kind, "sim or bond")->check(CLI::IsMember({"sim", "bond"}));
  base->add_option("--in", f.in, "test JSONL or gen-data directory");
  base->add_option("--train", f.train, "training JSONL (default: <in>/train.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const cli::RunConfig c = resolve(f);
    if (gen->parsed()) {
      const auto s = cli::gen_data(c);
      std::cout << "wrote " << s.samples << " samples (" << s.train << " train / " << s.val << " val / " << s.test
                << " test) to " << c.paths.out << '\n';
    } else if (train->parsed()) {
      const auto r = cli::train(c);
      std::cout << "best checkpoint at iteration " << r.best_iteration << ", val top-1 " << r.best_val_top1 << '\n';
    } else if (predict->parsed()) {
      const auto records = cli::predict(c);
      std::cout << "wrote " << records.size() << " predictions to " << c.paths.out << "/predictions.jsonl\n";
    } else if (evaluate->parsed()) {
      print_report(cli::evaluate(c));
    } else if (oracle->parsed()) {
      const auto s = cli::oracle_check(c);
      for (const auto &d : s.details) std::cerr << "mismatch: " << d << '\n';
      std::cout << s.graphs - s.mismatches << "/" << s.graphs << " graphs agree\n";
      if (s.mismatches > 0) return 2;
    } else if (base->parsed()) {
      print_report(cli::baseline(c));
    }
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
