#include "rcsearch/eval/predictions.hpp"

#include <fstream>

#include "rcsearch/error.hpp"

namespace rcs::eval {

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string &what) {
  throw Error(ErrorCode::kMalformedRecord, "prediction line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string prediction_to_json_line(const PredictionRecord &record) {
  nlohmann::ordered_json j;
  j["id"] = record.sample.id;
  nlohmann::ordered_json preds = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < record.sample.predictions.size(); ++i) {
    const double score = i < record.sample.scores.size() ? record.sample.scores[i] : 0.0;
    preds.push_back({{"nodes", record.sample.predictions[i]}, {"score", score}});
  }
  j["predictions"] = std::move(preds);
  j["k"] = record.k;
  if (record.repeat) j["repeat"] = *record.repeat;
  return j.dump();
}

PredictionRecord prediction_from_json_line(const std::string &line, std::size_t line_number) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception &e) {
    malformed(line_number, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) malformed(line_number, "record is not an object");
  for (const char *key : {"id", "predictions", "k"}) {
    if (!j.contains(key)) malformed(line_number, std::string("missing \"") + key + "\"");
  }
  PredictionRecord r;
  try {
    r.sample.id = j.at("id").get<std::string>();
    r.k = j.at("k").get<std::size_t>();
    if (!j.at("predictions").is_array()) malformed(line_number, "\"predictions\" is not an array");
    for (const auto &p : j.at("predictions")) {
      r.sample.predictions.push_back(mol::make_node_set(p.at("nodes").get<std::vector<int>>()));
      r.sample.scores.push_back(p.at("score").get<double>());
    }
    if (j.contains("repeat")) r.repeat = j.at("repeat").get<int>();
  } catch (const nlohmann::json::exception &e) {
    malformed(line_number, e.what());
  }
  return r;
}

void save_predictions(std::span<const PredictionRecord> records, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  for (const PredictionRecord &r : records) out << prediction_to_json_line(r) << '\n';
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<PredictionRecord> load_predictions(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(prediction_from_json_line(line, n));
  }
  return out;
}

}  // namespace rcs::eval
