#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcsearch/eval/metrics.hpp"

namespace rcs::eval {

// One line of a prediction file:
// {"id", "predictions": [{"nodes", "score"}], "k"} plus "repeat" for
// randomized baselines.
struct PredictionRecord {
  SamplePrediction sample;
  std::size_t k = 0;
  std::optional<int> repeat;
};

std::string prediction_to_json_line(const PredictionRecord &record);
// Throws Error(kMalformedRecord).
PredictionRecord prediction_from_json_line(const std::string &line, std::size_t line_number = 0);

void save_predictions(std::span<const PredictionRecord> records, const std::filesystem::path &path);
// Throws Error(kIoError) / Error(kMalformedRecord).
std::vector<PredictionRecord> load_predictions(const std::filesystem::path &path);

}  // namespace rcs::eval
