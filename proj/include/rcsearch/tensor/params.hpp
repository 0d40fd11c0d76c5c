#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rcsearch/random.hpp"
#include "rcsearch/tensor/matrix.hpp"

namespace rcs::tensor {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
};

// Named learnable tensors plus optimizer state. Modules keep indices into a
// store, so copying a store (e.g. for a target network) yields an
// independent, fully usable snapshot.
class ParameterStore {
 public:
  // Registers a zero-initialised parameter; names must be unique.
  std::size_t add(const std::string &name, std::size_t rows, std::size_t cols);

  Parameter &operator[](std::size_t i) { return params_[i]; }
  const Parameter &operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  std::vector<Parameter> &all() { return params_; }
  const std::vector<Parameter> &all() const { return params_; }

  // Index by name; throws Error(kInvalidConfig) if missing.
  std::size_t index_of(const std::string &name) const;
  bool contains(const std::string &name) const { return index_.count(name) > 0; }

  std::size_t scalar_count() const;

  void zero_grad();
  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }

  // Copies parameter values (not optimizer state) from a store with the
  // same layout.
  void copy_values_from(const ParameterStore &other);

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t step_ = 0;
};

// Rounds a value to the nearest float so that checkpoints (32-bit payload)
// reproduce parameters exactly.
inline double to_storage_precision(double v) { return static_cast<double>(static_cast<float>(v)); }

void init_glorot_uniform(Matrix &m, Rng &rng);
void init_normal(Matrix &m, Rng &rng, double stddev);

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// One bias-corrected Adam update over every parameter, then zero grads.
void adam_step(ParameterStore &store, const AdamConfig &config);

}  // namespace rcs::tensor
