#include "rcsearch/tensor/params.hpp"

#include <cmath>

#include "rcsearch/error.hpp"

namespace rcs::tensor {

std::size_t ParameterStore::add(const std::string &name, std::size_t rows, std::size_t cols) {
  if (index_.count(name) != 0) throw Error(ErrorCode::kInvalidConfig, "duplicate parameter " + name);
  Parameter p;
  p.name = name;
  p.value = Matrix(rows, cols);
  p.grad = Matrix(rows, cols);
  p.adam_m = Matrix(rows, cols);
  p.adam_v = Matrix(rows, cols);
  params_.push_back(std::move(p));
  index_.emplace(name, params_.size() - 1);
  return params_.size() - 1;
}

std::size_t ParameterStore::index_of(const std::string &name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorCode::kInvalidConfig, "unknown parameter " + name);
  return it->second;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto &p : params_) n += p.value.size();
  return n;
}

void ParameterStore::zero_grad() {
  for (auto &p : params_) p.grad.fill(0.0);
}

void ParameterStore::copy_values_from(const ParameterStore &other) {
  if (other.size() != size()) throw Error(ErrorCode::kShapeMismatch, "parameter store layouts differ");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].value.shape() != other[i].value.shape()) {
      throw Error(ErrorCode::kShapeMismatch, "parameter " + params_[i].name + " " +
                                                 params_[i].value.shape().to_string() + " vs " +
                                                 other[i].value.shape().to_string());
    }
    params_[i].value = other[i].value;
  }
}

void init_glorot_uniform(Matrix &m, Rng &rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = to_storage_precision(rng.uniform(-limit, limit));
}

void init_normal(Matrix &m, Rng &rng, double stddev) {
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = to_storage_precision(stddev * rng.normal());
}

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidConfig, "learning rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "Adam betas must lie in (0,1)");
  }
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kInvalidConfig, "Adam epsilon must be > 0");
}

void adam_step(ParameterStore &store, const AdamConfig &config) {
  store.set_step(store.step() + 1);
  const double t = static_cast<double>(store.step());
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  for (Parameter &p : store.all()) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      p.adam_m[i] = config.beta1 * p.adam_m[i] + (1.0 - config.beta1) * g;
      p.adam_v[i] = config.beta2 * p.adam_v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = p.adam_m[i] / correction1;
      const double v_hat = p.adam_v[i] / correction2;
      p.value[i] = to_storage_precision(p.value[i] - config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon));
    }
    p.grad.fill(0.0);
  }
}

}  // namespace rcs::tensor
