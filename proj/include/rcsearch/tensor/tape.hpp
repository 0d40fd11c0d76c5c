#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "rcsearch/tensor/matrix.hpp"
#include "rcsearch/tensor/params.hpp"

namespace rcs::tensor {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape *tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape &tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  const Matrix &value() const;
  const Shape &shape() const { return value().shape(); }
  bool requires_grad() const;
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape *tape_ = nullptr;
  std::uint32_t id_ = 0;
};

// Records the provenance of every value produced by the ops in ops.hpp and
// replays it in reverse for gradients. One tape per forward pass; a tape is
// confined to a single thread. A tape built with record=false keeps values
// only, which is how inference and target-network passes run.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape &, const Matrix &out_grad)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  bool recording() const { return record_; }

  // Value that never receives gradient.
  Var constant(Matrix value);
  // Leaf bound to store[index]; its gradient is added to the parameter's
  // grad slot by backward(). Repeated calls return the same leaf.
  Var param(ParameterStore &store, std::size_t index);

  // Used by ops: records an output whose gradient flows to `inputs`.
  Var record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(Matrix value, const std::vector<Var> &inputs, BackwardFn backward);

  const Matrix &value(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  // Gradient slot of v, zero-initialised on first access; nullptr when v
  // does not require gradient.
  Matrix *grad_slot(Var v);
  // Gradient accumulated so far for v (after backward); empty if none.
  const Matrix &grad(Var v) const { return nodes_[v.id()].grad; }

  // Reverse sweep from a 1x1 loss. Throws Error(kNotScalarLoss).
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix *external = nullptr;  // parameter leaves alias the store
    Matrix grad;
    bool requires_grad = false;
    ParameterStore *store = nullptr;
    std::size_t param_index = 0;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::map<std::pair<const ParameterStore *, std::size_t>, std::uint32_t> param_leaves_;
  bool record_;
};

}  // namespace rcs::tensor
