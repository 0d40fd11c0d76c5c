#include "rcsearch/tensor/tape.hpp"

#include "rcsearch/error.hpp"

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace rcs::tensor {
namespace {

// Every forward pass allocates and frees many large matrices. glibc's
// defaults hand those back to the kernel each time (mmap + page faults),
// which cost more than the arithmetic.
[[maybe_unused]] const bool kAllocatorTuned = [] {
#ifdef __GLIBC__
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
  return true;
}();

}  // namespace

const Matrix &Var::value() const { return tape_->value(*this); }
bool Var::requires_grad() const { return tape_->requires_grad(*this); }

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::param(ParameterStore &store, std::size_t index) {
  const auto key = std::make_pair(static_cast<const ParameterStore *>(&store), index);
  if (const auto it = param_leaves_.find(key); it != param_leaves_.end()) return Var(this, it->second);
  Node n;
  n.external = &store[index].value;
  n.requires_grad = record_;
  n.store = &store;
  n.param_index = index;
  nodes_.push_back(std::move(n));
  const auto id = static_cast<std::uint32_t>(nodes_.size() - 1);
  param_leaves_.emplace(key, id);
  return Var(this, id);
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var &v : inputs) n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
    if (n.requires_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::record(Matrix value, const std::vector<Var> &inputs, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var &v : inputs) n.requires_grad = n.requires_grad || nodes_[v.id()].requires_grad;
    if (n.requires_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

const Matrix &Tape::value(Var v) const {
  const Node &n = nodes_[v.id()];
  return n.external != nullptr ? *n.external : n.value;
}

Matrix *Tape::grad_slot(Var v) {
  Node &n = nodes_[v.id()];
  if (!n.requires_grad) return nullptr;
  if (n.grad.empty()) {
    const Shape &s = value(v).shape();
    n.grad = Matrix(s.rows, s.cols);
  }
  return &n.grad;
}

void Tape::backward(Var loss) {
  const Shape &s = value(loss).shape();
  if (s.rows != 1 || s.cols != 1) {
    throw Error(ErrorCode::kNotScalarLoss, "loss has shape " + s.to_string());
  }
  Matrix *seed = grad_slot(loss);
  if (seed == nullptr) return;  // nothing depends on parameters
  (*seed)[0] += 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node &n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      // Callbacks only touch input slots (lower ids); nodes_ never grows here.
      n.backward(*this, n.grad);
    } else if (n.store != nullptr) {
      (*n.store)[n.param_index].grad += n.grad;
    }
  }
}

}  // namespace rcs::tensor
