#pragma once

#include "rcsearch/tensor/matrix.hpp"

// Hot loops of the autodiff engine. `serial` holds straightforward reference
// loops kept for testing; `parallel` holds the cache-friendly OpenMP versions
// the ops dispatch to. Each output element is produced by exactly one thread
// with a fixed summation order, so parallel results do not depend on the
// thread count.
namespace rcs::tensor::kernels {

namespace serial {
void matmul(const Matrix &a, const Matrix &b, Matrix &out);          // out = a b
void matmul_at_b_add(const Matrix &a, const Matrix &g, Matrix &out);  // out += a^T g
void matmul_a_bt_add(const Matrix &g, const Matrix &b, Matrix &out);  // out += g b^T
void segment_softmax(const Matrix &logits, const Segments &segs, Matrix &out);
void segment_sum(const Matrix &x, const Segments &segs, Matrix &out);
}  // namespace serial

namespace parallel {
void matmul(const Matrix &a, const Matrix &b, Matrix &out);
void matmul_at_b_add(const Matrix &a, const Matrix &g, Matrix &out);
void matmul_a_bt_add(const Matrix &g, const Matrix &b, Matrix &out);
void segment_softmax(const Matrix &logits, const Segments &segs, Matrix &out);
void segment_sum(const Matrix &x, const Segments &segs, Matrix &out);
}  // namespace parallel

using parallel::matmul;
using parallel::matmul_a_bt_add;
using parallel::matmul_at_b_add;
using parallel::segment_softmax;
using parallel::segment_sum;

// Threads available to the parallel kernels (1 without OpenMP).
int max_threads();

}  // namespace rcs::tensor::kernels
