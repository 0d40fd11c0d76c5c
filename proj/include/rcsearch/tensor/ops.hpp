#pragma once

#include <span>
#include <vector>

#include "rcsearch/tensor/tape.hpp"

// Differentiable primitives. Every op records its provenance on the inputs'
// tape and throws Error(kShapeMismatch) with both shapes on bad input.
namespace rcs::tensor {

Var matmul(Var a, Var b);
Var transpose(Var a);

// Same shape, or b a 1xC row broadcast over a's rows.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise, same shape
Var scale(Var a, double factor);

// axis 0 stacks rows, axis 1 joins columns.
Var concat(const std::vector<Var> &parts, int axis);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var gather_rows(Var a, std::span<const int> rows);
// out[i,:] = a[i,:] * weights[i]; weights is Nx1.
Var scale_rows(Var a, Var weights);

Var leaky_relu(Var a, double slope = 0.2);
Var elu(Var a, double alpha = 1.0);
Var abs(Var a);

// Softmax of an Nx1 column within each segment. Throws Error(kEmptySegment).
Var segment_softmax(Var logits, const Segments &segs);
Var segment_sum(Var a, const Segments &segs);
// Mean per segment; an empty segment yields a zero row.
Var segment_mean(Var a, const Segments &segs);

Var mean_rows(Var a);  // 1xC
Var sum_all(Var a);    // 1x1
Var mean_all(Var a);   // 1x1

// mean((pred - target)^2) as 1x1.
Var squared_error(Var pred, Var target);
// Mean binary cross-entropy of logits against 0/1 targets (same shape).
Var bce_with_logits(Var logits, Var targets);
// Mean softmax cross-entropy; one row of class logits per label.
Var softmax_cross_entropy(Var logits, std::span<const int> labels);

}  // namespace rcs::tensor
