#include "rcsearch/tensor/ops.hpp"

#include <cmath>
#include <string>

#include "rcsearch/error.hpp"
#include "rcsearch/tensor/kernels.hpp"

namespace rcs::tensor {
namespace {

[[noreturn]] void shape_error(const char *op, const Shape &a, const Shape &b) {
  throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": " + a.to_string() + " vs " + b.to_string());
}

Tape &tape_of(Var a) { return a.tape(); }

template <typename F>
Var unary(Var a, F &&f, std::function<void(Tape &, const Matrix &)> backward) {
  const Matrix &x = a.value();
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return tape_of(a).record(std::move(out), {a}, std::move(backward));
}

}  // namespace

Var matmul(Var a, Var b) {
  const Matrix &x = a.value();
  const Matrix &y = b.value();
  if (x.cols() != y.rows()) shape_error("matmul", x.shape(), y.shape());
  Matrix out;
  kernels::matmul(x, y, out);
  return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) kernels::matmul_a_bt_add(g, t.value(b), *ga);
    if (Matrix *gb = t.grad_slot(b)) kernels::matmul_at_b_add(t.value(a), g, *gb);
  });
}

Var transpose(Var a) {
  const Matrix &x = a.value();
  Matrix out(x.cols(), x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(c, r) = x(r, c);
  }
  return tape_of(a).record(std::move(out), {a}, [a](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) {
      for (std::size_t r = 0; r < ga->rows(); ++r) {
        for (std::size_t c = 0; c < ga->cols(); ++c) (*ga)(r, c) += g(c, r);
      }
    }
  });
}

namespace {

// sign = +1 for add, -1 for sub.
Var add_like(Var a, Var b, double sign, const char *name) {
  const Matrix &x = a.value();
  const Matrix &y = b.value();
  const bool broadcast = y.rows() == 1 && x.rows() != 1 && y.cols() == x.cols();
  if (!(x.shape() == y.shape() || broadcast)) shape_error(name, x.shape(), y.shape());
  Matrix out = x;
  const std::size_t cols = x.cols();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * y[broadcast ? i % cols : i];
  return tape_of(a).record(std::move(out), {a, b}, [a, b, sign, broadcast](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) *ga += g;
    if (Matrix *gb = t.grad_slot(b)) {
      if (broadcast) {
        const std::size_t cols = g.cols();
        for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i % cols] += sign * g[i];
      } else {
        for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += sign * g[i];
      }
    }
  });
}

}  // namespace

Var add(Var a, Var b) { return add_like(a, b, 1.0, "add"); }
Var sub(Var a, Var b) { return add_like(a, b, -1.0, "sub"); }

Var mul(Var a, Var b) {
  const Matrix &x = a.value();
  const Matrix &y = b.value();
  if (x.shape() != y.shape()) shape_error("mul", x.shape(), y.shape());
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return tape_of(a).record(std::move(out), {a, b}, [a, b](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) {
      const Matrix &y = t.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * y[i];
    }
    if (Matrix *gb = t.grad_slot(b)) {
      const Matrix &x = t.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * x[i];
    }
  });
}

Var scale(Var a, double factor) {
  return unary(a, [factor](double v) { return v * factor; }, [a, factor](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += factor * g[i];
    }
  });
}

Var concat(const std::vector<Var> &parts, int axis) {
  if (parts.empty()) throw Error(ErrorCode::kShapeMismatch, "concat of zero tensors");
  const Shape first = parts.front().shape();
  std::size_t rows = 0, cols = 0;
  for (const Var &p : parts) {
    const Shape &s = p.shape();
    if (axis == 0) {
      if (s.cols != first.cols) shape_error("concat(axis=0)", first, s);
      rows += s.rows;
      cols = s.cols;
    } else {
      if (s.rows != first.rows) shape_error("concat(axis=1)", first, s);
      cols += s.cols;
      rows = s.rows;
    }
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Var &p : parts) {
    const Matrix &x = p.value();
    if (axis == 0) {
      std::copy(x.storage().begin(), x.storage().end(), out.data() + offset * cols);
      offset += x.rows();
    } else {
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy(x.row(r).begin(), x.row(r).end(), out.data() + r * cols + offset);
      }
      offset += x.cols();
    }
  }
  return tape_of(parts.front()).record(std::move(out), parts, [parts, axis](Tape &t, const Matrix &g) {
    std::size_t offset = 0;
    for (const Var &p : parts) {
      const Shape &s = t.value(p).shape();
      if (Matrix *gp = t.grad_slot(p)) {
        if (axis == 0) {
          const double *src = g.data() + offset * g.cols();
          for (std::size_t i = 0; i < s.size(); ++i) (*gp)[i] += src[i];
        } else {
          for (std::size_t r = 0; r < s.rows; ++r) {
            for (std::size_t c = 0; c < s.cols; ++c) (*gp)(r, c) += g(r, offset + c);
          }
        }
      }
      offset += axis == 0 ? s.rows : s.cols;
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  const Matrix &x = a.value();
  if (begin + count > x.rows()) shape_error("slice_rows", x.shape(), Shape{begin + count, x.cols()});
  Matrix out(count, x.cols());
  std::copy(x.data() + begin * x.cols(), x.data() + (begin + count) * x.cols(), out.data());
  return tape_of(a).record(std::move(out), {a}, [a, begin](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) {
      double *dst = ga->data() + begin * ga->cols();
      for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
    }
  });
}

Var gather_rows(Var a, std::span<const int> rows) {
  const Matrix &x = a.value();
  const std::size_t cols = x.cols();
  Matrix out(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    if (r < 0 || static_cast<std::size_t>(r) >= x.rows()) {
      shape_error("gather_rows index", x.shape(), Shape{static_cast<std::size_t>(r < 0 ? 0 : r) + 1, cols});
    }
    std::copy(x.row(static_cast<std::size_t>(r)).begin(), x.row(static_cast<std::size_t>(r)).end(),
              out.data() + i * cols);
  }
  std::vector<int> idx(rows.begin(), rows.end());
  return tape_of(a).record(std::move(out), {a}, [a, idx = std::move(idx)](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) {
      const std::size_t cols = g.cols();
      for (std::size_t i = 0; i < idx.size(); ++i) {
        double *dst = ga->data() + static_cast<std::size_t>(idx[i]) * cols;
        const double *src = g.data() + i * cols;
        for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
      }
    }
  });
}

Var scale_rows(Var a, Var weights) {
  const Matrix &x = a.value();
  const Matrix &w = weights.value();
  if (w.cols() != 1 || w.rows() != x.rows()) shape_error("scale_rows", x.shape(), w.shape());
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(r, c) = x(r, c) * w[r];
  }
  return tape_of(a).record(std::move(out), {a, weights}, [a, weights](Tape &t, const Matrix &g) {
    const Matrix &x = t.value(a);
    const Matrix &w = t.value(weights);
    if (Matrix *ga = t.grad_slot(a)) {
      for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) (*ga)(r, c) += g(r, c) * w[r];
      }
    }
    if (Matrix *gw = t.grad_slot(weights)) {
      for (std::size_t r = 0; r < x.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) acc += g(r, c) * x(r, c);
        (*gw)[r] += acc;
      }
    }
  });
}

Var leaky_relu(Var a, double slope) {
  return unary(a, [slope](double v) { return v > 0.0 ? v : slope * v; }, [a, slope](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) {
      const Matrix &x = t.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += x[i] > 0.0 ? g[i] : slope * g[i];
    }
  });
}

Var elu(Var a, double alpha) {
  return unary(a, [alpha](double v) { return v > 0.0 ? v : alpha * std::expm1(v); },
               [a, alpha](Tape &t, const Matrix &g) {
                 if (Matrix *ga = t.grad_slot(a)) {
                   const Matrix &x = t.value(a);
                   for (std::size_t i = 0; i < g.size(); ++i) {
                     (*ga)[i] += x[i] > 0.0 ? g[i] : g[i] * alpha * std::exp(x[i]);
                   }
                 }
               });
}

Var abs(Var a) {
  return unary(a, [](double v) { return std::fabs(v); }, [a](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) {
      const Matrix &x = t.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += x[i] > 0.0 ? g[i] : (x[i] < 0.0 ? -g[i] : 0.0);
    }
  });
}

Var segment_softmax(Var logits, const Segments &segs) {
  const Matrix &x = logits.value();
  if (x.cols() != 1 || segs.total() != x.rows()) {
    shape_error("segment_softmax", x.shape(), Shape{segs.total(), 1});
  }
  for (std::size_t s = 0; s < segs.count(); ++s) {
    if (segs.length(s) == 0) throw Error(ErrorCode::kEmptySegment, "segment " + std::to_string(s) + " is empty");
  }
  Matrix out;
  kernels::segment_softmax(x, segs, out);
  Matrix saved = logits.requires_grad() ? out : Matrix();
  return tape_of(logits).record(std::move(out), {logits}, [logits, segs, p = std::move(saved)](Tape &t, const Matrix &g) {
    Matrix *gx = t.grad_slot(logits);
    if (gx == nullptr) return;
    for (std::size_t s = 0; s < segs.count(); ++s) {
      double dot = 0.0;
      for (std::size_t r = segs.begin(s); r < segs.end(s); ++r) dot += p[r] * g[r];
      for (std::size_t r = segs.begin(s); r < segs.end(s); ++r) (*gx)[r] += p[r] * (g[r] - dot);
    }
  });
}

Var segment_sum(Var a, const Segments &segs) {
  const Matrix &x = a.value();
  if (segs.total() != x.rows()) shape_error("segment_sum", x.shape(), Shape{segs.total(), x.cols()});
  Matrix out;
  kernels::segment_sum(x, segs, out);
  return tape_of(a).record(std::move(out), {a}, [a, segs](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) {
      const std::size_t cols = g.cols();
      for (std::size_t s = 0; s < segs.count(); ++s) {
        const double *src = g.data() + s * cols;
        for (std::size_t r = segs.begin(s); r < segs.end(s); ++r) {
          double *dst = ga->data() + r * cols;
          for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
        }
      }
    }
  });
}

Var segment_mean(Var a, const Segments &segs) {
  const Matrix &x = a.value();
  if (segs.total() != x.rows()) shape_error("segment_mean", x.shape(), Shape{segs.total(), x.cols()});
  Matrix out;
  kernels::segment_sum(x, segs, out);
  for (std::size_t s = 0; s < segs.count(); ++s) {
    if (segs.length(s) == 0) continue;
    const double inv = 1.0 / static_cast<double>(segs.length(s));
    for (double &v : out.row(s)) v *= inv;
  }
  return tape_of(a).record(std::move(out), {a}, [a, segs](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) {
      const std::size_t cols = g.cols();
      for (std::size_t s = 0; s < segs.count(); ++s) {
        if (segs.length(s) == 0) continue;
        const double inv = 1.0 / static_cast<double>(segs.length(s));
        const double *src = g.data() + s * cols;
        for (std::size_t r = segs.begin(s); r < segs.end(s); ++r) {
          double *dst = ga->data() + r * cols;
          for (std::size_t c = 0; c < cols; ++c) dst[c] += inv * src[c];
        }
      }
    }
  });
}

Var mean_rows(Var a) {
  const Matrix &x = a.value();
  Segments all;
  all.push(x.rows());
  if (x.rows() == 0) throw Error(ErrorCode::kEmptySegment, "mean_rows of an empty tensor");
  return segment_mean(a, all);
}

Var sum_all(Var a) {
  const Matrix &x = a.value();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i];
  return tape_of(a).record(Matrix::scalar(acc), {a}, [a](Tape &t, const Matrix &g) {
    if (Matrix *ga = t.grad_slot(a)) {
      for (std::size_t i = 0; i < ga->size(); ++i) (*ga)[i] += g[0];
    }
  });
}

Var mean_all(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw Error(ErrorCode::kEmptySegment, "mean_all of an empty tensor");
  return scale(sum_all(a), 1.0 / static_cast<double>(n));
}

Var squared_error(Var pred, Var target) {
  const Matrix &p = pred.value();
  const Matrix &y = target.value();
  if (p.shape() != y.shape()) shape_error("squared_error", p.shape(), y.shape());
  if (p.size() == 0) throw Error(ErrorCode::kEmptySegment, "squared_error of empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += (p[i] - y[i]) * (p[i] - y[i]);
  const double inv = 1.0 / static_cast<double>(p.size());
  return tape_of(pred).record(Matrix::scalar(acc * inv), {pred, target}, [pred, target, inv](Tape &t, const Matrix &g) {
    const Matrix &p = t.value(pred);
    const Matrix &y = t.value(target);
    if (Matrix *gp = t.grad_slot(pred)) {
      for (std::size_t i = 0; i < p.size(); ++i) (*gp)[i] += 2.0 * inv * (p[i] - y[i]) * g[0];
    }
    if (Matrix *gy = t.grad_slot(target)) {
      for (std::size_t i = 0; i < p.size(); ++i) (*gy)[i] -= 2.0 * inv * (p[i] - y[i]) * g[0];
    }
  });
}

Var bce_with_logits(Var logits, Var targets) {
  const Matrix &z = logits.value();
  const Matrix &y = targets.value();
  if (z.shape() != y.shape()) shape_error("bce_with_logits", z.shape(), y.shape());
  if (z.size() == 0) throw Error(ErrorCode::kEmptySegment, "bce_with_logits of empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    // max(z,0) - z*y + log(1 + exp(-|z|))
    acc += std::max(z[i], 0.0) - z[i] * y[i] + std::log1p(std::exp(-std::fabs(z[i])));
  }
  const double inv = 1.0 / static_cast<double>(z.size());
  return tape_of(logits).record(Matrix::scalar(acc * inv), {logits, targets},
                                [logits, targets, inv](Tape &t, const Matrix &g) {
                                  const Matrix &z = t.value(logits);
                                  const Matrix &y = t.value(targets);
                                  if (Matrix *gz = t.grad_slot(logits)) {
                                    for (std::size_t i = 0; i < z.size(); ++i) {
                                      const double sig = 1.0 / (1.0 + std::exp(-z[i]));
                                      (*gz)[i] += inv * (sig - y[i]) * g[0];
                                    }
                                  }
                                  if (Matrix *gy = t.grad_slot(targets)) {
                                    for (std::size_t i = 0; i < z.size(); ++i) (*gy)[i] -= inv * z[i] * g[0];
                                  }
                                });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
  const Matrix &z = logits.value();
  if (labels.size() != z.rows() || z.rows() == 0) {
    shape_error("softmax_cross_entropy", z.shape(), Shape{labels.size(), z.cols()});
  }
  Matrix probs(z.rows(), z.cols());
  double acc = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= z.cols()) {
      throw Error(ErrorCode::kShapeMismatch, "class label " + std::to_string(label) + " out of range");
    }
    double mx = -INFINITY;
    for (double v : z.row(r)) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c) {
      probs(r, c) = std::exp(z(r, c) - mx);
      sum += probs(r, c);
    }
    for (std::size_t c = 0; c < z.cols(); ++c) probs(r, c) /= sum;
    acc -= z(r, static_cast<std::size_t>(label)) - mx - std::log(sum);
  }
  const double inv = 1.0 / static_cast<double>(z.rows());
  std::vector<int> lab(labels.begin(), labels.end());
  return tape_of(logits).record(Matrix::scalar(acc * inv), {logits},
                                [logits, probs = std::move(probs), lab = std::move(lab), inv](Tape &t, const Matrix &g) {
                                  if (Matrix *gz = t.grad_slot(logits)) {
                                    for (std::size_t r = 0; r < probs.rows(); ++r) {
                                      for (std::size_t c = 0; c < probs.cols(); ++c) {
                                        const double onehot = static_cast<int>(c) == lab[r] ? 1.0 : 0.0;
                                        (*gz)(r, c) += inv * (probs(r, c) - onehot) * g[0];
                                      }
                                    }
                                  }
                                });
}

}  // namespace rcs::tensor
