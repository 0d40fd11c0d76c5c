#include "rcsearch/tensor/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rcs::tensor::kernels {
namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void matmul(const Matrix &a, const Matrix &b, Matrix &out) {
  out.resize_zero(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
}

void matmul_at_b_add(const Matrix &a, const Matrix &g, Matrix &out) {
  for (std::size_t k = 0; k < a.cols(); ++k) {
    for (std::size_t j = 0; j < g.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, k) * g(i, j);
      out(k, j) += acc;
    }
  }
}

void matmul_a_bt_add(const Matrix &g, const Matrix &b, Matrix &out) {
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t k = 0; k < b.rows(); ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < g.cols(); ++j) acc += g(i, j) * b(k, j);
      out(i, k) += acc;
    }
  }
}

void segment_softmax(const Matrix &logits, const Segments &segs, Matrix &out) {
  out.resize_zero(logits.rows(), 1);
  for (std::size_t s = 0; s < segs.count(); ++s) {
    double mx = -INFINITY;
    for (std::size_t r = segs.begin(s); r < segs.end(s); ++r) mx = std::max(mx, logits[r]);
    double sum = 0.0;
    for (std::size_t r = segs.begin(s); r < segs.end(s); ++r) sum += std::exp(logits[r] - mx);
    for (std::size_t r = segs.begin(s); r < segs.end(s); ++r) out[r] = std::exp(logits[r] - mx) / sum;
  }
}

void segment_sum(const Matrix &x, const Segments &segs, Matrix &out) {
  out.resize_zero(segs.count(), x.cols());
  for (std::size_t s = 0; s < segs.count(); ++s) {
    for (std::size_t r = segs.begin(s); r < segs.end(s); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) out(s, c) += x(r, c);
    }
  }
}

}  // namespace serial

namespace parallel {

void matmul(const Matrix &a, const Matrix &b, Matrix &out) {
  const std::size_t n = a.rows(), inner = a.cols(), m = b.cols();
  out.resize_zero(n, m);
  const double *pa = a.data();
  const double *pb = b.data();
  double *pc = out.data();
  // Four output rows share each load of b's row; per-element summation order
  // stays k-ascending, so results match the serial kernel exactly.
  const auto blocks = static_cast<std::ptrdiff_t>((n + 3) / 4);
#pragma omp parallel for schedule(static) if (n * inner * m > kParallelWork)
  for (std::ptrdiff_t bb = 0; bb < blocks; ++bb) {
    const std::size_t i0 = static_cast<std::size_t>(bb) * 4;
    if (i0 + 4 <= n) {
      double *c0 = pc + i0 * m, *c1 = c0 + m, *c2 = c1 + m, *c3 = c2 + m;
      const double *a0 = pa + i0 * inner, *a1 = a0 + inner, *a2 = a1 + inner, *a3 = a2 + inner;
      for (std::size_t k = 0; k < inner; ++k) {
        const double x0 = a0[k], x1 = a1[k], x2 = a2[k], x3 = a3[k];
        if (x0 == 0.0 && x1 == 0.0 && x2 == 0.0 && x3 == 0.0) continue;
        const double *brow = pb + k * m;
        for (std::size_t j = 0; j < m; ++j) {
          const double bj = brow[j];
          c0[j] += x0 * bj;
          c1[j] += x1 * bj;
          c2[j] += x2 * bj;
          c3[j] += x3 * bj;
        }
      }
      continue;
    }
    for (std::size_t i = i0; i < n; ++i) {
      double *crow = pc + i * m;
      for (std::size_t k = 0; k < inner; ++k) {
        const double aik = pa[i * inner + k];
        if (aik == 0.0) continue;
        const double *brow = pb + k * m;
        for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
      }
    }
  }
}

void matmul_at_b_add(const Matrix &a, const Matrix &g, Matrix &out) {
  const std::size_t n = a.rows(), inner = a.cols(), m = g.cols();
  const double *pa = a.data();
  const double *pg = g.data();
  double *po = out.data();
  const auto blocks = static_cast<std::ptrdiff_t>((inner + 3) / 4);
#pragma omp parallel for schedule(static) if (n * inner * m > kParallelWork)
  for (std::ptrdiff_t bb = 0; bb < blocks; ++bb) {
    const std::size_t k0 = static_cast<std::size_t>(bb) * 4;
    if (k0 + 4 <= inner) {
      double *o0 = po + k0 * m, *o1 = o0 + m, *o2 = o1 + m, *o3 = o2 + m;
      for (std::size_t i = 0; i < n; ++i) {
        const double *arow = pa + i * inner + k0;
        const double x0 = arow[0], x1 = arow[1], x2 = arow[2], x3 = arow[3];
        if (x0 == 0.0 && x1 == 0.0 && x2 == 0.0 && x3 == 0.0) continue;
        const double *grow = pg + i * m;
        for (std::size_t j = 0; j < m; ++j) {
          const double gj = grow[j];
          o0[j] += x0 * gj;
          o1[j] += x1 * gj;
          o2[j] += x2 * gj;
          o3[j] += x3 * gj;
        }
      }
      continue;
    }
    for (std::size_t k = k0; k < inner; ++k) {
      double *orow = po + k * m;
      for (std::size_t i = 0; i < n; ++i) {
        const double aik = pa[i * inner + k];
        if (aik == 0.0) continue;
        const double *grow = pg + i * m;
        for (std::size_t j = 0; j < m; ++j) orow[j] += aik * grow[j];
      }
    }
  }
}

void matmul_a_bt_add(const Matrix &g, const Matrix &b, Matrix &out) {
  // out(i,k) += sum_j g(i,j) b(k,j): transpose b once so the inner loop is
  // a contiguous axpy.
  const std::size_t n = g.rows(), m = g.cols(), kdim = b.rows();
  Matrix bt(m, kdim);
  for (std::size_t k = 0; k < kdim; ++k) {
    for (std::size_t j = 0; j < m; ++j) bt(j, k) = b(k, j);
  }
  const double *pg = g.data();
  const double *pbt = bt.data();
  double *po = out.data();
  const auto blocks = static_cast<std::ptrdiff_t>((n + 3) / 4);
#pragma omp parallel for schedule(static) if (n * m * kdim > kParallelWork)
  for (std::ptrdiff_t bb = 0; bb < blocks; ++bb) {
    const std::size_t i0 = static_cast<std::size_t>(bb) * 4;
    if (i0 + 4 <= n) {
      double *o0 = po + i0 * kdim, *o1 = o0 + kdim, *o2 = o1 + kdim, *o3 = o2 + kdim;
      const double *g0 = pg + i0 * m, *g1 = g0 + m, *g2 = g1 + m, *g3 = g2 + m;
      for (std::size_t j = 0; j < m; ++j) {
        const double x0 = g0[j], x1 = g1[j], x2 = g2[j], x3 = g3[j];
        if (x0 == 0.0 && x1 == 0.0 && x2 == 0.0 && x3 == 0.0) continue;
        const double *btrow = pbt + j * kdim;
        for (std::size_t k = 0; k < kdim; ++k) {
          const double bk = btrow[k];
          o0[k] += x0 * bk;
          o1[k] += x1 * bk;
          o2[k] += x2 * bk;
          o3[k] += x3 * bk;
        }
      }
      continue;
    }
    for (std::size_t i = i0; i < n; ++i) {
      double *orow = po + i * kdim;
      for (std::size_t j = 0; j < m; ++j) {
        const double gij = pg[i * m + j];
        if (gij == 0.0) continue;
        const double *btrow = pbt + j * kdim;
        for (std::size_t k = 0; k < kdim; ++k) orow[k] += gij * btrow[k];
      }
    }
  }
}

void segment_softmax(const Matrix &logits, const Segments &segs, Matrix &out) {
  out.resize_zero(logits.rows(), 1);
  const auto count = static_cast<std::ptrdiff_t>(segs.count());
#pragma omp parallel for schedule(static) if (logits.rows() > 4096)
  for (std::ptrdiff_t ss = 0; ss < count; ++ss) {
    const auto s = static_cast<std::size_t>(ss);
    const std::size_t b = segs.begin(s), e = segs.end(s);
    double mx = -INFINITY;
    for (std::size_t r = b; r < e; ++r) mx = std::max(mx, logits[r]);
    double sum = 0.0;
    for (std::size_t r = b; r < e; ++r) {
      out[r] = std::exp(logits[r] - mx);
      sum += out[r];
    }
    const double inv = 1.0 / sum;
    for (std::size_t r = b; r < e; ++r) out[r] *= inv;
  }
}

void segment_sum(const Matrix &x, const Segments &segs, Matrix &out) {
  const std::size_t m = x.cols();
  out.resize_zero(segs.count(), m);
  const auto count = static_cast<std::ptrdiff_t>(segs.count());
#pragma omp parallel for schedule(static) if (x.size() > kParallelWork)
  for (std::ptrdiff_t ss = 0; ss < count; ++ss) {
    const auto s = static_cast<std::size_t>(ss);
    double *orow = out.data() + s * m;
    for (std::size_t r = segs.begin(s); r < segs.end(s); ++r) {
      const double *xrow = x.data() + r * m;
      for (std::size_t c = 0; c < m; ++c) orow[c] += xrow[c];
    }
  }
}

}  // namespace parallel
}  // namespace rcs::tensor::kernels
