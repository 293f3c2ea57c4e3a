#include "argprobe/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace argprobe::kern {

namespace {
// Below this many output elements the OpenMP fork costs more than the loop.
constexpr long kParallelThreshold = 4096;
}  // namespace

void matmul_serial(const double* a, const double* b, double* c, int m, int k,
                   int n) {
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<size_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    const double* ai = a + static_cast<size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void matmul(const double* a, const double* b, double* c, int m, int k, int n) {
  if (static_cast<long>(m) * n < kParallelThreshold) {
    matmul_serial(a, b, c, m, k, n);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<size_t>(i) * n;
    std::fill(ci, ci + n, 0.0);
    const double* ai = a + static_cast<size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

void matmul_transb_serial(const double* a, const double* b, double* c, int m,
                          int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = acc;
    }
  }
}

void matmul_transb(const double* a, const double* b, double* c, int m, int k,
                   int n) {
  if (static_cast<long>(m) * n < kParallelThreshold) {
    matmul_transb_serial(a, b, c, m, k, n);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<size_t>(j) * k;
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = acc;
    }
  }
}

void matmul_transa_acc_serial(const double* a, const double* b, double* c,
                              int m, int k, int n) {
  for (int p = 0; p < k; ++p) {
    double* cp = c + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const double av = a[static_cast<size_t>(i) * k + p];
      const double* bi = b + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

void matmul_transa_acc(const double* a, const double* b, double* c, int m,
                       int k, int n) {
  if (static_cast<long>(k) * n < kParallelThreshold) {
    matmul_transa_acc_serial(a, b, c, m, k, n);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int p = 0; p < k; ++p) {
    double* cp = c + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const double av = a[static_cast<size_t>(i) * k + p];
      const double* bi = b + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

namespace {

inline void softmax_row(double* x, int cols) {
  double mx = x[0];
  for (int j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
  double sum = 0.0;
  for (int j = 0; j < cols; ++j) {
    x[j] = std::exp(x[j] - mx);
    sum += x[j];
  }
  const double inv = 1.0 / sum;
  for (int j = 0; j < cols; ++j) x[j] *= inv;
}

inline void log_softmax_row(double* x, int cols) {
  double mx = x[0];
  for (int j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
  double sum = 0.0;
  for (int j = 0; j < cols; ++j) sum += std::exp(x[j] - mx);
  const double lse = mx + std::log(sum);
  for (int j = 0; j < cols; ++j) x[j] -= lse;
}

}  // namespace

void softmax_rows_serial(double* x, int rows, int cols) {
  for (int i = 0; i < rows; ++i) softmax_row(x + static_cast<size_t>(i) * cols, cols);
}

void softmax_rows(double* x, int rows, int cols) {
  if (static_cast<long>(rows) * cols < kParallelThreshold) {
    softmax_rows_serial(x, rows, cols);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) softmax_row(x + static_cast<size_t>(i) * cols, cols);
}

void log_softmax_rows_serial(double* x, int rows, int cols) {
  for (int i = 0; i < rows; ++i)
    log_softmax_row(x + static_cast<size_t>(i) * cols, cols);
}

void log_softmax_rows(double* x, int rows, int cols) {
  if (static_cast<long>(rows) * cols < kParallelThreshold) {
    log_softmax_rows_serial(x, rows, cols);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i)
    log_softmax_row(x + static_cast<size_t>(i) * cols, cols);
}

}  // namespace argprobe::kern
