#pragma once

#include <cstddef>

// Dense kernels used by the masked-LM backend. Each kernel has an OpenMP
// variant and a serial reference; the parallel versions compute every output
// element independently, so results are identical to the serial ones.
namespace argprobe::kern {

// C(m x n) = A(m x k) * B(k x n), row-major.
void matmul(const double* a, const double* b, double* c, int m, int k, int n);
void matmul_serial(const double* a, const double* b, double* c, int m, int k,
                   int n);

// C(m x n) = A(m x k) * B(n x k)^T, row-major.
void matmul_transb(const double* a, const double* b, double* c, int m, int k,
                   int n);
void matmul_transb_serial(const double* a, const double* b, double* c, int m,
                          int k, int n);

// C(k x n) += A(m x k)^T * B(m x n). Used for weight gradients.
void matmul_transa_acc(const double* a, const double* b, double* c, int m,
                       int k, int n);
void matmul_transa_acc_serial(const double* a, const double* b, double* c,
                              int m, int k, int n);

// Row-wise softmax in place.
void softmax_rows(double* x, int rows, int cols);
void softmax_rows_serial(double* x, int rows, int cols);

// Row-wise log-softmax in place.
void log_softmax_rows(double* x, int rows, int cols);
void log_softmax_rows_serial(double* x, int rows, int cols);

}  // namespace argprobe::kern
