#pragma once

#include <cstddef>
#include <string>

namespace rotkit::kernels {

// Dense inner loops of the training stack. Every operation has a scalar
// reference implementation; on x86-64 an AVX2+FMA variant is selected at
// runtime when the CPU supports it, on AArch64 a NEON variant. The variants
// are equivalence-tested against the reference.
//
// Matrix layout is row-major throughout. The layer convention is
//   Y (n x out) = X (n x in) * W^T (+ bias),   W stored (out x in),
// so forward rows of X and W are both contiguous, and the backward products
//   dX += dY * W      and      dW += dY^T * X
// reduce to contiguous AXPY accumulations.

enum class Backend { scalar, avx2, neon };

/// Backend selected for this process. Honors the ROTKIT_KERNEL environment
/// variable (scalar | avx2 | neon) when set, otherwise picks the widest one
/// the CPU supports.
Backend active_backend();
std::string backend_name(Backend b);

/// Force a backend (tests). Throws ConfigError if unsupported on this host.
void force_backend(Backend b);

double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);

/// Y = X * W^T + bias (bias may be null). X: n x in, W: out x in, Y: n x out.
void matmul_nt(const double* x, const double* w, const double* bias, double* y,
               std::size_t n, std::size_t in, std::size_t out);

/// dX += dY * W. dY: n x out, W: out x in, dX: n x in.
void matmul_nn_acc(const double* dy, const double* w, double* dx,
                   std::size_t n, std::size_t out, std::size_t in);

/// dW += dY^T * X. dY: n x out, X: n x in, dW: out x in.
void matmul_tn_acc(const double* dy, const double* x, double* dw,
                   std::size_t n, std::size_t out, std::size_t in);

void relu_forward(const double* x, double* y, std::size_t n);

/// dx += dy where x > 0.
void relu_backward_acc(const double* x, const double* dy, double* dx,
                       std::size_t n);

/// db += column sums of dY (n x out).
void colsum_acc(const double* dy, double* db, std::size_t n, std::size_t out);

/// Fused Adam update over one tensor: m and v are the first- and
/// second-moment buffers, c1 and c2 the bias corrections 1 - beta^t.
void adam_update(double* p, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double c1, double c2);

/// Reference implementations (always available, used as the test oracle).
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matmul_nt(const double* x, const double* w, const double* bias, double* y,
               std::size_t n, std::size_t in, std::size_t out);
void matmul_nn_acc(const double* dy, const double* w, double* dx,
                   std::size_t n, std::size_t out, std::size_t in);
void matmul_tn_acc(const double* dy, const double* x, double* dw,
                   std::size_t n, std::size_t out, std::size_t in);
void relu_forward(const double* x, double* y, std::size_t n);
void relu_backward_acc(const double* x, const double* dy, double* dx,
                       std::size_t n);
void colsum_acc(const double* dy, double* db, std::size_t n, std::size_t out);
void adam_update(double* p, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double c1, double c2);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define ROTKIT_HAVE_AVX2_BUILD 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matmul_nt(const double* x, const double* w, const double* bias, double* y,
               std::size_t n, std::size_t in, std::size_t out);
void matmul_nn_acc(const double* dy, const double* w, double* dx,
                   std::size_t n, std::size_t out, std::size_t in);
void matmul_tn_acc(const double* dy, const double* x, double* dw,
                   std::size_t n, std::size_t out, std::size_t in);
void relu_forward(const double* x, double* y, std::size_t n);
void relu_backward_acc(const double* x, const double* dy, double* dx,
                       std::size_t n);
void colsum_acc(const double* dy, double* db, std::size_t n, std::size_t out);
void adam_update(double* p, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double c1, double c2);
} // namespace avx2
#endif

#if defined(__aarch64__)
#define ROTKIT_HAVE_NEON_BUILD 1
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matmul_nt(const double* x, const double* w, const double* bias, double* y,
               std::size_t n, std::size_t in, std::size_t out);
void matmul_nn_acc(const double* dy, const double* w, double* dx,
                   std::size_t n, std::size_t out, std::size_t in);
void matmul_tn_acc(const double* dy, const double* x, double* dw,
                   std::size_t n, std::size_t out, std::size_t in);
void relu_forward(const double* x, double* y, std::size_t n);
void relu_backward_acc(const double* x, const double* dy, double* dx,
                       std::size_t n);
void colsum_acc(const double* dy, double* db, std::size_t n, std::size_t out);
void adam_update(double* p, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double c1, double c2);
} // namespace neon
#endif

} // namespace rotkit::kernels
