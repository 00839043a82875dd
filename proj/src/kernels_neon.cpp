// NEON variants of the dense kernels for AArch64.

#include "rotkit/kernels.hpp"

#ifdef ROTKIT_HAVE_NEON_BUILD

#include <arm_neon.h>

#include <cmath>

namespace rotkit::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    for (; i + 2 <= n; i += 2) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    }
    double s = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    float64x2_t av = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void matmul_nt(const double* x, const double* w, const double* bias, double* y,
               std::size_t n, std::size_t in, std::size_t out) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* xr = x + r * in;
        double* yr = y + r * out;
        for (std::size_t o = 0; o < out; ++o) {
            double s = dot(xr, w + o * in, in);
            yr[o] = bias ? s + bias[o] : s;
        }
    }
}

void matmul_nn_acc(const double* dy, const double* w, double* dx,
                   std::size_t n, std::size_t out, std::size_t in) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* dyr = dy + r * out;
        double* dxr = dx + r * in;
        for (std::size_t o = 0; o < out; ++o) {
            if (dyr[o] != 0.0) axpy(dyr[o], w + o * in, dxr, in);
        }
    }
}

void matmul_tn_acc(const double* dy, const double* x, double* dw,
                   std::size_t n, std::size_t out, std::size_t in) {
    for (std::size_t r = 0; r < n; ++r) {
        const double* dyr = dy + r * out;
        const double* xr = x + r * in;
        for (std::size_t o = 0; o < out; ++o) {
            if (dyr[o] != 0.0) axpy(dyr[o], xr, dw + o * in, in);
        }
    }
}

void relu_forward(const double* x, double* y, std::size_t n) {
    float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vmaxq_f64(vld1q_f64(x + i), zero));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_acc(const double* x, const double* dy, double* dx,
                       std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] > 0.0) dx[i] += dy[i];
}

void colsum_acc(const double* dy, double* db, std::size_t n, std::size_t out) {
    for (std::size_t r = 0; r < n; ++r) axpy(1.0, dy + r * out, db, out);
}

void adam_update(double* p, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double c1, double c2) {
    float64x2_t b1 = vdupq_n_f64(beta1);
    float64x2_t b1c = vdupq_n_f64(1.0 - beta1);
    float64x2_t b2 = vdupq_n_f64(beta2);
    float64x2_t b2c = vdupq_n_f64(1.0 - beta2);
    float64x2_t lrv = vdupq_n_f64(lr);
    float64x2_t epsv = vdupq_n_f64(eps);
    float64x2_t ic1 = vdupq_n_f64(1.0 / c1);
    float64x2_t ic2 = vdupq_n_f64(1.0 / c2);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t gv = vld1q_f64(g + i);
        float64x2_t mv = vfmaq_f64(vmulq_f64(b1, vld1q_f64(m + i)), b1c, gv);
        float64x2_t vv = vfmaq_f64(vmulq_f64(b2, vld1q_f64(v + i)), b2c,
                                   vmulq_f64(gv, gv));
        vst1q_f64(m + i, mv);
        vst1q_f64(v + i, vv);
        float64x2_t denom = vaddq_f64(vsqrtq_f64(vmulq_f64(vv, ic2)), epsv);
        float64x2_t step = vdivq_f64(vmulq_f64(lrv, vmulq_f64(mv, ic1)), denom);
        vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
}

} // namespace rotkit::kernels::neon

#endif // ROTKIT_HAVE_NEON_BUILD
