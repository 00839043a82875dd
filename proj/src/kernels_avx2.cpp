// AVX2+FMA variants of the dense kernels. Compiled only on x86-64 and
// entered only after a runtime CPUID check (see kernels.cpp).

#include "rotkit/kernels.hpp"

#ifdef ROTKIT_HAVE_AVX2_BUILD

#include <cmath>
#include <immintrin.h>

namespace rotkit::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

} // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void matmul_nt(const double* x, const double* w, const double* bias, double* y,
               std::size_t n, std::size_t in, std::size_t out) {
    // 2x4 register tile: two X rows against four W rows.
    std::size_t r = 0;
    for (; r + 2 <= n; r += 2) {
        const double* x0 = x + r * in;
        const double* x1 = x0 + in;
        double* y0 = y + r * out;
        double* y1 = y0 + out;
        std::size_t o = 0;
        for (; o + 4 <= out; o += 4) {
            const double* w0 = w + o * in;
            const double* w1 = w0 + in;
            const double* w2 = w1 + in;
            const double* w3 = w2 + in;
            __m256d a00 = _mm256_setzero_pd(), a01 = _mm256_setzero_pd();
            __m256d a02 = _mm256_setzero_pd(), a03 = _mm256_setzero_pd();
            __m256d a10 = _mm256_setzero_pd(), a11 = _mm256_setzero_pd();
            __m256d a12 = _mm256_setzero_pd(), a13 = _mm256_setzero_pd();
            std::size_t i = 0;
            for (; i + 4 <= in; i += 4) {
                __m256d xv0 = _mm256_loadu_pd(x0 + i);
                __m256d xv1 = _mm256_loadu_pd(x1 + i);
                __m256d wv0 = _mm256_loadu_pd(w0 + i);
                __m256d wv1 = _mm256_loadu_pd(w1 + i);
                __m256d wv2 = _mm256_loadu_pd(w2 + i);
                __m256d wv3 = _mm256_loadu_pd(w3 + i);
                a00 = _mm256_fmadd_pd(xv0, wv0, a00);
                a01 = _mm256_fmadd_pd(xv0, wv1, a01);
                a02 = _mm256_fmadd_pd(xv0, wv2, a02);
                a03 = _mm256_fmadd_pd(xv0, wv3, a03);
                a10 = _mm256_fmadd_pd(xv1, wv0, a10);
                a11 = _mm256_fmadd_pd(xv1, wv1, a11);
                a12 = _mm256_fmadd_pd(xv1, wv2, a12);
                a13 = _mm256_fmadd_pd(xv1, wv3, a13);
            }
            double s00 = hsum(a00), s01 = hsum(a01), s02 = hsum(a02), s03 = hsum(a03);
            double s10 = hsum(a10), s11 = hsum(a11), s12 = hsum(a12), s13 = hsum(a13);
            for (; i < in; ++i) {
                double xv0 = x0[i], xv1 = x1[i];
                s00 += xv0 * w0[i];
                s01 += xv0 * w1[i];
                s02 += xv0 * w2[i];
                s03 += xv0 * w3[i];
                s10 += xv1 * w0[i];
                s11 += xv1 * w1[i];
                s12 += xv1 * w2[i];
                s13 += xv1 * w3[i];
            }
            if (bias) {
                s00 += bias[o]; s01 += bias[o + 1]; s02 += bias[o + 2]; s03 += bias[o + 3];
                s10 += bias[o]; s11 += bias[o + 1]; s12 += bias[o + 2]; s13 += bias[o + 3];
            }
            y0[o] = s00; y0[o + 1] = s01; y0[o + 2] = s02; y0[o + 3] = s03;
            y1[o] = s10; y1[o + 1] = s11; y1[o + 2] = s12; y1[o + 3] = s13;
        }
        for (; o < out; ++o) {
            double s0 = dot(x0, w + o * in, in);
            double s1 = dot(x1, w + o * in, in);
            if (bias) {
                s0 += bias[o];
                s1 += bias[o];
            }
            y0[o] = s0;
            y1[o] = s1;
        }
    }
    for (; r < n; ++r) {
        const double* xr = x + r * in;
        double* yr = y + r * out;
        for (std::size_t o = 0; o < out; ++o) {
            double s = dot(xr, w + o * in, in);
            yr[o] = bias ? s + bias[o] : s;
        }
    }
}

namespace {

/// y += a0 x0 + a1 x1 + a2 x2 + a3 x3. One pass over y for four updates.
inline void axpy4(double a0, const double* x0, double a1, const double* x1,
                  double a2, const double* x2, double a3, const double* x3,
                  double* y, std::size_t n) {
    __m256d v0 = _mm256_set1_pd(a0);
    __m256d v1 = _mm256_set1_pd(a1);
    __m256d v2 = _mm256_set1_pd(a2);
    __m256d v3 = _mm256_set1_pd(a3);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_loadu_pd(y + i);
        acc = _mm256_fmadd_pd(v0, _mm256_loadu_pd(x0 + i), acc);
        acc = _mm256_fmadd_pd(v1, _mm256_loadu_pd(x1 + i), acc);
        acc = _mm256_fmadd_pd(v2, _mm256_loadu_pd(x2 + i), acc);
        acc = _mm256_fmadd_pd(v3, _mm256_loadu_pd(x3 + i), acc);
        _mm256_storeu_pd(y + i, acc);
    }
    for (; i < n; ++i)
        y[i] += a0 * x0[i] + a1 * x1[i] + a2 * x2[i] + a3 * x3[i];
}

} // namespace

void matmul_nn_acc(const double* dy, const double* w, double* dx,
                   std::size_t n, std::size_t out, std::size_t in) {
    // Two batch rows share each pass over the four weight rows.
    std::size_t r = 0;
    for (; r + 2 <= n; r += 2) {
        const double* dy0 = dy + r * out;
        const double* dy1 = dy0 + out;
        double* dx0 = dx + r * in;
        double* dx1 = dx0 + in;
        std::size_t o = 0;
        for (; o + 4 <= out; o += 4) {
            const double* w0 = w + o * in;
            const double* w1 = w0 + in;
            const double* w2 = w1 + in;
            const double* w3 = w2 + in;
            __m256d a00 = _mm256_set1_pd(dy0[o]);
            __m256d a01 = _mm256_set1_pd(dy0[o + 1]);
            __m256d a02 = _mm256_set1_pd(dy0[o + 2]);
            __m256d a03 = _mm256_set1_pd(dy0[o + 3]);
            __m256d a10 = _mm256_set1_pd(dy1[o]);
            __m256d a11 = _mm256_set1_pd(dy1[o + 1]);
            __m256d a12 = _mm256_set1_pd(dy1[o + 2]);
            __m256d a13 = _mm256_set1_pd(dy1[o + 3]);
            std::size_t i = 0;
            for (; i + 4 <= in; i += 4) {
                __m256d wv0 = _mm256_loadu_pd(w0 + i);
                __m256d wv1 = _mm256_loadu_pd(w1 + i);
                __m256d wv2 = _mm256_loadu_pd(w2 + i);
                __m256d wv3 = _mm256_loadu_pd(w3 + i);
                __m256d acc0 = _mm256_loadu_pd(dx0 + i);
                acc0 = _mm256_fmadd_pd(a00, wv0, acc0);
                acc0 = _mm256_fmadd_pd(a01, wv1, acc0);
                acc0 = _mm256_fmadd_pd(a02, wv2, acc0);
                acc0 = _mm256_fmadd_pd(a03, wv3, acc0);
                _mm256_storeu_pd(dx0 + i, acc0);
                __m256d acc1 = _mm256_loadu_pd(dx1 + i);
                acc1 = _mm256_fmadd_pd(a10, wv0, acc1);
                acc1 = _mm256_fmadd_pd(a11, wv1, acc1);
                acc1 = _mm256_fmadd_pd(a12, wv2, acc1);
                acc1 = _mm256_fmadd_pd(a13, wv3, acc1);
                _mm256_storeu_pd(dx1 + i, acc1);
            }
            for (; i < in; ++i) {
                dx0[i] += dy0[o] * w0[i] + dy0[o + 1] * w1[i] +
                          dy0[o + 2] * w2[i] + dy0[o + 3] * w3[i];
                dx1[i] += dy1[o] * w0[i] + dy1[o + 1] * w1[i] +
                          dy1[o + 2] * w2[i] + dy1[o + 3] * w3[i];
            }
        }
        for (; o < out; ++o) {
            if (dy0[o] != 0.0) axpy(dy0[o], w + o * in, dx0, in);
            if (dy1[o] != 0.0) axpy(dy1[o], w + o * in, dx1, in);
        }
    }
    for (; r < n; ++r) {
        const double* dyr = dy + r * out;
        double* dxr = dx + r * in;
        std::size_t o = 0;
        for (; o + 4 <= out; o += 4) {
            axpy4(dyr[o], w + o * in, dyr[o + 1], w + (o + 1) * in,
                  dyr[o + 2], w + (o + 2) * in, dyr[o + 3], w + (o + 3) * in,
                  dxr, in);
        }
        for (; o < out; ++o) {
            if (dyr[o] != 0.0) axpy(dyr[o], w + o * in, dxr, in);
        }
    }
}

void matmul_tn_acc(const double* dy, const double* x, double* dw,
                   std::size_t n, std::size_t out, std::size_t in) {
    // Four batch rows per pass over dW to cut the write traffic.
    std::size_t r = 0;
    for (; r + 4 <= n; r += 4) {
        const double* dy0 = dy + r * out;
        const double* dy1 = dy0 + out;
        const double* dy2 = dy1 + out;
        const double* dy3 = dy2 + out;
        const double* x0 = x + r * in;
        const double* x1 = x0 + in;
        const double* x2 = x1 + in;
        const double* x3 = x2 + in;
        for (std::size_t o = 0; o < out; ++o) {
            axpy4(dy0[o], x0, dy1[o], x1, dy2[o], x2, dy3[o], x3,
                  dw + o * in, in);
        }
    }
    for (; r < n; ++r) {
        const double* dyr = dy + r * out;
        const double* xr = x + r * in;
        for (std::size_t o = 0; o < out; ++o) {
            if (dyr[o] != 0.0) axpy(dyr[o], xr, dw + o * in, in);
        }
    }
}

void relu_forward(const double* x, double* y, std::size_t n) {
    __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    }
    for (; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_acc(const double* x, const double* dy, double* dx,
                       std::size_t n) {
    __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d xv = _mm256_loadu_pd(x + i);
        __m256d mask = _mm256_cmp_pd(xv, zero, _CMP_GT_OQ);
        __m256d dyv = _mm256_and_pd(_mm256_loadu_pd(dy + i), mask);
        _mm256_storeu_pd(dx + i, _mm256_add_pd(_mm256_loadu_pd(dx + i), dyv));
    }
    for (; i < n; ++i)
        if (x[i] > 0.0) dx[i] += dy[i];
}

void colsum_acc(const double* dy, double* db, std::size_t n, std::size_t out) {
    for (std::size_t r = 0; r < n; ++r) axpy(1.0, dy + r * out, db, out);
}

void adam_update(double* p, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double c1, double c2) {
    __m256d b1 = _mm256_set1_pd(beta1);
    __m256d b1c = _mm256_set1_pd(1.0 - beta1);
    __m256d b2 = _mm256_set1_pd(beta2);
    __m256d b2c = _mm256_set1_pd(1.0 - beta2);
    __m256d lrv = _mm256_set1_pd(lr);
    __m256d epsv = _mm256_set1_pd(eps);
    __m256d ic1 = _mm256_set1_pd(1.0 / c1);
    __m256d ic2 = _mm256_set1_pd(1.0 / c2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d gv = _mm256_loadu_pd(g + i);
        __m256d mv = _mm256_fmadd_pd(b1c, gv, _mm256_mul_pd(b1, _mm256_loadu_pd(m + i)));
        __m256d vv = _mm256_fmadd_pd(b2c, _mm256_mul_pd(gv, gv),
                                     _mm256_mul_pd(b2, _mm256_loadu_pd(v + i)));
        _mm256_storeu_pd(m + i, mv);
        _mm256_storeu_pd(v + i, vv);
        __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, ic2)), epsv);
        __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, _mm256_mul_pd(mv, ic1)), denom);
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    for (; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
}

} // namespace rotkit::kernels::avx2

#endif // ROTKIT_HAVE_AVX2_BUILD
