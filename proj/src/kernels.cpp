#include "rotkit/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "rotkit/errors.hpp"

namespace rotkit::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
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
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
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
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
}

} // namespace scalar

namespace {

struct Vtable {
    double (*dot)(const double*, const double*, std::size_t);
    void (*adam_update)(double*, const double*, double*, double*, std::size_t,
                        double, double, double, double, double, double);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*matmul_nt)(const double*, const double*, const double*, double*,
                      std::size_t, std::size_t, std::size_t);
    void (*matmul_nn_acc)(const double*, const double*, double*, std::size_t,
                          std::size_t, std::size_t);
    void (*matmul_tn_acc)(const double*, const double*, double*, std::size_t,
                          std::size_t, std::size_t);
    void (*relu_forward)(const double*, double*, std::size_t);
    void (*relu_backward_acc)(const double*, const double*, double*,
                              std::size_t);
    void (*colsum_acc)(const double*, double*, std::size_t, std::size_t);
};

constexpr Vtable kScalarTable = {
    scalar::dot,           scalar::adam_update,           scalar::axpy,
    scalar::matmul_nt,     scalar::matmul_nn_acc,
    scalar::matmul_tn_acc, scalar::relu_forward,
    scalar::relu_backward_acc, scalar::colsum_acc,
};

#ifdef ROTKIT_HAVE_AVX2_BUILD
constexpr Vtable kAvx2Table = {
    avx2::dot,           avx2::adam_update,           avx2::axpy,
    avx2::matmul_nt,     avx2::matmul_nn_acc,
    avx2::matmul_tn_acc, avx2::relu_forward,
    avx2::relu_backward_acc, avx2::colsum_acc,
};

bool host_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

#ifdef ROTKIT_HAVE_NEON_BUILD
constexpr Vtable kNeonTable = {
    neon::dot,           neon::adam_update,           neon::axpy,
    neon::matmul_nt,     neon::matmul_nn_acc,
    neon::matmul_tn_acc, neon::relu_forward,
    neon::relu_backward_acc, neon::colsum_acc,
};
#endif

struct Dispatch {
    const Vtable* table;
    Backend backend;
};

Dispatch pick_default() {
    if (const char* env = std::getenv("ROTKIT_KERNEL")) {
        if (std::strcmp(env, "scalar") == 0) return {&kScalarTable, Backend::scalar};
#ifdef ROTKIT_HAVE_AVX2_BUILD
        if (std::strcmp(env, "avx2") == 0 && host_has_avx2())
            return {&kAvx2Table, Backend::avx2};
#endif
#ifdef ROTKIT_HAVE_NEON_BUILD
        if (std::strcmp(env, "neon") == 0) return {&kNeonTable, Backend::neon};
#endif
        // Unknown or unsupported request: fall through to autodetect.
    }
#ifdef ROTKIT_HAVE_AVX2_BUILD
    if (host_has_avx2()) return {&kAvx2Table, Backend::avx2};
#endif
#ifdef ROTKIT_HAVE_NEON_BUILD
    return {&kNeonTable, Backend::neon};
#endif
    return {&kScalarTable, Backend::scalar};
}

Dispatch& dispatch() {
    static Dispatch d = pick_default();
    return d;
}

} // namespace

Backend active_backend() { return dispatch().backend; }

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

void force_backend(Backend b) {
    switch (b) {
        case Backend::scalar:
            dispatch() = {&kScalarTable, Backend::scalar};
            return;
        case Backend::avx2:
#ifdef ROTKIT_HAVE_AVX2_BUILD
            if (host_has_avx2()) {
                dispatch() = {&kAvx2Table, Backend::avx2};
                return;
            }
#endif
            throw ConfigError("avx2 kernels unavailable on this host");
        case Backend::neon:
#ifdef ROTKIT_HAVE_NEON_BUILD
            dispatch() = {&kNeonTable, Backend::neon};
            return;
#else
            throw ConfigError("neon kernels unavailable on this host");
#endif
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    return dispatch().table->dot(a, b, n);
}
void axpy(double alpha, const double* x, double* y, std::size_t n) {
    dispatch().table->axpy(alpha, x, y, n);
}
void matmul_nt(const double* x, const double* w, const double* bias, double* y,
               std::size_t n, std::size_t in, std::size_t out) {
    dispatch().table->matmul_nt(x, w, bias, y, n, in, out);
}
void matmul_nn_acc(const double* dy, const double* w, double* dx,
                   std::size_t n, std::size_t out, std::size_t in) {
    dispatch().table->matmul_nn_acc(dy, w, dx, n, out, in);
}
void matmul_tn_acc(const double* dy, const double* x, double* dw,
                   std::size_t n, std::size_t out, std::size_t in) {
    dispatch().table->matmul_tn_acc(dy, x, dw, n, out, in);
}
void relu_forward(const double* x, double* y, std::size_t n) {
    dispatch().table->relu_forward(x, y, n);
}
void relu_backward_acc(const double* x, const double* dy, double* dx,
                       std::size_t n) {
    dispatch().table->relu_backward_acc(x, dy, dx, n);
}
void colsum_acc(const double* dy, double* db, std::size_t n, std::size_t out) {
    dispatch().table->colsum_acc(dy, db, n, out);
}
void adam_update(double* p, const double* g, double* m, double* v,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double c1, double c2) {
    dispatch().table->adam_update(p, g, m, v, n, lr, beta1, beta2, eps, c1, c2);
}

} // namespace rotkit::kernels
