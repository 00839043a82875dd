#include "rotkit/projections.hpp"

#include <algorithm>
#include <cmath>

#include "rotkit/errors.hpp"
#include "rotkit/representations.hpp"

namespace rotkit {

namespace {

/// Frobenius norm of the off-diagonal part of a symmetric matrix.
double offdiag_mass(const Mat3& s) {
    return std::sqrt(2.0 * (s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) +
                            s(1, 2) * s(1, 2)));
}

/// One Jacobi rotation zeroing s(p, q); accumulates into v (right factor).
void jacobi_rotate(Mat3& s, Mat3& v, int p, int q) {
    if (s(p, q) == 0.0) return;
    double tau = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
    double t = (tau >= 0.0 ? 1.0 : -1.0) /
               (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
    double c = 1.0 / std::sqrt(1.0 + t * t);
    double sn = t * c;
    for (int k = 0; k < 3; ++k) {
        double skp = s(k, p), skq = s(k, q);
        s(k, p) = c * skp - sn * skq;
        s(k, q) = sn * skp + c * skq;
    }
    for (int k = 0; k < 3; ++k) {
        double spk = s(p, k), sqk = s(q, k);
        s(p, k) = c * spk - sn * sqk;
        s(q, k) = sn * spk + c * sqk;
    }
    for (int k = 0; k < 3; ++k) {
        double vkp = v(k, p), vkq = v(k, q);
        v(k, p) = c * vkp - sn * vkq;
        v(k, q) = sn * vkp + c * vkq;
    }
}

/// Unit vector orthogonal to u: cross against the axis with the smallest
/// |component|.
Vec3 any_orthonormal(const Vec3& u) {
    int k = 0;
    double best = std::fabs(u.x);
    if (std::fabs(u.y) < best) { k = 1; best = std::fabs(u.y); }
    if (std::fabs(u.z) < best) { k = 2; }
    Vec3 e{0.0, 0.0, 0.0};
    e[k] = 1.0;
    return u.cross(e).normalized();
}

} // namespace

SVDFactors svd3(const Mat3& m) {
    if (!m.all_finite()) throw DataError("svd3: non-finite entries");
    SVDFactors f;
    double scale = m.max_abs();
    if (scale == 0.0) {
        f.u = Mat3::identity();
        f.v = Mat3::identity();
        return f;
    }
    Mat3 a = m * (1.0 / scale);
    Mat3 s = a.transpose() * a;
    Mat3 v = Mat3::identity();
    bool converged = false;
    for (int sweep = 0; sweep < 30; ++sweep) {
        if (offdiag_mass(s) < 1e-14) {
            converged = true;
            break;
        }
        jacobi_rotate(s, v, 0, 1);
        jacobi_rotate(s, v, 0, 2);
        jacobi_rotate(s, v, 1, 2);
    }
    if (!converged && offdiag_mass(s) >= 1e-14)
        throw NumericalFailure("svd3: Jacobi iteration did not converge");

    // Eigenvalues of A^T A on the diagonal; order descending.
    int order[3] = {0, 1, 2};
    double lam[3] = {std::max(0.0, s(0, 0)), std::max(0.0, s(1, 1)),
                     std::max(0.0, s(2, 2))};
    std::sort(order, order + 3, [&](int i, int j) { return lam[i] > lam[j]; });

    Vec3 vcols[3];
    double sig[3];
    for (int i = 0; i < 3; ++i) {
        vcols[i] = v.col(order[i]);
        sig[i] = std::sqrt(lam[order[i]]);
    }

    // Forming A^T A squares the condition number, so the small singular
    // values carry only sqrt(eps) accuracy. Recover them from quantities
    // computed directly on A: the product identity s1 s2 s3 = |det A| and,
    // near rank one, the 2x2-minor mass s1^2 s2^2 + s1^2 s3^2 + s2^2 s3^2.
    if (sig[0] > 0.0) {
        if (sig[1] < 1e-6 * sig[0]) {
            double minor_mass = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
                    int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
                    double minor = a(i1, j1) * a(i2, j2) - a(i1, j2) * a(i2, j1);
                    minor_mass += minor * minor;
                }
            sig[1] = std::min(sig[0], std::sqrt(minor_mass) / sig[0]);
        }
        double prod = sig[0] * sig[1];
        sig[2] = prod > 0.0 ? std::min(sig[1], std::fabs(a.det()) / prod) : 0.0;
    }

    // Left vectors from A v_i, completed by cross products where the
    // singular value underflows.
    Vec3 u0, u1, u2;
    double tiny = 1e-13 * std::max(sig[0], 1.0);
    if (sig[0] <= tiny) {
        u0 = {1.0, 0.0, 0.0};
        u1 = {0.0, 1.0, 0.0};
        u2 = {0.0, 0.0, 1.0};
    } else {
        u0 = (a * vcols[0]).normalized();
        if (sig[1] > tiny) {
            Vec3 w = a * vcols[1];
            w = w - u0 * u0.dot(w);
            u1 = w.normalized();
        } else {
            u1 = any_orthonormal(u0);
        }
        u2 = u0.cross(u1);
        if (sig[2] > 0.0) {
            Vec3 w = a * vcols[2];
            if (u2.dot(w) < 0.0) u2 = -u2;
        }
    }

    f.u = Mat3::from_cols(u0, u1, u2);
    f.v = Mat3::from_cols(vcols[0], vcols[1], vcols[2]);
    f.sigma = {sig[0] * scale, sig[1] * scale, sig[2] * scale};
    return f;
}

SvdPlusResult svd_plus_checked(const Mat3& m) {
    SVDFactors f = svd3(m);
    double s = (f.u * f.v.transpose()).det() >= 0.0 ? 1.0 : -1.0;
    Mat3 r = f.u * Mat3::diag(1.0, 1.0, s) * f.v.transpose();
    SvdPlusResult out;
    out.r = RotationMatrix::unchecked(r);
    out.near_singular = std::fabs(m.det()) < 1e-6;
    return out;
}

RotationMatrix svd_plus(const Mat3& m) { return svd_plus_checked(m).r; }

SvdPlusVjpResult svd_plus_vjp(const Mat3& m, const Mat3& cotangent) {
    SVDFactors f = svd3(m);
    double s3 = (f.u * f.v.transpose()).det() >= 0.0 ? 1.0 : -1.0;
    double d[3] = {1.0, 1.0, s3};
    const auto& sig = f.sigma;

    // G~ = U^T Gbar V; with dP = U^T dM V the differential of
    // R = U diag(d) V^T contributes only through the off-diagonal blocks of
    // the skew generators of U and V.
    Mat3 gt = f.u.transpose() * cotangent * f.v;

    SvdPlusVjpResult out;
    Mat3 k; // coefficients of dP
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            double delta = sig[j] * sig[j] - sig[i] * sig[i];
            double mag = std::fabs(delta);
            if (mag < 1e-8) {
                out.regularized = true;
                mag = 1e-8;
            }
            double denom = (delta < 0.0 ? -mag : mag);
            double a = gt(i, j) * d[j] - gt(j, i) * d[i];
            double b = gt(j, i) * d[j] - gt(i, j) * d[i];
            k(i, j) = (a * sig[j] + b * sig[i]) / denom;
            k(j, i) = (a * sig[i] + b * sig[j]) / denom;
        }
    out.grad = f.u * k * f.v.transpose();
    return out;
}

RotationMatrix gso(const SixD& s) { return sixd_to_matrix(s); }

SixDGrad gso_vjp(const SixD& s, const Mat3& cotangent) {
    double n1 = s.nu1.norm();
    double n2v = s.nu2.norm();
    if (n1 < 1e-12 || n2v < 1e-12)
        throw SingularInput("gso_vjp: zero column");
    if (s.nu1.cross(s.nu2).norm() / (n1 * n2v) < 1e-7)
        throw SingularInput("gso_vjp: columns are parallel");

    Vec3 b1 = s.nu1 / n1;
    double d12 = b1.dot(s.nu2);
    Vec3 w2 = s.nu2 - b1 * d12;
    double n2 = w2.norm();
    Vec3 b2 = w2 / n2;

    Vec3 g1 = cotangent.col(0);
    Vec3 g2 = cotangent.col(1);
    Vec3 g3 = cotangent.col(2);

    // b3 = b1 x b2.
    Vec3 b1bar = g1 + b2.cross(g3);
    Vec3 b2bar = g2 + g3.cross(b1);

    // b2 = w2 / |w2|.
    Vec3 w2bar = (b2bar - b2 * b2bar.dot(b2)) / n2;

    // w2 = nu2 - (b1 . nu2) b1.
    Vec3 nu2bar = w2bar - b1 * b1.dot(w2bar);
    b1bar += -(b1.dot(w2bar)) * s.nu2 - d12 * w2bar;

    // b1 = nu1 / |nu1|.
    Vec3 nu1bar = (b1bar - b1 * b1bar.dot(b1)) / n1;
    return {nu1bar, nu2bar};
}

WeightedProcrustesResult weighted_procrustes(const Vec3& m1, const Vec3& m2,
                                             const std::array<double, 3>& weights) {
    for (double w : weights)
        if (w < 0.0) throw DataError("weighted_procrustes: negative weight");
    Mat3 a = Mat3::from_cols(m1 * weights[0], m2 * weights[1], Vec3{0.0, 0.0, 0.0});
    SVDFactors f = svd3(a);
    double s3 = (f.u * f.v.transpose()).det() >= 0.0 ? 1.0 : -1.0;
    WeightedProcrustesResult out;
    out.r = RotationMatrix::unchecked(f.u * Mat3::diag(1.0, 1.0, s3) *
                                      f.v.transpose());
    // Uniqueness of the trace maximizer needs sigma2 + sigma3 > 0 and, when
    // the sign correction is active, separated small singular values.
    double tol = 1e-12 * std::max(1.0, f.sigma[0]);
    if (f.sigma[1] + f.sigma[2] <= tol) out.non_unique = true;
    if (s3 < 0.0 && f.sigma[1] - f.sigma[2] <= tol) out.non_unique = true;
    return out;
}

std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h) {
    std::vector<double> g(x.size());
    std::vector<double> xp = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double orig = xp[i];
        xp[i] = orig + h;
        double fp = f(xp);
        xp[i] = orig - h;
        double fm = f(xp);
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

} // namespace rotkit
