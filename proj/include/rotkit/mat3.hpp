#pragma once

#include <array>
#include <cmath>

#include "rotkit/vec3.hpp"

namespace rotkit {

/// Dense 3x3 matrix of doubles, row-major storage.
struct Mat3 {
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};

    Mat3() = default;

    static Mat3 identity() {
        Mat3 r;
        r.m[0][0] = r.m[1][1] = r.m[2][2] = 1.0;
        return r;
    }

    static Mat3 zero() { return Mat3{}; }

    static Mat3 diag(double a, double b, double c) {
        Mat3 r;
        r.m[0][0] = a;
        r.m[1][1] = b;
        r.m[2][2] = c;
        return r;
    }

    static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
        Mat3 r;
        for (int j = 0; j < 3; ++j) {
            r.m[0][j] = r0[j];
            r.m[1][j] = r1[j];
            r.m[2][j] = r2[j];
        }
        return r;
    }

    static Mat3 from_cols(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
        Mat3 r;
        for (int i = 0; i < 3; ++i) {
            r.m[i][0] = c0[i];
            r.m[i][1] = c1[i];
            r.m[i][2] = c2[i];
        }
        return r;
    }

    double& operator()(int i, int j) { return m[i][j]; }
    double operator()(int i, int j) const { return m[i][j]; }

    Vec3 col(int j) const { return {m[0][j], m[1][j], m[2][j]}; }
    Vec3 row(int i) const { return {m[i][0], m[i][1], m[i][2]}; }

    void set_col(int j, const Vec3& v) {
        m[0][j] = v.x;
        m[1][j] = v.y;
        m[2][j] = v.z;
    }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] + o.m[i][j];
        return r;
    }

    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
        return r;
    }

    Mat3 operator*(double s) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] * s;
        return r;
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }

    Vec3 operator*(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }

    Mat3 transpose() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
        return r;
    }

    double trace() const { return m[0][0] + m[1][1] + m[2][2]; }

    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s += m[i][j] * m[i][j];
        return std::sqrt(s);
    }

    double max_abs() const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s = std::max(s, std::fabs(m[i][j]));
        return s;
    }

    bool all_finite() const {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (!std::isfinite(m[i][j])) return false;
        return true;
    }

    /// Column-major flattening. Preserves the Frobenius norm as the 2-norm
    /// of the result.
    std::array<double, 9> vec() const {
        return {m[0][0], m[1][0], m[2][0], m[0][1], m[1][1],
                m[2][1], m[0][2], m[1][2], m[2][2]};
    }

    static Mat3 from_vec(const double* v) {
        Mat3 r;
        for (int j = 0; j < 3; ++j)
            for (int i = 0; i < 3; ++i) r.m[i][j] = v[3 * j + i];
        return r;
    }
};

inline Mat3 operator*(double s, const Mat3& a) { return a * s; }

/// Frobenius inner product <A, B> = sum_ij A_ij B_ij.
inline double frobenius_dot(const Mat3& a, const Mat3& b) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += a.m[i][j] * b.m[i][j];
    return s;
}

/// Outer product a b^T.
inline Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.m[i][j] = a[i] * b[j];
    return r;
}

} // namespace rotkit
