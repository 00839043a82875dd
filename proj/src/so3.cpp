#include "rotkit/so3.hpp"

#include <cmath>

#include "rotkit/errors.hpp"

namespace rotkit {

bool is_rotation(const Mat3& m, double tol) {
    if (!m.all_finite()) return false;
    Vec3 c0 = m.col(0), c1 = m.col(1), c2 = m.col(2);
    if (std::fabs(c0.norm() - 1.0) > tol) return false;
    if (std::fabs(c1.norm() - 1.0) > tol) return false;
    if (std::fabs(c2.norm() - 1.0) > tol) return false;
    if ((c0.cross(c1) - c2).norm() > tol) return false;
    // Implied by the above; checked independently.
    if (std::fabs(m.det() - 1.0) > tol) return false;
    return true;
}

RotationMatrix RotationMatrix::checked(const Mat3& m, double tol) {
    if (!is_rotation(m, tol)) throw DataError("matrix violates rotation invariants");
    return RotationMatrix(m);
}

RotationMatrix compose(const RotationMatrix& r1, const RotationMatrix& r2) {
    return RotationMatrix::unchecked(r1.matrix() * r2.matrix());
}

RotationMatrix inverse(const RotationMatrix& r) {
    return RotationMatrix::unchecked(r.matrix().transpose());
}

Mat3 hat(const Vec3& v) {
    Mat3 s;
    s(0, 1) = -v.z;
    s(0, 2) = v.y;
    s(1, 0) = v.z;
    s(1, 2) = -v.x;
    s(2, 0) = -v.y;
    s(2, 1) = v.x;
    return s;
}

Vec3 vee(const Mat3& s) {
    double asym = std::fabs(s(0, 0)) + std::fabs(s(1, 1)) + std::fabs(s(2, 2)) +
                  std::fabs(s(0, 1) + s(1, 0)) + std::fabs(s(0, 2) + s(2, 0)) +
                  std::fabs(s(1, 2) + s(2, 1));
    if (asym > 1e-6) throw DataError("vee: input is not skew-symmetric");
    return {0.5 * (s(2, 1) - s(1, 2)), 0.5 * (s(0, 2) - s(2, 0)),
            0.5 * (s(1, 0) - s(0, 1))};
}

RotationMatrix exp_so3(const Vec3& omega) {
    double a = omega.norm();
    double sa_over_a, omc_over_a2; // sin(a)/a and (1-cos(a))/a^2
    if (a < 1e-8) {
        double a2 = a * a;
        sa_over_a = 1.0 - a2 / 6.0;
        omc_over_a2 = 0.5 - a2 / 24.0;
    } else {
        sa_over_a = std::sin(a) / a;
        omc_over_a2 = (1.0 - std::cos(a)) / (a * a);
    }
    Mat3 k = hat(omega);
    Mat3 r = Mat3::identity() + sa_over_a * k + omc_over_a2 * (k * k);
    return RotationMatrix::unchecked(r);
}

Vec3 log_so3(const RotationMatrix& rot) {
    const Mat3& r = rot.matrix();
    // sin/cos of the angle from the skew part and the trace; atan2 is
    // well-conditioned over the whole range.
    Vec3 w{0.5 * (r(2, 1) - r(1, 2)), 0.5 * (r(0, 2) - r(2, 0)),
           0.5 * (r(1, 0) - r(0, 1))};
    double s = w.norm();                              // |sin(angle)|
    double c = 0.5 * (r.trace() - 1.0);               // cos(angle)
    double angle = std::atan2(s, c);

    if (angle < 1e-7) {
        // w = sin(a) * axis; sin(a)/a ~ 1 here.
        return w * (1.0 + angle * angle / 6.0);
    }
    if (s > 1e-6) {
        return w * (angle / s);
    }
    // Near angle = pi the skew part degenerates; recover the axis from the
    // symmetric part (R + I) / 2 = axis axis^T.
    Vec3 axis;
    axis.x = std::sqrt(std::max(0.0, 0.5 * (r(0, 0) + 1.0)));
    axis.y = std::sqrt(std::max(0.0, 0.5 * (r(1, 1) + 1.0)));
    axis.z = std::sqrt(std::max(0.0, 0.5 * (r(2, 2) + 1.0)));
    // Off-diagonal entries of axis axis^T fix the relative signs; anchor on
    // the largest component.
    int k = 0;
    if (axis.y > axis[k]) k = 1;
    if (axis.z > axis[k]) k = 2;
    double off01 = 0.5 * (r(0, 1) + r(1, 0));
    double off02 = 0.5 * (r(0, 2) + r(2, 0));
    double off12 = 0.5 * (r(1, 2) + r(2, 1));
    if (k == 0) {
        if (off01 < 0.0) axis.y = -axis.y;
        if (off02 < 0.0) axis.z = -axis.z;
    } else if (k == 1) {
        if (off01 < 0.0) axis.x = -axis.x;
        if (off12 < 0.0) axis.z = -axis.z;
    } else {
        if (off02 < 0.0) axis.x = -axis.x;
        if (off12 < 0.0) axis.y = -axis.y;
    }
    // Anchoring on k keeps the largest-magnitude component positive, which
    // resolves the sign ambiguity at exactly pi. Just below pi the skew part
    // still carries the true sign.
    axis = axis.normalized();
    if (s > 0.0 && w.dot(axis) < 0.0) axis = -axis;
    return axis * angle;
}

RotationMatrix sample_uniform(Rng& rng) {
    double q[4];
    double n = 0.0;
    do {
        for (double& qi : q) qi = rng.normal();
        n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    } while (n < 1e-12);
    double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
    Mat3 r;
    r(0, 0) = 1.0 - 2.0 * (y * y + z * z);
    r(0, 1) = 2.0 * (x * y - z * w);
    r(0, 2) = 2.0 * (x * z + y * w);
    r(1, 0) = 2.0 * (x * y + z * w);
    r(1, 1) = 1.0 - 2.0 * (x * x + z * z);
    r(1, 2) = 2.0 * (y * z - x * w);
    r(2, 0) = 2.0 * (x * z - y * w);
    r(2, 1) = 2.0 * (y * z + x * w);
    r(2, 2) = 1.0 - 2.0 * (x * x + y * y);
    return RotationMatrix::unchecked(r);
}

RotationMatrix rot_x(double a) { return exp_so3({a, 0.0, 0.0}); }
RotationMatrix rot_y(double a) { return exp_so3({0.0, a, 0.0}); }
RotationMatrix rot_z(double a) { return exp_so3({0.0, 0.0, a}); }

double chordal_distance(const RotationMatrix& r1, const RotationMatrix& r2) {
    return (r1.matrix() - r2.matrix()).frobenius_norm();
}

} // namespace rotkit
