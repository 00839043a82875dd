#pragma once

#include <array>

#include "rotkit/mat3.hpp"
#include "rotkit/rng.hpp"
#include "rotkit/vec3.hpp"

namespace rotkit {

/// Proper rotation: 3x3 matrix with orthonormal columns m1, m2, m3 spanning a
/// right-handed frame (m3 = m1 x m2, det = +1). Construct through the
/// factories or the maps below; `checked` enforces the invariants.
class RotationMatrix {
  public:
    RotationMatrix() : m_(Mat3::identity()) {}

    /// Wraps without validation. Caller guarantees the invariants.
    static RotationMatrix unchecked(const Mat3& m) { return RotationMatrix(m); }

    /// Validates against `is_rotation` and throws DataError on failure.
    static RotationMatrix checked(const Mat3& m, double tol = 1e-9);

    static RotationMatrix identity() { return RotationMatrix(); }

    const Mat3& matrix() const { return m_; }
    Vec3 col(int j) const { return m_.col(j); }
    double operator()(int i, int j) const { return m_(i, j); }

    std::array<double, 9> vec() const { return m_.vec(); }

  private:
    explicit RotationMatrix(const Mat3& m) : m_(m) {}
    Mat3 m_;
};

/// True iff m satisfies all rotation-matrix invariants within tol:
/// unit columns, m3 = m1 x m2, det = 1.
bool is_rotation(const Mat3& m, double tol = 1e-9);

/// Matrix product r1 * r2.
RotationMatrix compose(const RotationMatrix& r1, const RotationMatrix& r2);

/// Transpose.
RotationMatrix inverse(const RotationMatrix& r);

/// Cross-product matrix [v]x with hat(v) * w = v x w.
Mat3 hat(const Vec3& v);

/// Inverse of hat. Rejects inputs whose asymmetry exceeds 1e-6.
Vec3 vee(const Mat3& s);

/// Rodrigues formula R = I + sin(a) K + (1 - cos(a)) K^2 with a = |omega| and
/// K = hat(omega / a). Uses a Taylor branch below |omega| = 1e-8 so the
/// removable singularity at zero costs no precision.
RotationMatrix exp_so3(const Vec3& omega);

/// Principal matrix logarithm, |result| <= pi. The axis near angle pi is
/// recovered from the symmetric part (R + I) / 2 with the sign chosen so the
/// largest-magnitude component is positive.
Vec3 log_so3(const RotationMatrix& r);

/// Haar-uniform rotation from four independent standard normal draws
/// normalized to a unit quaternion.
RotationMatrix sample_uniform(Rng& rng);

/// Elementary rotations about the coordinate axes.
RotationMatrix rot_x(double angle);
RotationMatrix rot_y(double angle);
RotationMatrix rot_z(double angle);

/// Frobenius norm of r1 - r2 (defined here; the metrics module re-exports it).
double chordal_distance(const RotationMatrix& r1, const RotationMatrix& r2);

} // namespace rotkit
