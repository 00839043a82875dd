#pragma once

#include <string>
#include <variant>
#include <vector>

#include "rotkit/rng.hpp"
#include "rotkit/so3.hpp"

namespace rotkit {

// ---------------------------------------------------------------------------
// Representation value types
// ---------------------------------------------------------------------------

/// Three angles, applied as R = Rz(gamma) * Ry(beta) * Rx(alpha).
/// Canonical extraction keeps alpha, gamma in [-pi, pi) and beta in
/// [-pi/2, pi/2].
struct EulerXYZ {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
};

/// Rotation axis scaled by the angle; canonical form has |omega| <= pi.
struct ExpCoord {
    Vec3 omega;
};

/// Unit axis plus separate angle; canonical form has angle in [0, pi].
struct AxisAngle {
    Vec3 axis{1.0, 0.0, 0.0};
    double angle = 0.0;
};

/// Scalar-first unit quaternion. Canonical form has w >= 0; ties at w = 0
/// are broken by making the first nonzero of (x, y, z) positive.
struct UnitQuaternion {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    UnitQuaternion negated() const { return {-w, -x, -y, -z}; }
    double dot(const UnitQuaternion& o) const {
        return w * o.w + x * o.x + y * o.y + z * o.z;
    }
    double norm() const { return std::sqrt(dot(*this)); }
};

/// Modified Rodrigues parameters p = tan(angle / 4) * axis; canonical form
/// has |p| <= 1.
struct MRP {
    Vec3 p;
};

/// Two matrix columns; orthonormalization completes the frame.
struct SixD {
    Vec3 nu1{1.0, 0.0, 0.0};
    Vec3 nu2{0.0, 1.0, 0.0};
};

/// Unconstrained 3x3 matrix, projected onto the rotation group by svd_plus.
struct NineD {
    Mat3 m = Mat3::identity();
};

/// Planar rotation angle (radians).
struct Angle2D {
    double alpha = 0.0;
};

/// Cosine/sine pair with c^2 + s^2 = 1.
struct SinCos2D {
    double c = 1.0, s = 0.0;
};

using Representation = std::variant<EulerXYZ, ExpCoord, AxisAngle,
                                    UnitQuaternion, MRP, SixD, NineD,
                                    Angle2D, SinCos2D>;

enum class RepKind {
    euler,
    exp,
    axis_angle,
    quat,
    mrp,
    sixd,
    nined,
    angle2d,
    sincos2d,
};

RepKind rep_kind(const Representation& r);
std::string rep_tag(RepKind k);
RepKind rep_kind_from_tag(const std::string& tag);
int rep_dim(RepKind k);
/// Field names in vector order, e.g. "w,x,y,z" for quaternions.
std::string rep_field_order(RepKind k);

// ---------------------------------------------------------------------------
// f maps (representation -> rotation)
// ---------------------------------------------------------------------------

RotationMatrix euler_to_matrix(const EulerXYZ& e);
/// Rejects norm deviations above 1e-6.
RotationMatrix quat_to_matrix(const UnitQuaternion& q);
/// aa_to_matrix(axis, angle) = exp_so3(angle * axis); axis must be unit.
RotationMatrix aa_to_matrix(const AxisAngle& aa);
RotationMatrix exp_to_matrix(const ExpCoord& e);
RotationMatrix mrp_to_matrix(const MRP& m);
/// Gram-Schmidt completion: normalize nu1, orthogonalize nu2 against it,
/// close the frame with the cross product. Throws SingularInput when
/// |nu1| < 1e-12 or sin(angle(nu1, nu2)) < 1e-7.
RotationMatrix sixd_to_matrix(const SixD& s);
/// Projection of the free matrix onto the rotation group (svd_plus).
RotationMatrix nined_to_matrix(const NineD& n);

/// Dispatch over the variant; Angle2D/SinCos2D are rejected (planar).
RotationMatrix to_matrix(const Representation& r);

// ---------------------------------------------------------------------------
// g maps (rotation -> representation, canonical output)
// ---------------------------------------------------------------------------

/// Inverse of euler_to_matrix with canonical ranges. Gimbal lock
/// (|beta| = pi/2) resolves with gamma = 0 and the remainder folded into
/// alpha.
EulerXYZ matrix_to_euler(const RotationMatrix& r);
/// Stability-branched extraction (largest of trace/diagonal), canonicalized.
UnitQuaternion matrix_to_quat(const RotationMatrix& r);
/// Extraction without the canonical sign map; the sign falls out of the
/// branch choice. Used where the half-space map is deliberately skipped.
UnitQuaternion matrix_to_quat_raw(const RotationMatrix& r);
/// Angle in [0, pi]; the axis at angle 0 is (1, 0, 0) by convention.
AxisAngle matrix_to_aa(const RotationMatrix& r);
ExpCoord matrix_to_exp(const RotationMatrix& r);
MRP matrix_to_mrp(const RotationMatrix& r);
/// First two columns.
SixD matrix_to_sixd(const RotationMatrix& r);
/// Identity copy.
NineD matrix_to_nined(const RotationMatrix& r);

Representation from_matrix(RepKind k, const RotationMatrix& r);

// ---------------------------------------------------------------------------
// Mutual conversions between the axis-style forms
// ---------------------------------------------------------------------------

AxisAngle exp_to_aa(const ExpCoord& e);
ExpCoord aa_to_exp(const AxisAngle& aa);
AxisAngle mrp_to_aa(const MRP& m);
MRP aa_to_mrp(const AxisAngle& aa);

// ---------------------------------------------------------------------------
// Double cover and half-space canonicalization
// ---------------------------------------------------------------------------

/// The second preimage of the same rotation: -q for quaternions,
/// (|w| - 2pi) w-hat for exponential coordinates (requires 0 < |w| < 2pi),
/// (-axis, -angle) for axis-angle. Other variants are rejected.
Representation double_cover_partner(const Representation& r);

/// Canonicalizes quaternion / exponential-coordinate / axis-angle values to
/// their canonical half without changing the rotation. Idempotent.
Representation halfspace_map(const Representation& r);

/// True iff the value already lies in the canonical half.
bool is_canonical_quat(const UnitQuaternion& q);

/// |I - R|_F <= sqrt(2) (+1e-12 slack), i.e. rotation angle <= pi/3.
bool is_small_rotation(const RotationMatrix& r);

// ---------------------------------------------------------------------------
// Quaternion data augmentation
// ---------------------------------------------------------------------------

/// Duplicates every canonical quaternion with scalar part below epsilon as
/// its negation, appending the copied feature row. Original order preserved;
/// non-canonical inputs rejected.
void augment_quaternion_dataset(std::vector<UnitQuaternion>& quats,
                                std::vector<std::vector<double>>& features,
                                double epsilon);

/// In-place sign flip with probability flip_prob for batch entries whose
/// scalar part is below epsilon.
void batch_augment_quaternions(std::vector<UnitQuaternion>& batch, Rng& rng,
                               double epsilon, double flip_prob);

// ---------------------------------------------------------------------------
// Planar pair
// ---------------------------------------------------------------------------

SinCos2D angle_to_sincos(const Angle2D& a);
/// Principal value in [-pi, pi).
Angle2D sincos_to_angle(const SinCos2D& s);

// ---------------------------------------------------------------------------
// Flat vector packing (network inputs/outputs, CSV rows)
// ---------------------------------------------------------------------------

std::vector<double> rep_to_vector(const Representation& r);
Representation rep_from_vector(RepKind k, const std::vector<double>& v);

} // namespace rotkit
