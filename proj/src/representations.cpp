#include "rotkit/representations.hpp"

#include <cmath>

#include "rotkit/errors.hpp"
#include "rotkit/projections.hpp"

namespace rotkit {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;

/// Wrap into [-pi, pi).
double wrap_angle(double a) {
    a = std::remainder(a, kTwoPi);
    if (a >= kPi) a -= kTwoPi; // remainder may return exactly +pi
    return a;
}

} // namespace

RepKind rep_kind(const Representation& r) {
    return static_cast<RepKind>(r.index());
}

std::string rep_tag(RepKind k) {
    switch (k) {
        case RepKind::euler: return "euler";
        case RepKind::exp: return "exp";
        case RepKind::axis_angle: return "axisangle";
        case RepKind::quat: return "quat";
        case RepKind::mrp: return "mrp";
        case RepKind::sixd: return "sixd";
        case RepKind::nined: return "nined";
        case RepKind::angle2d: return "angle";
        case RepKind::sincos2d: return "sincos";
    }
    throw ConfigError("unknown representation kind");
}

RepKind rep_kind_from_tag(const std::string& tag) {
    if (tag == "euler") return RepKind::euler;
    if (tag == "exp") return RepKind::exp;
    if (tag == "axisangle") return RepKind::axis_angle;
    if (tag == "quat") return RepKind::quat;
    if (tag == "mrp") return RepKind::mrp;
    if (tag == "sixd") return RepKind::sixd;
    if (tag == "nined") return RepKind::nined;
    if (tag == "angle") return RepKind::angle2d;
    if (tag == "sincos") return RepKind::sincos2d;
    throw ConfigError("unknown representation tag: " + tag);
}

int rep_dim(RepKind k) {
    switch (k) {
        case RepKind::euler: return 3;
        case RepKind::exp: return 3;
        case RepKind::axis_angle: return 4;
        case RepKind::quat: return 4;
        case RepKind::mrp: return 3;
        case RepKind::sixd: return 6;
        case RepKind::nined: return 9;
        case RepKind::angle2d: return 1;
        case RepKind::sincos2d: return 2;
    }
    throw ConfigError("unknown representation kind");
}

std::string rep_field_order(RepKind k) {
    switch (k) {
        case RepKind::euler: return "alpha,beta,gamma";
        case RepKind::exp: return "wx,wy,wz";
        case RepKind::axis_angle: return "ax,ay,az,angle";
        case RepKind::quat: return "w,x,y,z";
        case RepKind::mrp: return "px,py,pz";
        case RepKind::sixd: return "nu1x,nu1y,nu1z,nu2x,nu2y,nu2z";
        case RepKind::nined: return "m11,m21,m31,m12,m22,m32,m13,m23,m33";
        case RepKind::angle2d: return "alpha";
        case RepKind::sincos2d: return "c,s";
    }
    throw ConfigError("unknown representation kind");
}

// ---------------------------------------------------------------------------
// f maps
// ---------------------------------------------------------------------------

RotationMatrix euler_to_matrix(const EulerXYZ& e) {
    if (!(std::isfinite(e.alpha) && std::isfinite(e.beta) && std::isfinite(e.gamma)))
        throw DataError("euler_to_matrix: non-finite angle");
    return compose(rot_z(e.gamma), compose(rot_y(e.beta), rot_x(e.alpha)));
}

RotationMatrix quat_to_matrix(const UnitQuaternion& q) {
    double n = q.norm();
    if (std::fabs(n - 1.0) > 1e-6)
        throw DataError("quat_to_matrix: quaternion norm deviates from 1");
    double w = q.w / n, x = q.x / n, y = q.y / n, z = q.z / n;
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

RotationMatrix aa_to_matrix(const AxisAngle& aa) {
    if (std::fabs(aa.axis.norm() - 1.0) > 1e-6)
        throw DataError("aa_to_matrix: axis is not unit length");
    return exp_so3(aa.axis * aa.angle);
}

RotationMatrix exp_to_matrix(const ExpCoord& e) { return exp_so3(e.omega); }

RotationMatrix mrp_to_matrix(const MRP& m) { return aa_to_matrix(mrp_to_aa(m)); }

RotationMatrix sixd_to_matrix(const SixD& s) {
    double n1 = s.nu1.norm();
    double n2 = s.nu2.norm();
    if (n1 < 1e-12 || n2 < 1e-12)
        throw SingularInput("sixd_to_matrix: zero column");
    double sin_angle = s.nu1.cross(s.nu2).norm() / (n1 * n2);
    if (sin_angle < 1e-7)
        throw SingularInput("sixd_to_matrix: columns are parallel");
    Vec3 b1 = s.nu1 / n1;
    Vec3 w2 = s.nu2 - b1 * b1.dot(s.nu2);
    Vec3 b2 = w2.normalized();
    Vec3 b3 = b1.cross(b2);
    return RotationMatrix::unchecked(Mat3::from_cols(b1, b2, b3));
}

RotationMatrix nined_to_matrix(const NineD& n) { return svd_plus(n.m); }

RotationMatrix to_matrix(const Representation& r) {
    return std::visit(
        [](const auto& v) -> RotationMatrix {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, EulerXYZ>) return euler_to_matrix(v);
            else if constexpr (std::is_same_v<T, ExpCoord>) return exp_to_matrix(v);
            else if constexpr (std::is_same_v<T, AxisAngle>) return aa_to_matrix(v);
            else if constexpr (std::is_same_v<T, UnitQuaternion>) return quat_to_matrix(v);
            else if constexpr (std::is_same_v<T, MRP>) return mrp_to_matrix(v);
            else if constexpr (std::is_same_v<T, SixD>) return sixd_to_matrix(v);
            else if constexpr (std::is_same_v<T, NineD>) return nined_to_matrix(v);
            else throw DataError("to_matrix: planar representation has no 3D rotation");
        },
        r);
}

// ---------------------------------------------------------------------------
// g maps
// ---------------------------------------------------------------------------

EulerXYZ matrix_to_euler(const RotationMatrix& rot) {
    const Mat3& r = rot.matrix();
    EulerXYZ e;
    double sb = -r(2, 0);
    if (std::fabs(std::fabs(sb) - 1.0) <= 1e-9) {
        // Gimbal lock: only alpha -+ gamma is determined; fix gamma = 0.
        e.beta = sb > 0.0 ? kPi / 2.0 : -kPi / 2.0;
        e.gamma = 0.0;
        if (sb > 0.0)
            e.alpha = std::atan2(r(0, 1), r(0, 2));
        else
            e.alpha = std::atan2(-r(0, 1), -r(0, 2));
    } else {
        e.beta = std::asin(std::clamp(sb, -1.0, 1.0));
        e.alpha = std::atan2(r(2, 1), r(2, 2));
        e.gamma = std::atan2(r(1, 0), r(0, 0));
    }
    e.alpha = wrap_angle(e.alpha);
    e.gamma = wrap_angle(e.gamma);
    return e;
}

UnitQuaternion matrix_to_quat_raw(const RotationMatrix& rot) {
    const Mat3& r = rot.matrix();
    // Branch on the largest of trace and diagonal entries for stability.
    double t = r.trace();
    UnitQuaternion q;
    if (t > r(0, 0) && t > r(1, 1) && t > r(2, 2)) {
        double s = std::sqrt(t + 1.0) * 2.0;
        q.w = 0.25 * s;
        q.x = (r(2, 1) - r(1, 2)) / s;
        q.y = (r(0, 2) - r(2, 0)) / s;
        q.z = (r(1, 0) - r(0, 1)) / s;
    } else if (r(0, 0) > r(1, 1) && r(0, 0) > r(2, 2)) {
        double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
        q.w = (r(2, 1) - r(1, 2)) / s;
        q.x = 0.25 * s;
        q.y = (r(0, 1) + r(1, 0)) / s;
        q.z = (r(0, 2) + r(2, 0)) / s;
    } else if (r(1, 1) > r(2, 2)) {
        double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
        q.w = (r(0, 2) - r(2, 0)) / s;
        q.x = (r(0, 1) + r(1, 0)) / s;
        q.y = 0.25 * s;
        q.z = (r(1, 2) + r(2, 1)) / s;
    } else {
        double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
        q.w = (r(1, 0) - r(0, 1)) / s;
        q.x = (r(0, 2) + r(2, 0)) / s;
        q.y = (r(1, 2) + r(2, 1)) / s;
        q.z = 0.25 * s;
    }
    double n = q.norm();
    q.w /= n;
    q.x /= n;
    q.y /= n;
    q.z /= n;
    return q;
}

UnitQuaternion matrix_to_quat(const RotationMatrix& rot) {
    return std::get<UnitQuaternion>(halfspace_map(matrix_to_quat_raw(rot)));
}

AxisAngle matrix_to_aa(const RotationMatrix& r) {
    Vec3 w = log_so3(r);
    double angle = w.norm();
    AxisAngle aa;
    aa.angle = angle;
    aa.axis = angle > 0.0 ? w / angle : Vec3{1.0, 0.0, 0.0};
    return aa;
}

ExpCoord matrix_to_exp(const RotationMatrix& r) { return ExpCoord{log_so3(r)}; }

MRP matrix_to_mrp(const RotationMatrix& r) { return aa_to_mrp(matrix_to_aa(r)); }

SixD matrix_to_sixd(const RotationMatrix& r) {
    return SixD{r.col(0), r.col(1)};
}

NineD matrix_to_nined(const RotationMatrix& r) { return NineD{r.matrix()}; }

Representation from_matrix(RepKind k, const RotationMatrix& r) {
    switch (k) {
        case RepKind::euler: return matrix_to_euler(r);
        case RepKind::exp: return matrix_to_exp(r);
        case RepKind::axis_angle: return matrix_to_aa(r);
        case RepKind::quat: return matrix_to_quat(r);
        case RepKind::mrp: return matrix_to_mrp(r);
        case RepKind::sixd: return matrix_to_sixd(r);
        case RepKind::nined: return matrix_to_nined(r);
        default:
            throw DataError("from_matrix: planar representation has no 3D rotation");
    }
}

// ---------------------------------------------------------------------------
// Axis-style conversions
// ---------------------------------------------------------------------------

AxisAngle exp_to_aa(const ExpCoord& e) {
    double n = e.omega.norm();
    AxisAngle aa;
    aa.angle = n;
    aa.axis = n > 0.0 ? e.omega / n : Vec3{1.0, 0.0, 0.0};
    return aa;
}

ExpCoord aa_to_exp(const AxisAngle& aa) { return ExpCoord{aa.axis * aa.angle}; }

AxisAngle mrp_to_aa(const MRP& m) {
    double n = m.p.norm();
    AxisAngle aa;
    aa.angle = 4.0 * std::atan(n);
    aa.axis = n > 0.0 ? m.p / n : Vec3{1.0, 0.0, 0.0};
    return aa;
}

MRP aa_to_mrp(const AxisAngle& aa) {
    return MRP{aa.axis * std::tan(aa.angle / 4.0)};
}

// ---------------------------------------------------------------------------
// Double cover / half-space
// ---------------------------------------------------------------------------

Representation double_cover_partner(const Representation& r) {
    if (const auto* q = std::get_if<UnitQuaternion>(&r)) return q->negated();
    if (const auto* e = std::get_if<ExpCoord>(&r)) {
        double n = e->omega.norm();
        if (n <= 0.0)
            throw DataError("double_cover_partner: undefined at omega = 0");
        if (n >= kTwoPi)
            throw DataError("double_cover_partner: |omega| must be below 2*pi");
        return ExpCoord{e->omega * ((n - kTwoPi) / n)};
    }
    if (const auto* aa = std::get_if<AxisAngle>(&r))
        return AxisAngle{-aa->axis, -aa->angle};
    throw DataError("double_cover_partner: representation has no double cover partner");
}

bool is_canonical_quat(const UnitQuaternion& q) {
    if (q.w > 0.0) return true;
    if (q.w < 0.0) return false;
    for (double c : {q.x, q.y, q.z}) {
        if (c > 0.0) return true;
        if (c < 0.0) return false;
    }
    return true; // all-zero never occurs for unit quaternions
}

Representation halfspace_map(const Representation& r) {
    if (const auto* q = std::get_if<UnitQuaternion>(&r))
        return is_canonical_quat(*q) ? *q : q->negated();
    if (const auto* e = std::get_if<ExpCoord>(&r)) {
        double n = e->omega.norm();
        if (n <= kPi) return *e;
        double m = std::fmod(n, kTwoPi);
        double target = m > kPi ? m - kTwoPi : m; // signed length along omega-hat
        return ExpCoord{e->omega * (target / n)};
    }
    if (const auto* aa = std::get_if<AxisAngle>(&r)) {
        double a = std::remainder(aa->angle, kTwoPi);
        if (a >= 0.0 && a <= kPi && a == aa->angle) return *aa;
        if (a < 0.0) return AxisAngle{-aa->axis, -a};
        return AxisAngle{aa->axis, a};
    }
    throw DataError("halfspace_map: unsupported representation");
}

bool is_small_rotation(const RotationMatrix& r) {
    double d = (Mat3::identity() - r.matrix()).frobenius_norm();
    return d <= std::sqrt(2.0) + 1e-12;
}

// ---------------------------------------------------------------------------
// Quaternion data augmentation
// ---------------------------------------------------------------------------

void augment_quaternion_dataset(std::vector<UnitQuaternion>& quats,
                                std::vector<std::vector<double>>& features,
                                double epsilon) {
    if (quats.size() != features.size())
        throw DataError("augment_quaternion_dataset: size mismatch");
    std::size_t n = quats.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_canonical_quat(quats[i]))
            throw DataError("augment_quaternion_dataset: non-canonical quaternion");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (quats[i].w < epsilon) {
            quats.push_back(quats[i].negated());
            features.push_back(features[i]);
        }
    }
}

void batch_augment_quaternions(std::vector<UnitQuaternion>& batch, Rng& rng,
                               double epsilon, double flip_prob) {
    for (auto& q : batch) {
        if (!is_canonical_quat(q))
            throw DataError("batch_augment_quaternions: non-canonical quaternion");
    }
    for (auto& q : batch) {
        double u = rng.uniform();
        if (q.w < epsilon && u < flip_prob) q = q.negated();
    }
}

// ---------------------------------------------------------------------------
// Planar pair
// ---------------------------------------------------------------------------

SinCos2D angle_to_sincos(const Angle2D& a) {
    if (!std::isfinite(a.alpha)) throw DataError("angle_to_sincos: non-finite angle");
    return {std::cos(a.alpha), std::sin(a.alpha)};
}

Angle2D sincos_to_angle(const SinCos2D& s) {
    if (std::fabs(s.c * s.c + s.s * s.s - 1.0) > 1e-9)
        throw DataError("sincos_to_angle: pair is not on the unit circle");
    return Angle2D{wrap_angle(std::atan2(s.s, s.c))};
}

// ---------------------------------------------------------------------------
// Vector packing
// ---------------------------------------------------------------------------

std::vector<double> rep_to_vector(const Representation& r) {
    return std::visit(
        [](const auto& v) -> std::vector<double> {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, EulerXYZ>)
                return {v.alpha, v.beta, v.gamma};
            else if constexpr (std::is_same_v<T, ExpCoord>)
                return {v.omega.x, v.omega.y, v.omega.z};
            else if constexpr (std::is_same_v<T, AxisAngle>)
                return {v.axis.x, v.axis.y, v.axis.z, v.angle};
            else if constexpr (std::is_same_v<T, UnitQuaternion>)
                return {v.w, v.x, v.y, v.z};
            else if constexpr (std::is_same_v<T, MRP>)
                return {v.p.x, v.p.y, v.p.z};
            else if constexpr (std::is_same_v<T, SixD>)
                return {v.nu1.x, v.nu1.y, v.nu1.z, v.nu2.x, v.nu2.y, v.nu2.z};
            else if constexpr (std::is_same_v<T, NineD>) {
                auto a = v.m.vec();
                return std::vector<double>(a.begin(), a.end());
            } else if constexpr (std::is_same_v<T, Angle2D>)
                return {v.alpha};
            else
                return {v.c, v.s};
        },
        r);
}

Representation rep_from_vector(RepKind k, const std::vector<double>& v) {
    if (static_cast<int>(v.size()) != rep_dim(k))
        throw DataError("rep_from_vector: wrong component count");
    switch (k) {
        case RepKind::euler: return EulerXYZ{v[0], v[1], v[2]};
        case RepKind::exp: return ExpCoord{{v[0], v[1], v[2]}};
        case RepKind::axis_angle: return AxisAngle{{v[0], v[1], v[2]}, v[3]};
        case RepKind::quat: return UnitQuaternion{v[0], v[1], v[2], v[3]};
        case RepKind::mrp: return MRP{{v[0], v[1], v[2]}};
        case RepKind::sixd: return SixD{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}};
        case RepKind::nined: return NineD{Mat3::from_vec(v.data())};
        case RepKind::angle2d: return Angle2D{v[0]};
        case RepKind::sincos2d: return SinCos2D{v[0], v[1]};
    }
    throw ConfigError("unknown representation kind");
}

} // namespace rotkit
