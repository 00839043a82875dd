#pragma once

#include <span>
#include <string>
#include <vector>

#include "rotkit/representations.hpp"
#include "rotkit/so3.hpp"

namespace rotkit {

enum class MetricKind {
    l2,
    l1,
    cosine_dist,
    angular_dist,
    quat_pick_i,
    quat_pick_ii,
    euler_pick,
    chordal,
    chordal_sq,
    geodesic,
};

std::string metric_tag(MetricKind k);
MetricKind metric_kind_from_tag(const std::string& tag);

/// Metric tag plus evaluation parameters. `arccos_clamp` is the margin used
/// by differentiable geodesic/angular evaluation; plain evaluation clamps
/// the arccos argument to [-1, 1].
struct Metric {
    MetricKind kind = MetricKind::l2;
    double arccos_clamp = 1e-7;
};

// --- Vector measures -------------------------------------------------------

double l2_distance(std::span<const double> a, std::span<const double> b);
double l1_distance(std::span<const double> a, std::span<const double> b);
/// 1 - cos(angle between a and b), in [0, 2]. Rejects operands shorter than
/// 1e-12.
double cosine_distance(std::span<const double> a, std::span<const double> b);
/// arccos of the clamped cosine, in [0, pi]. Same operand requirements.
double angular_distance(std::span<const double> a, std::span<const double> b);

// --- Distance picking ------------------------------------------------------

/// min(|q1 - q2|, |q1 + q2|); vanishes on double-cover pairs.
double quat_pick_i(const UnitQuaternion& q1, const UnitQuaternion& q2);
/// 1 - |q1 . q2|, in [0, 1].
double quat_pick_ii(const UnitQuaternion& q1, const UnitQuaternion& q2);
/// Componentwise wrapped distance sqrt(sum d(a,b)^2) with
/// d(a,b) = min(|a-b|, 2pi-|a-b|). Requires canonical beta in [-pi/2, pi/2].
double euler_pick(const EulerXYZ& e1, const EulerXYZ& e2);

// --- Rotation-matrix metrics -----------------------------------------------

double chordal(const RotationMatrix& r1, const RotationMatrix& r2);
double chordal_sq(const RotationMatrix& r1, const RotationMatrix& r2);
/// Mean of squared chordal distances over paired sets.
double chordal_mse(const std::vector<RotationMatrix>& a,
                   const std::vector<RotationMatrix>& b);
/// arccos((tr(R1 R2^T) - 1) / 2), in [0, pi]. Plain evaluation.
double geodesic(const RotationMatrix& r1, const RotationMatrix& r2);

// --- Planar gradient fields --------------------------------------------------

struct Vec2 {
    double x = 0.0, y = 0.0;
};

struct FieldSample {
    Vec2 point;
    Vec2 neg_gradient;
    /// False where the analytic gradient is undefined (then neg_gradient is
    /// the zero vector).
    bool defined = true;
};

/// Per grid point, the negative gradient of d(y, target) for the vector
/// measures (l2, l1, cosine, angular). The target must lie on the unit
/// circle.
std::vector<FieldSample> gradient_field(MetricKind kind, const Vec2& target,
                                        const std::vector<Vec2>& grid);

} // namespace rotkit
