#include "rotkit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rotkit/errors.hpp"

namespace rotkit {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;
} // namespace

std::string metric_tag(MetricKind k) {
    switch (k) {
        case MetricKind::l2: return "l2";
        case MetricKind::l1: return "l1";
        case MetricKind::cosine_dist: return "cosine";
        case MetricKind::angular_dist: return "angular";
        case MetricKind::quat_pick_i: return "quatpick1";
        case MetricKind::quat_pick_ii: return "quatpick2";
        case MetricKind::euler_pick: return "eulerpick";
        case MetricKind::chordal: return "chordal";
        case MetricKind::chordal_sq: return "chordalsq";
        case MetricKind::geodesic: return "geodesic";
    }
    throw ConfigError("unknown metric kind");
}

MetricKind metric_kind_from_tag(const std::string& tag) {
    if (tag == "l2") return MetricKind::l2;
    if (tag == "l1") return MetricKind::l1;
    if (tag == "cosine") return MetricKind::cosine_dist;
    if (tag == "angular") return MetricKind::angular_dist;
    if (tag == "quatpick1") return MetricKind::quat_pick_i;
    if (tag == "quatpick2") return MetricKind::quat_pick_ii;
    if (tag == "eulerpick") return MetricKind::euler_pick;
    if (tag == "chordal") return MetricKind::chordal;
    if (tag == "chordalsq") return MetricKind::chordal_sq;
    if (tag == "geodesic") return MetricKind::geodesic;
    throw ConfigError("unknown metric tag: " + tag);
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("l2_distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("l1_distance: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

namespace {

double cos_between(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("cosine: size mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na <= 1e-12 || nb <= 1e-12)
        throw DataError("cosine: zero-length operand");
    return dot / (na * nb);
}

} // namespace

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    return 1.0 - cos_between(a, b);
}

double angular_distance(std::span<const double> a, std::span<const double> b) {
    return std::acos(std::clamp(cos_between(a, b), -1.0, 1.0));
}

double quat_pick_i(const UnitQuaternion& q1, const UnitQuaternion& q2) {
    double dm = 0.0, dp = 0.0;
    const double a[4] = {q1.w, q1.x, q1.y, q1.z};
    const double b[4] = {q2.w, q2.x, q2.y, q2.z};
    for (int i = 0; i < 4; ++i) {
        dm += (a[i] - b[i]) * (a[i] - b[i]);
        dp += (a[i] + b[i]) * (a[i] + b[i]);
    }
    return std::sqrt(std::min(dm, dp));
}

double quat_pick_ii(const UnitQuaternion& q1, const UnitQuaternion& q2) {
    // Unit operands can round |dot| a hair above one; keep the range [0, 1].
    return std::max(0.0, 1.0 - std::fabs(q1.dot(q2)));
}

namespace {

double wrapped_component_distance(double a, double b) {
    double d = std::fabs(a - b);
    return std::min(d, kTwoPi - d);
}

} // namespace

double euler_pick(const EulerXYZ& e1, const EulerXYZ& e2) {
    if (std::fabs(e1.beta) > kPi / 2.0 + 1e-12 ||
        std::fabs(e2.beta) > kPi / 2.0 + 1e-12)
        throw DataError("euler_pick: beta outside canonical range");
    double da = wrapped_component_distance(e1.alpha, e2.alpha);
    double db = wrapped_component_distance(e1.beta, e2.beta);
    double dg = wrapped_component_distance(e1.gamma, e2.gamma);
    return std::sqrt(da * da + db * db + dg * dg);
}

double chordal(const RotationMatrix& r1, const RotationMatrix& r2) {
    return chordal_distance(r1, r2);
}

double chordal_sq(const RotationMatrix& r1, const RotationMatrix& r2) {
    double d = chordal_distance(r1, r2);
    return d * d;
}

double chordal_mse(const std::vector<RotationMatrix>& a,
                   const std::vector<RotationMatrix>& b) {
    if (a.size() != b.size() || a.empty())
        throw DataError("chordal_mse: sets must be nonempty and paired");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += chordal_sq(a[i], b[i]);
    return s / static_cast<double>(a.size());
}

double geodesic(const RotationMatrix& r1, const RotationMatrix& r2) {
    double t = (r1.matrix() * r2.matrix().transpose()).trace();
    return std::acos(std::clamp(0.5 * (t - 1.0), -1.0, 1.0));
}

std::vector<FieldSample> gradient_field(MetricKind kind, const Vec2& target,
                                        const std::vector<Vec2>& grid) {
    double zn = std::sqrt(target.x * target.x + target.y * target.y);
    if (std::fabs(zn - 1.0) > 1e-9)
        throw DataError("gradient_field: target must lie on the unit circle");
    if (kind != MetricKind::l2 && kind != MetricKind::l1 &&
        kind != MetricKind::cosine_dist && kind != MetricKind::angular_dist)
        throw ConfigError("gradient_field: metric has no planar field");

    std::vector<FieldSample> out;
    out.reserve(grid.size());
    for (const Vec2& y : grid) {
        FieldSample s;
        s.point = y;
        double gx = 0.0, gy = 0.0;
        bool defined = true;
        double dx = y.x - target.x, dy = y.y - target.y;
        double n = std::sqrt(y.x * y.x + y.y * y.y);
        switch (kind) {
            case MetricKind::l2: {
                double d = std::sqrt(dx * dx + dy * dy);
                if (d < 1e-12) {
                    defined = false;
                } else {
                    gx = dx / d;
                    gy = dy / d;
                }
                break;
            }
            case MetricKind::l1: {
                if (std::fabs(dx) < 1e-12 && std::fabs(dy) < 1e-12) {
                    defined = false;
                } else {
                    gx = dx > 0.0 ? 1.0 : (dx < 0.0 ? -1.0 : 0.0);
                    gy = dy > 0.0 ? 1.0 : (dy < 0.0 ? -1.0 : 0.0);
                }
                break;
            }
            case MetricKind::cosine_dist: {
                if (n < 1e-12) {
                    defined = false;
                } else {
                    // grad d = ((yhat . z) yhat - z) / |y|; zero at the
                    // antipode of the target.
                    double ux = y.x / n, uy = y.y / n;
                    double c = ux * target.x + uy * target.y;
                    gx = (c * ux - target.x) / n;
                    gy = (c * uy - target.y) / n;
                }
                break;
            }
            case MetricKind::angular_dist: {
                if (n < 1e-12) {
                    defined = false;
                } else {
                    double ux = y.x / n, uy = y.y / n;
                    double c = ux * target.x + uy * target.y;
                    double s2 = 1.0 - c * c;
                    if (s2 < 1e-24) {
                        // Aligned or antipodal: direction undefined.
                        defined = false;
                    } else {
                        double inv = 1.0 / (n * std::sqrt(s2));
                        gx = -(target.x - c * ux) * inv;
                        gy = -(target.y - c * uy) * inv;
                    }
                }
                break;
            }
            default:
                break;
        }
        if (!defined) {
            gx = 0.0;
            gy = 0.0;
        }
        s.neg_gradient = {-gx, -gy};
        s.defined = defined;
        out.push_back(s);
    }
    return out;
}

} // namespace rotkit
