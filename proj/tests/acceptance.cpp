// Acceptance gate: every release-blocking property of the toolkit, one
// criterion per line, with its tolerance pinned in code.
//
// Usage:
//   acceptance [--cli <rotkit binary>] [criterion numbers...]
//
// With no numbers, all criteria run. Exit 0 iff every selected criterion
// passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rotkit/autodiff.hpp"
#include "rotkit/csv.hpp"
#include "rotkit/errors.hpp"
#include "rotkit/experiments.hpp"
#include "rotkit/learn.hpp"
#include "rotkit/metrics.hpp"
#include "rotkit/projections.hpp"
#include "rotkit/representations.hpp"

using namespace rotkit;
namespace ex = rotkit::experiments;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string g_cli_path; // optional path to the command-line binary

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Check {
    Outcome& out;
    long failures = 0;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            if (out.pass) out.detail = what;
            out.pass = false;
        }
    }
};

double wall_seconds(const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// C1: left-inverse round trips for every 3D representation
// ---------------------------------------------------------------------------

Outcome c01_round_trips() {
    Outcome out;
    Check chk{out};
    const int n = 10000;
    double worst = 0.0;
    double secs = wall_seconds([&] {
        for (RepKind kind : {RepKind::euler, RepKind::exp, RepKind::axis_angle,
                             RepKind::quat, RepKind::mrp, RepKind::sixd,
                             RepKind::nined}) {
            Rng rng(101 + static_cast<uint64_t>(kind));
            for (int i = 0; i < n; ++i) {
                RotationMatrix r = sample_uniform(rng);
                double d = chordal_distance(to_matrix(from_matrix(kind, r)), r);
                worst = std::max(worst, d);
                chk.require(d < 1e-8, rep_tag(kind) + " round trip " + fmt(d));
            }
        }
    });
    chk.require(secs < 10.0, "runtime " + fmt(secs) + " s exceeds 10 s");
    if (out.pass)
        out.detail = "worst chordal " + fmt(worst) + ", " + fmt(secs) + " s";
    return out;
}

// ---------------------------------------------------------------------------
// C2: double-cover identities
// ---------------------------------------------------------------------------

Outcome c02_double_cover() {
    Outcome out;
    Check chk{out};
    Rng rng(202);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        UnitQuaternion q = matrix_to_quat(sample_uniform(rng));
        double dq = chordal_distance(quat_to_matrix(q), quat_to_matrix(q.negated()));

        Vec3 w = rng.unit_vector() * rng.uniform(0.01, 2.0 * kPi - 0.01);
        Vec3 partner = w * ((w.norm() - 2.0 * kPi) / w.norm());
        double dw = chordal_distance(exp_so3(w), exp_so3(partner));

        AxisAngle aa{rng.unit_vector(), rng.uniform(-kPi, kPi)};
        double da = chordal_distance(aa_to_matrix(aa),
                                     aa_to_matrix({-aa.axis, -aa.angle}));

        worst = std::max({worst, dq, dw, da});
        chk.require(dq < 1e-9, "quaternion cover " + fmt(dq));
        chk.require(dw < 1e-9, "exponential cover " + fmt(dw));
        chk.require(da < 1e-9, "axis-angle cover " + fmt(da));
    }
    if (out.pass) out.detail = "worst deviation " + fmt(worst);
    return out;
}

// ---------------------------------------------------------------------------
// C3: metric laws
// ---------------------------------------------------------------------------

Outcome c03_metric_laws() {
    Outcome out;
    Check chk{out};
    Rng rng(303);

    for (int i = 0; i < 1000; ++i) {
        std::vector<double> a(4), b(4), c(4);
        for (int j = 0; j < 4; ++j) {
            a[j] = rng.uniform(-2, 2);
            b[j] = rng.uniform(-2, 2);
            c[j] = rng.uniform(-2, 2);
        }
        RotationMatrix ra = sample_uniform(rng), rb = sample_uniform(rng),
                       rc = sample_uniform(rng);
        UnitQuaternion qa = matrix_to_quat(ra), qb = matrix_to_quat(rb);
        EulerXYZ ea = matrix_to_euler(ra), eb = matrix_to_euler(rb),
                 ec = matrix_to_euler(rc);

        // Nonnegativity, symmetry, self distance zero.
        chk.require(l2_distance(a, b) >= 0.0 &&
                        l2_distance(a, b) == l2_distance(b, a) &&
                        l2_distance(a, a) == 0.0,
                    "l2 laws");
        chk.require(l1_distance(a, b) >= 0.0 &&
                        l1_distance(a, b) == l1_distance(b, a) &&
                        l1_distance(a, a) == 0.0,
                    "l1 laws");
        chk.require(cosine_distance(a, b) >= 0.0 &&
                        cosine_distance(a, b) == cosine_distance(b, a) &&
                        cosine_distance(a, a) < 1e-12,
                    "cosine laws");
        chk.require(angular_distance(a, b) >= 0.0 &&
                        std::fabs(angular_distance(a, b) - angular_distance(b, a)) < 1e-15 &&
                        angular_distance(a, a) < 1e-6,
                    "angular laws");
        chk.require(quat_pick_i(qa, qb) >= 0.0 &&
                        quat_pick_i(qa, qb) == quat_pick_i(qb, qa) &&
                        quat_pick_i(qa, qa) == 0.0,
                    "pick-I laws");
        chk.require(quat_pick_ii(qa, qb) >= 0.0 &&
                        quat_pick_ii(qa, qb) == quat_pick_ii(qb, qa) &&
                        quat_pick_ii(qa, qa) < 1e-12,
                    "pick-II laws");
        chk.require(euler_pick(ea, eb) >= 0.0 &&
                        euler_pick(ea, eb) == euler_pick(eb, ea) &&
                        euler_pick(ea, ea) == 0.0,
                    "euler-pick laws");
        chk.require(chordal(ra, rb) >= 0.0 && chordal(ra, rb) == chordal(rb, ra) &&
                        chordal(ra, ra) == 0.0,
                    "chordal laws");
        chk.require(chordal_sq(ra, rb) >= 0.0 && chordal_sq(ra, ra) == 0.0,
                    "chordal-squared laws");
        chk.require(geodesic(ra, rb) >= 0.0 &&
                        std::fabs(geodesic(ra, rb) - geodesic(rb, ra)) < 1e-12 &&
                        geodesic(ra, ra) < 1e-6,
                    "geodesic laws");

        // Triangle inequality where claimed.
        chk.require(l2_distance(a, b) <= l2_distance(a, c) + l2_distance(c, b) + 1e-12,
                    "l2 triangle");
        chk.require(angular_distance(a, b) <=
                        angular_distance(a, c) + angular_distance(c, b) + 1e-9,
                    "angular triangle");
        chk.require(chordal(ra, rb) <= chordal(ra, rc) + chordal(rc, rb) + 1e-12,
                    "chordal triangle");
        chk.require(geodesic(ra, rb) <= geodesic(ra, rc) + geodesic(rc, rb) + 1e-9,
                    "geodesic triangle");
        chk.require(euler_pick(ea, eb) <= euler_pick(ea, ec) + euler_pick(ec, eb) + 1e-12,
                    "euler-pick triangle");

        // Double-cover identification.
        chk.require(quat_pick_i(qa, qa.negated()) == 0.0, "pick-I on (q,-q)");
        chk.require(quat_pick_ii(qa, qa.negated()) < 1e-15, "pick-II on (q,-q)");
    }

    // Ordering equivalence of cosine and angular distance.
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> u(3), v(3), w(3), ref(3);
        for (int j = 0; j < 3; ++j) {
            u[j] = rng.uniform(-1, 1);
            v[j] = rng.uniform(-1, 1);
            w[j] = rng.uniform(-1, 1);
            ref[j] = rng.uniform(-1, 1);
        }
        double nr = std::sqrt(ref[0] * ref[0] + ref[1] * ref[1] + ref[2] * ref[2]);
        if (nr < 1e-3) continue;
        auto cmp = [&](auto dist) {
            std::array<int, 3> idx{0, 1, 2};
            std::array<double, 3> d{dist(u, ref), dist(v, ref), dist(w, ref)};
            std::sort(idx.begin(), idx.end(),
                      [&](int x, int y) { return d[x] < d[y]; });
            return idx;
        };
        auto oc = cmp([](const auto& x, const auto& y) { return cosine_distance(x, y); });
        auto oa = cmp([](const auto& x, const auto& y) { return angular_distance(x, y); });
        chk.require(oc == oa, "ordering equivalence");
    }

    // Chordal maximum attained at the antipodal pair.
    double dmax = chordal(RotationMatrix::identity(), rot_z(kPi));
    chk.require(std::fabs(dmax - 2.0 * std::sqrt(2.0)) < 1e-12,
                "chordal max " + fmt(dmax));
    if (out.pass) out.detail = "chordal max " + fmt(dmax);
    return out;
}

// ---------------------------------------------------------------------------
// C4: projection optimality against random-rotation search
// ---------------------------------------------------------------------------

Outcome c04_procrustes_optimality() {
    Outcome out;
    Check chk{out};
    double secs = wall_seconds([&] {
        Rng cand_rng(404);
        std::vector<RotationMatrix> candidates;
        candidates.reserve(10000);
        for (int i = 0; i < 10000; ++i)
            candidates.push_back(sample_uniform(cand_rng));
        Rng rng(405);
        int tested = 0;
        double worst_margin = 0.0;
        while (tested < 1000) {
            Mat3 m = oracles::random_mat(rng, -1.0, 1.0);
            if (std::fabs(m.det()) <= 0.1) continue;
            ++tested;
            double best = (svd_plus(m).matrix() - m).frobenius_norm();
            for (const auto& r : candidates) {
                double d = (r.matrix() - m).frobenius_norm();
                worst_margin = std::max(worst_margin, best - d);
                chk.require(best <= d + 1e-9, "beaten by margin " + fmt(best - d));
            }
        }
        if (out.pass) out.detail = "worst margin " + fmt(worst_margin);
    });
    chk.require(secs < 60.0, "runtime " + fmt(secs) + " s exceeds 60 s");
    if (out.pass) out.detail += ", " + fmt(secs) + " s";
    return out;
}

// ---------------------------------------------------------------------------
// C5: orthonormalization as the vanishing-weight limit
// ---------------------------------------------------------------------------

Outcome c05_weighted_limit() {
    Outcome out;
    Check chk{out};
    Rng rng(505);
    int tested = 0;
    double worst = 0.0;
    while (tested < 1000) {
        SixD s{oracles::random_vec(rng, -2, 2), oracles::random_vec(rng, -2, 2)};
        double n1 = s.nu1.norm(), n2 = s.nu2.norm();
        if (n1 < 0.1 || n2 < 0.1) continue;
        if (s.nu1.cross(s.nu2).norm() / (n1 * n2) < 0.02) continue;
        ++tested;
        auto res = weighted_procrustes(s.nu1, s.nu2, {1.0, 1e-6, 0.0});
        double d = chordal_distance(gso(s), res.r);
        worst = std::max(worst, d);
        chk.require(d < 1e-4, "limit gap " + fmt(d));
    }
    if (out.pass) out.detail = "worst gap " + fmt(worst);
    return out;
}

// ---------------------------------------------------------------------------
// C6: gradient correctness of every differentiable primitive
// ---------------------------------------------------------------------------

Outcome c06_gradients() {
    Outcome out;
    Check chk{out};
    const double h = 1e-5, tol = 1e-4;

    auto fd_check = [&](const std::string& name, int dim, uint64_t seed,
                        const std::function<ad::NodeId(ad::Tape&, ad::NodeId)>& build,
                        const std::function<bool(const std::vector<double>&)>& ok,
                        double lo = -2.0, double hi = 2.0) {
        Rng rng(seed);
        int done = 0, guard = 0;
        while (done < 100 && ++guard < 100000) {
            std::vector<double> x(dim);
            for (double& v : x) v = rng.uniform(lo, hi);
            if (!ok(x)) continue;
            ++done;
            ad::Tape tape;
            ad::NodeId in = tape.input(x, 1, dim, true);
            ad::NodeId root = build(tape, in);
            tape.backward(root);
            auto adj = tape.adjoint(in);
            std::vector<double> ga(adj.begin(), adj.end());
            auto f = [&](const std::vector<double>& v) {
                ad::Tape t2;
                ad::NodeId i2 = t2.input(v, 1, dim, true);
                return t2.scalar(build(t2, i2));
            };
            auto gf = finite_diff_grad(f, x, h);
            double err = oracles::rel_err(ga, gf);
            chk.require(err < tol, name + " rel err " + fmt(err));
        }
        chk.require(done == 100, name + ": admissible points not found");
    };

    Rng trng(606);
    RotationMatrix rot_target = sample_uniform(trng);
    std::vector<double> t3{0.4, -0.7, 0.2};
    std::vector<double> t4;
    {
        UnitQuaternion q = matrix_to_quat(rot_target);
        t4 = {q.w, q.x, q.y, q.z};
    }

    auto always = [](const std::vector<double>&) { return true; };

    // Dense layer plus relu: weights, bias, and input perturbed together.
    {
        Rng rng(702);
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 2, in_d = 3, out_d = 2;
            std::vector<double> x(n * in_d + out_d * in_d + out_d);
            for (double& v : x) v = rng.uniform(-1.5, 1.5);
            auto build = [&](ad::Tape& t, const std::vector<double>& v,
                             ad::NodeId* xi, ad::NodeId* wi, ad::NodeId* bi) {
                std::vector<double> xs(v.begin(), v.begin() + n * in_d);
                std::vector<double> ws(v.begin() + n * in_d,
                                       v.begin() + n * in_d + out_d * in_d);
                std::vector<double> bs(v.end() - out_d, v.end());
                *xi = t.input(xs, n, in_d, true);
                *wi = t.input(ws, out_d, in_d, true);
                *bi = t.input(bs, 1, out_d, true);
                ad::NodeId y = t.relu(t.linear(*xi, *wi, *bi));
                std::vector<double> target(n * out_d, 0.2);
                return t.mse_to_const(y, target);
            };
            ad::Tape tape;
            ad::NodeId xi, wi, bi;
            ad::NodeId loss = build(tape, x, &xi, &wi, &bi);
            tape.backward(loss);
            std::vector<double> ga;
            for (ad::NodeId id : {xi, wi, bi}) {
                auto adj = tape.adjoint(id);
                ga.insert(ga.end(), adj.begin(), adj.end());
            }
            auto f = [&](const std::vector<double>& v) {
                ad::Tape t2;
                ad::NodeId a, b, c;
                return t2.scalar(build(t2, v, &a, &b, &c));
            };
            auto gf = finite_diff_grad(f, x, h);
            // Skip draws near relu kinks: recompute pre-activations.
            bool near_kink = false;
            for (int r = 0; r < n; ++r)
                for (int o = 0; o < out_d; ++o) {
                    double s = x[n * in_d + out_d * in_d + o];
                    for (int i = 0; i < in_d; ++i)
                        s += x[r * in_d + i] * x[n * in_d + o * in_d + i];
                    if (std::fabs(s) < 1e-3) near_kink = true;
                }
            if (near_kink) continue;
            double err = oracles::rel_err(ga, gf);
            chk.require(err < tol, "dense+relu rel err " + fmt(err));
        }
    }

    fd_check("mse", 4, 703,
             [&](ad::Tape& t, ad::NodeId in) { return t.mse_to_const(in, t4); },
             always);
    fd_check("mae", 3, 704,
             [&](ad::Tape& t, ad::NodeId in) { return t.mae_to_const(in, t3); },
             [&](const std::vector<double>& x) {
                 for (int i = 0; i < 3; ++i)
                     if (std::fabs(x[i] - t3[i]) < 1e-3) return false;
                 return true;
             });
    fd_check("l2", 3, 705,
             [&](ad::Tape& t, ad::NodeId in) { return t.l2_to_const(in, t3); },
             [&](const std::vector<double>& x) {
                 double d = 0;
                 for (int i = 0; i < 3; ++i) d += (x[i] - t3[i]) * (x[i] - t3[i]);
                 return d > 1e-3;
             });
    fd_check("cosine", 3, 706,
             [&](ad::Tape& t, ad::NodeId in) { return t.cosine_to_const(in, t3); },
             [](const std::vector<double>& x) {
                 return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) > 1e-2;
             });
    auto unit_ok = [&](const std::vector<double>& x) {
        double n = 0, dot = 0;
        for (int i = 0; i < 4; ++i) {
            n += x[i] * x[i];
            dot += x[i] * t4[i];
        }
        n = std::sqrt(n);
        return n > 1e-2 && std::fabs(dot / n) > 1e-3;
    };
    fd_check("quat pick-I", 4, 707,
             [&](ad::Tape& t, ad::NodeId in) {
                 return t.quat_pick_i_to_const(t.normalize(in), t4);
             },
             unit_ok);
    fd_check("quat pick-II", 4, 708,
             [&](ad::Tape& t, ad::NodeId in) {
                 return t.quat_pick_ii_to_const(t.normalize(in), t4);
             },
             unit_ok);
    fd_check("picking combinator", 3, 709,
             [&](ad::Tape& t, ad::NodeId in) {
                 std::vector<double> neg(t3);
                 for (double& v : neg) v = -v;
                 return t.pick_min(t.mse_to_const(in, t3), t.mse_to_const(in, neg));
             },
             [&](const std::vector<double>& x) {
                 double dp = 0, dm = 0;
                 for (int i = 0; i < 3; ++i) {
                     dp += (x[i] - t3[i]) * (x[i] - t3[i]);
                     dm += (x[i] + t3[i]) * (x[i] + t3[i]);
                 }
                 return std::fabs(dp - dm) > 1e-3;
             });
    fd_check("quaternion chordal head", 4, 710,
             [&](ad::Tape& t, ad::NodeId in) {
                 return t.l2_to_const(t.quat_to_mat9(t.normalize(in)),
                                      rot_target.vec());
             },
             [](const std::vector<double>& x) {
                 double n = 0;
                 for (double v : x) n += v * v;
                 return std::sqrt(n) > 1e-2;
             });
    fd_check("euler chordal-squared head", 3, 711,
             [&](ad::Tape& t, ad::NodeId in) {
                 return t.sqnorm_to_const(t.euler_to_mat9(in), rot_target.vec());
             },
             always, -3.0, 3.0);
    fd_check("exponential chordal-squared head", 3, 712,
             [&](ad::Tape& t, ad::NodeId in) {
                 return t.sqnorm_to_const(t.expmap9(in), rot_target.vec());
             },
             [](const std::vector<double>& x) {
                 return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) > 1e-3;
             },
             -3.0, 3.0);
    fd_check("gso vjp", 6, 713,
             [&](ad::Tape& t, ad::NodeId in) {
                 return t.sqnorm_to_const(t.gso9(in), rot_target.vec());
             },
             [](const std::vector<double>& x) {
                 Vec3 a{x[0], x[1], x[2]}, b{x[3], x[4], x[5]};
                 double na = a.norm(), nb = b.norm();
                 if (na < 1e-2 || nb < 1e-2) return false;
                 return a.cross(b).norm() / (na * nb) > 1e-3;
             });
    auto svd_ok = [](const std::vector<double>& x) {
        Mat3 m = Mat3::from_vec(x.data());
        if (std::fabs(m.det()) < 1e-2) return false;
        SVDFactors f = svd3(m);
        return f.sigma[0] - f.sigma[1] > 1e-3 && f.sigma[1] - f.sigma[2] > 1e-3;
    };
    fd_check("svd vjp (chordal squared)", 9, 714,
             [&](ad::Tape& t, ad::NodeId in) {
                 return t.sqnorm_to_const(t.svdplus9(in), rot_target.vec());
             },
             svd_ok);
    fd_check("svd vjp (geodesic)", 9, 715,
             [&](ad::Tape& t, ad::NodeId in) {
                 return t.geodesic_to_const(t.svdplus9(in), rot_target, 1e-7);
             },
             [&](const std::vector<double>& x) {
                 if (!svd_ok(x)) return false;
                 Mat3 m = Mat3::from_vec(x.data());
                 double tr = (svd_plus(m).matrix() *
                              rot_target.matrix().transpose()).trace();
                 double u = 0.5 * (tr - 1.0);
                 return u > -1.0 + 1e-3 && u < 1.0 - 1e-3;
             });

    if (out.pass) out.detail = "all primitives within 1e-4 of central differences";
    return out;
}

// ---------------------------------------------------------------------------
// C7: distance-ratio scan reproduction
// ---------------------------------------------------------------------------

Outcome c07_lipschitz() {
    Outcome out;
    Check chk{out};
    double secs = wall_seconds([&] {
        auto nined = ex::lipschitz_scan(RepKind::nined, 10000, 7701);
        for (const auto& r : nined)
            chk.require(r.d_repr == r.d_so3, "nined off the ratio-1 line");

        auto sixd = ex::lipschitz_scan(RepKind::sixd, 10000, 7702);
        for (const auto& r : sixd)
            chk.require(r.d_repr <= r.d_so3, "sixd exceeds the group distance");

        for (RepKind kind : {RepKind::quat, RepKind::euler, RepKind::exp}) {
            double width = ex::representation_width(kind);
            auto rows = ex::lipschitz_scan(kind, 10000, 7703);
            bool witness = false;
            for (const auto& r : rows)
                if (r.d_so3 < 0.1 && r.d_repr > 0.9 * width) witness = true;
            chk.require(witness, rep_tag(kind) + ": no discontinuity witness");
        }
    });
    chk.require(secs < 30.0, "runtime " + fmt(secs) + " s exceeds 30 s");
    if (out.pass) out.detail = fmt(secs) + " s";
    return out;
}

// ---------------------------------------------------------------------------
// C8: gradient-ratio densities
// ---------------------------------------------------------------------------

Outcome c08_gradient_ratios() {
    Outcome out;
    Check chk{out};
    double med_gso = 0.0, med_svd = 0.0;
    double secs = wall_seconds([&] {
        auto res = ex::gradient_ratio_density(20000, 2.0, 8801);
        std::vector<double> gso_lr, svd_lr;
        for (const auto& r : res.rows) {
            double v = std::fabs(std::log(r.ratio));
            if (r.projection == "gso")
                gso_lr.push_back(v);
            else
                svd_lr.push_back(v);
        }
        med_gso = oracles::median(gso_lr);
        med_svd = oracles::median(svd_lr);
        chk.require(med_svd < med_gso, "svd ratios not tighter");
    });
    chk.require(secs < 300.0, "runtime " + fmt(secs) + " s exceeds 5 min");
    if (out.pass)
        out.detail = "median |log ratio| svd " + fmt(med_svd) + " < gso " +
                     fmt(med_gso) + ", " + fmt(secs) + " s";
    return out;
}

// ---------------------------------------------------------------------------
// C9: optimization paths
// ---------------------------------------------------------------------------

Outcome c09_gradient_paths() {
    Outcome out;
    Check chk{out};
    int reached = 0;
    bool probe_flagged = false;
    double secs = wall_seconds([&] {
        auto svd = ex::gradient_paths(ex::ProjKind::svd_plus, 50, 150, 0.05,
                                      0.9, 9901, false);
        for (int run = 0; run < 50; ++run) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& row : svd.rows)
                if (row.run == run && std::isfinite(row.loss))
                    best = std::min(best, row.loss);
            if (best < 1e-2) ++reached;
        }
        chk.require(reached >= 45, "only " + std::to_string(reached) +
                                       "/50 svd runs reached 1e-2");

        auto gso = ex::gradient_paths(ex::ProjKind::gso, 5, 150, 0.05, 0.9,
                                      9902, /*include_degenerate_probe=*/true);
        for (int u : gso.unstable_runs)
            if (u == 5) probe_flagged = true;
        chk.require(probe_flagged, "parallel-column probe not flagged");
    });
    chk.require(secs < 120.0, "runtime " + fmt(secs) + " s exceeds 2 min");
    if (out.pass)
        out.detail = std::to_string(reached) + "/50 svd runs converged, " +
                     "probe flagged, " + fmt(secs) + " s";
    return out;
}

// ---------------------------------------------------------------------------
// C10: feature-prediction directions
// ---------------------------------------------------------------------------

Outcome c10_fourier() {
    Outcome out;
    Check chk{out};
    std::vector<double> quat_rmse, aug_rmse, euler_rmse, highdim_rmse;
    double secs = wall_seconds([&] {
        ex::FourierParams p;
        p.n_b = {1, 2, 3};
        p.reps = {"euler", "quat", "quat_aug", "sixd", "nined"};
        p.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        p.master_seed = 1001;
        p.threads = 0; // hardware count
        auto rows = ex::fourier_experiment(p, nullptr);
        for (const auto& r : rows) {
            if (r.rep == "quat") quat_rmse.push_back(r.rmse_test);
            else if (r.rep == "quat_aug") aug_rmse.push_back(r.rmse_test);
            else if (r.rep == "euler") euler_rmse.push_back(r.rmse_test);
            else if (r.rep == "sixd" || r.rep == "nined")
                highdim_rmse.push_back(r.rmse_test);
        }
    });
    double mq = oracles::median(quat_rmse);
    double ma = oracles::median(aug_rmse);
    double me = oracles::median(euler_rmse);
    double mh = oracles::median(highdim_rmse);
    chk.require(ma < mq, "augmented quats not better: " + fmt(ma) + " vs " + fmt(mq));
    chk.require(mh <= me, "high-dim not better than euler: " + fmt(mh) + " vs " + fmt(me));
    chk.require(secs < 1800.0, "runtime " + fmt(secs) + " s exceeds 30 min");
    if (out.pass)
        out.detail = "aug " + fmt(ma) + " < quat " + fmt(mq) + "; high-dim " +
                     fmt(mh) + " <= euler " + fmt(me) + "; " + fmt(secs) + " s";
    return out;
}

// ---------------------------------------------------------------------------
// C11: rotation-estimation directions
// ---------------------------------------------------------------------------

Outcome c11_toy_estimation() {
    Outcome out;
    Check chk{out};
    std::vector<double> euler_g, nined_g, sixd_g, quat_g, quat_hm_g, rf_plain_g,
        rf_pick_g;
    double secs = wall_seconds([&] {
        ex::ToyParams p;
        p.grid = {{"euler", "mse"},   {"quat", "mse"},    {"quat_hm", "mse"},
                  {"quat_rf", "mse"}, {"quat_rf", "mse_dp"}, {"sixd", "chordal"},
                  {"nined", "chordal"}};
        p.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
        p.master_seed = 1101;
        p.threads = 0;
        auto rows = ex::toy_rotation_estimation(p, nullptr);
        for (const auto& r : rows) {
            if (r.rep == "euler") euler_g.push_back(r.geodesic_med);
            else if (r.rep == "nined") nined_g.push_back(r.geodesic_med);
            else if (r.rep == "sixd") sixd_g.push_back(r.geodesic_med);
            else if (r.rep == "quat") quat_g.push_back(r.geodesic_med);
            else if (r.rep == "quat_hm") quat_hm_g.push_back(r.geodesic_med);
            else if (r.rep == "quat_rf" && r.loss == "mse")
                rf_plain_g.push_back(r.geodesic_med);
            else if (r.rep == "quat_rf" && r.loss == "mse_dp")
                rf_pick_g.push_back(r.geodesic_med);
        }
    });
    double me = oracles::median(euler_g), mn = oracles::median(nined_g),
           ms = oracles::median(sixd_g), mq = oracles::median(quat_g),
           mh = oracles::median(quat_hm_g), mrp = oracles::median(rf_plain_g),
           mrd = oracles::median(rf_pick_g);
    chk.require(mn < me, "nined+svd not better than euler: " + fmt(mn) + " vs " + fmt(me));
    chk.require(ms < me, "sixd+gso not better than euler: " + fmt(ms) + " vs " + fmt(me));
    chk.require(mh < mq, "half-space map not better: " + fmt(mh) + " vs " + fmt(mq));
    chk.require(mrp > mrd, "random-flip picking not better: " + fmt(mrd) + " vs " + fmt(mrp));
    chk.require(secs < 1800.0, "runtime " + fmt(secs) + " s exceeds 30 min");
    if (out.pass)
        out.detail = "euler " + fmt(me) + ", nined " + fmt(mn) + ", sixd " +
                     fmt(ms) + ", quat " + fmt(mq) + ", quat_hm " + fmt(mh) +
                     ", rf " + fmt(mrp) + " > rf_dp " + fmt(mrd) + "; " +
                     fmt(secs) + " s";
    return out;
}

// ---------------------------------------------------------------------------
// C12: bit-identical reruns
// ---------------------------------------------------------------------------

Outcome c12_determinism() {
    Outcome out;
    Check chk{out};

    // Library level: serialize two runs of each experiment and compare bytes.
    auto serialize_lipschitz = [] {
        std::ostringstream ss;
        for (const auto& r : ex::lipschitz_scan(RepKind::quat, 500, 1201))
            ss << r.rep << ',' << io::format_double(r.d_so3) << ','
               << io::format_double(r.d_repr) << '\n';
        return ss.str();
    };
    chk.require(serialize_lipschitz() == serialize_lipschitz(),
                "lipschitz rerun differs");

    auto serialize_ratio = [] {
        std::ostringstream ss;
        auto res = ex::gradient_ratio_density(300, 2.0, 1202);
        for (const auto& r : res.rows)
            ss << r.projection << ',' << r.ratio_pair << ','
               << io::format_double(r.ratio) << '\n';
        return ss.str();
    };
    chk.require(serialize_ratio() == serialize_ratio(), "gradratio rerun differs");

    auto serialize_fourier = [] {
        ex::FourierParams p;
        p.n_b = {1};
        p.reps = {"quat"};
        p.seeds = {1};
        p.train_n = 64;
        p.val_n = 16;
        p.test_n = 16;
        p.epochs = 10;
        p.hidden = 8;
        p.t_hidden = 4;
        p.threads = 2;
        p.master_seed = 1203;
        std::ostringstream ss;
        for (const auto& r : ex::fourier_experiment(p, nullptr))
            ss << r.rep << ',' << io::format_double(r.rmse_train) << ','
               << io::format_double(r.rmse_test) << '\n';
        return ss.str();
    };
    chk.require(serialize_fourier() == serialize_fourier(), "fourier rerun differs");

    // Binary level, when the tool path was provided.
    if (!g_cli_path.empty()) {
        fs::path work = fs::temp_directory_path() / "rotkit_acceptance_cli";
        fs::remove_all(work);
        fs::create_directories(work);
        auto run_once = [&](const std::string& dir) {
            std::string cmd = "\"" + g_cli_path +
                              "\" run lipschitz --rep quat,euler --pairs 200 "
                              "--seed 12 --out-dir \"" +
                              (work / dir).string() + "\" > /dev/null 2>&1";
            return std::system(cmd.c_str());
        };
        chk.require(run_once("a") == 0 && run_once("b") == 0, "cli run failed");
        auto slurp = [&](const std::string& dir) {
            std::ifstream f(work / dir / "lipschitz.csv");
            return std::string(std::istreambuf_iterator<char>(f),
                               std::istreambuf_iterator<char>());
        };
        std::string a = slurp("a"), b = slurp("b");
        chk.require(!a.empty() && a == b, "cli reruns differ");
        fs::remove_all(work);
        if (out.pass) out.detail = "library and cli reruns bit-identical";
    } else if (out.pass) {
        out.detail = "library reruns bit-identical (no --cli path given)";
    }
    return out;
}

// ---------------------------------------------------------------------------
// C13: uniform-sampler angle distribution
// ---------------------------------------------------------------------------

Outcome c13_haar_sampler() {
    Outcome out;
    Check chk{out};
    const int n = 100000;
    Rng rng(1301);
    std::vector<double> angles;
    angles.reserve(n);
    for (int i = 0; i < n; ++i)
        angles.push_back(log_so3(sample_uniform(rng)).norm());
    double ks = oracles::ks_statistic(angles, oracles::haar_angle_cdf);
    chk.require(ks < 0.02, "KS statistic " + fmt(ks));
    if (out.pass) out.detail = "KS " + fmt(ks) + " at n = 100000";
    return out;
}

struct Criterion {
    int id;
    const char* title;
    Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {1, "representation round trips", c01_round_trips},
    {2, "double-cover identities", c02_double_cover},
    {3, "metric laws", c03_metric_laws},
    {4, "projection optimality", c04_procrustes_optimality},
    {5, "orthonormalization weight limit", c05_weighted_limit},
    {6, "gradient correctness", c06_gradients},
    {7, "distance-ratio scan", c07_lipschitz},
    {8, "gradient-ratio density", c08_gradient_ratios},
    {9, "optimization paths", c09_gradient_paths},
    {10, "feature-prediction directions", c10_fourier},
    {11, "rotation-estimation directions", c11_toy_estimation},
    {12, "bit-identical reruns", c12_determinism},
    {13, "uniform-sampler angle distribution", c13_haar_sampler},
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) {
            g_cli_path = argv[++i];
        } else {
            selected.insert(std::atoi(arg.c_str()));
        }
    }

    int failures = 0;
    for (const Criterion& c : kCriteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        Outcome out;
        try {
            out = c.fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] C%02d %s%s%s\n", out.pass ? "PASS" : "FAIL", c.id,
                    c.title, out.detail.empty() ? "" : " - ",
                    out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
