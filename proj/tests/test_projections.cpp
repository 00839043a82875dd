#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rotkit/errors.hpp"
#include "rotkit/metrics.hpp"
#include "rotkit/projections.hpp"
#include "rotkit/representations.hpp"

using namespace rotkit;

namespace {

double mat_dist(const Mat3& a, const Mat3& b) { return (a - b).frobenius_norm(); }

double min_sigma_gap(const SVDFactors& f) {
    return std::min(f.sigma[0] - f.sigma[1], f.sigma[1] - f.sigma[2]);
}

} // namespace

TEST_CASE("svd3 basics") {
    SVDFactors fi = svd3(Mat3::identity());
    CHECK(fi.sigma[0] == doctest::Approx(1.0));
    CHECK(fi.sigma[2] == doctest::Approx(1.0));

    SVDFactors fd = svd3(Mat3::diag(3, 2, 1));
    CHECK(fd.sigma[0] == doctest::Approx(3.0));
    CHECK(fd.sigma[1] == doctest::Approx(2.0));
    CHECK(fd.sigma[2] == doctest::Approx(1.0));

    SVDFactors fz = svd3(Mat3::zero());
    CHECK(fz.sigma[0] == 0.0);

    CHECK_THROWS_AS(svd3(Mat3::diag(std::nan(""), 1, 1)), DataError);
}

TEST_CASE("svd3 reconstruction and orthogonality sweep") {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        Mat3 m = oracles::random_mat(rng, -2.0, 2.0);
        SVDFactors f = svd3(m);
        Mat3 rebuilt = f.u * Mat3::diag(f.sigma[0], f.sigma[1], f.sigma[2]) *
                       f.v.transpose();
        CHECK(mat_dist(rebuilt, m) < 1e-9);
        CHECK(mat_dist(f.u.transpose() * f.u, Mat3::identity()) < 1e-9);
        CHECK(mat_dist(f.v.transpose() * f.v, Mat3::identity()) < 1e-9);
        CHECK(f.sigma[0] >= f.sigma[1]);
        CHECK(f.sigma[1] >= f.sigma[2]);
        CHECK(f.sigma[2] >= 0.0);
    }

    SUBCASE("rank-deficient and scaled inputs") {
        Rng r2(13);
        for (int i = 0; i < 300; ++i) {
            Vec3 a = r2.normal3(), b = r2.normal3();
            Mat3 m = Mat3::from_cols(a, b, a + b); // rank two
            SVDFactors f = svd3(m);
            CHECK(f.sigma[2] < 1e-12 * std::max(1.0, f.sigma[0]));
            Mat3 rebuilt = f.u * Mat3::diag(f.sigma[0], f.sigma[1], f.sigma[2]) *
                           f.v.transpose();
            CHECK(mat_dist(rebuilt, m) < 1e-9);
        }
        for (double scale : {1e-8, 1e8}) {
            Mat3 m = oracles::random_mat(r2, -1.0, 1.0) * scale;
            SVDFactors f = svd3(m);
            Mat3 rebuilt = f.u * Mat3::diag(f.sigma[0], f.sigma[1], f.sigma[2]) *
                           f.v.transpose();
            CHECK(mat_dist(rebuilt, m) < 1e-9 * scale);
        }
    }
}

TEST_CASE("svd_plus projection") {
    CHECK(mat_dist(svd_plus(Mat3::identity()).matrix(), Mat3::identity()) < 1e-15);

    Rng rng(17);
    SUBCASE("positive scaling invariance") {
        for (double c : {0.1, 1.0, 7.5, 1e4}) {
            RotationMatrix r = sample_uniform(rng);
            CHECK(mat_dist(svd_plus(r.matrix() * c).matrix(), r.matrix()) < 1e-12);
        }
    }

    SUBCASE("result is a valid rotation, also for negative determinants") {
        for (int i = 0; i < 2000; ++i) {
            Mat3 m = oracles::random_mat(rng, -2.0, 2.0);
            RotationMatrix r = svd_plus(m);
            CHECK(is_rotation(r.matrix(), 1e-9));
        }
    }

    SUBCASE("never beaten by random rotations") {
        Rng oracle_rng(19);
        std::vector<RotationMatrix> candidates;
        for (int i = 0; i < 10000; ++i)
            candidates.push_back(sample_uniform(oracle_rng));
        int tested = 0;
        while (tested < 100) {
            Mat3 m = oracles::random_mat(rng, -1.0, 1.0);
            if (std::fabs(m.det()) < 0.1) continue;
            ++tested;
            double best = mat_dist(svd_plus(m).matrix(), m);
            for (const auto& r : candidates)
                CHECK(best <= mat_dist(r.matrix(), m) + 1e-9);
        }
    }

    SUBCASE("idempotent") {
        for (int i = 0; i < 500; ++i) {
            Mat3 m = oracles::random_mat(rng, -2.0, 2.0);
            Mat3 once = svd_plus(m).matrix();
            CHECK(mat_dist(svd_plus(once).matrix(), once) < 1e-9);
        }
    }

    SUBCASE("left equivariance under rotations") {
        for (int i = 0; i < 500; ++i) {
            Mat3 m = oracles::random_mat(rng, -2.0, 2.0);
            RotationMatrix q = sample_uniform(rng);
            Mat3 lhs = svd_plus(q.matrix() * m).matrix();
            Mat3 rhs = q.matrix() * svd_plus(m).matrix();
            CHECK(mat_dist(lhs, rhs) < 1e-8);
        }
    }

    SUBCASE("spring-energy identity") {
        // |R - M|_F^2 equals the summed squared column displacements.
        for (int i = 0; i < 200; ++i) {
            Mat3 m = oracles::random_mat(rng, -2.0, 2.0);
            RotationMatrix r = svd_plus(m);
            double total = chordal_sq(r, RotationMatrix::unchecked(Mat3::zero()));
            (void)total;
            double fro2 = mat_dist(r.matrix(), m);
            fro2 *= fro2;
            double cols = 0.0;
            for (int c = 0; c < 3; ++c)
                cols += (r.matrix().col(c) - m.col(c)).squared_norm();
            CHECK(fro2 == doctest::Approx(cols).epsilon(1e-12));
        }
    }

    SUBCASE("near-singular flag") {
        Mat3 singular = Mat3::from_cols({1, 0, 0}, {0, 1, 0}, {1, 1, 0});
        CHECK(svd_plus_checked(singular).near_singular);
        CHECK_FALSE(svd_plus_checked(Mat3::identity()).near_singular);
    }
}

TEST_CASE("svd_plus_vjp") {
    SUBCASE("zero gradient at the projection of a rotation") {
        Rng rng(23);
        RotationMatrix target = sample_uniform(rng);
        // L = 0.5 |R - target|^2 has a minimum where the projection hits the
        // target; the pullback of the cotangent (R - target) vanishes.
        Mat3 cot = svd_plus(target.matrix()).matrix() - target.matrix();
        Mat3 g = svd_plus_vjp(target.matrix(), cot).grad;
        CHECK(g.frobenius_norm() < 1e-10);
    }

    SUBCASE("matches central differences on well-conditioned inputs") {
        Rng rng(29);
        int tested = 0;
        while (tested < 150) {
            Mat3 m = oracles::random_mat(rng, -1.5, 1.5);
            SVDFactors f = svd3(m);
            if (std::fabs(m.det()) < 1e-2 || min_sigma_gap(f) < 1e-3) continue;
            ++tested;
            RotationMatrix target = sample_uniform(rng);
            auto loss = [&](const std::vector<double>& x) {
                Mat3 mm = Mat3::from_vec(x.data());
                return chordal_sq(svd_plus(mm), target);
            };
            auto mv = m.vec();
            std::vector<double> x(mv.begin(), mv.end());
            auto fd = finite_diff_grad(loss, x, 1e-5);

            RotationMatrix r = svd_plus(m);
            Mat3 cot = (r.matrix() - target.matrix()) * 2.0;
            Mat3 g = svd_plus_vjp(m, cot).grad;
            auto gv = g.vec();
            std::vector<double> ad(gv.begin(), gv.end());
            CHECK(oracles::rel_err(ad, fd) < 1e-4);
        }
    }

    SUBCASE("regularized but finite near the singular set") {
        Rng rng(31);
        for (int i = 0; i < 100; ++i) {
            Vec3 a = rng.normal3(), b = rng.normal3();
            // Nearly rank-two input.
            Mat3 m = Mat3::from_cols(a, b, a.cross(b) * 1e-9);
            Mat3 cot = oracles::random_mat(rng, -1.0, 1.0);
            Mat3 g = svd_plus_vjp(m, cot).grad;
            CHECK(g.all_finite());
        }
        // Gradient magnitude grows toward the non-unique set (vanishing
        // determinant with coalescing small singular values) but stays
        // finite under the damping.
        Mat3 cot = oracles::random_mat(rng, -1.0, 1.0);
        auto res_far = svd_plus_vjp(Mat3::diag(1.0, 0.9, -0.5), cot);
        auto res_near = svd_plus_vjp(Mat3::diag(1.0, 1e-4, -1e-4), cot);
        CHECK(res_near.grad.all_finite());
        CHECK(res_near.regularized);
        CHECK(res_near.grad.frobenius_norm() > res_far.grad.frobenius_norm());
    }
}

TEST_CASE("gso and gso_vjp") {
    SixD frame{{1, 0, 0}, {0, 1, 0}};
    CHECK(mat_dist(gso(frame).matrix(), Mat3::identity()) == 0.0);

    SUBCASE("zero gradient at the minimum") {
        Mat3 cot = gso(frame).matrix() - Mat3::identity();
        SixDGrad g = gso_vjp(frame, cot);
        CHECK(g.nu1.norm() < 1e-12);
        CHECK(g.nu2.norm() < 1e-12);
    }

    SUBCASE("matches central differences") {
        Rng rng(37);
        int tested = 0;
        while (tested < 150) {
            SixD s{oracles::random_vec(rng, -2, 2), oracles::random_vec(rng, -2, 2)};
            double n1 = s.nu1.norm(), n2 = s.nu2.norm();
            if (n1 < 1e-3 || n2 < 1e-3) continue;
            if (s.nu1.cross(s.nu2).norm() / (n1 * n2) < 1e-3) continue;
            ++tested;

            Mat3 cot = oracles::random_mat(rng, -1.0, 1.0);
            auto loss = [&](const std::vector<double>& x) {
                SixD ss{{x[0], x[1], x[2]}, {x[3], x[4], x[5]}};
                return frobenius_dot(cot, gso(ss).matrix());
            };
            std::vector<double> x{s.nu1.x, s.nu1.y, s.nu1.z,
                                  s.nu2.x, s.nu2.y, s.nu2.z};
            auto fd = finite_diff_grad(loss, x, 1e-5);
            SixDGrad g = gso_vjp(s, cot);
            std::vector<double> ad{g.nu1.x, g.nu1.y, g.nu1.z,
                                   g.nu2.x, g.nu2.y, g.nu2.z};
            CHECK(oracles::rel_err(ad, fd) < 1e-5);
        }
    }

    SUBCASE("degenerate input throws") {
        CHECK_THROWS_AS(gso_vjp({{1, 0, 0}, {2, 0, 0}}, Mat3::identity()),
                        SingularInput);
    }
}

TEST_CASE("weighted_procrustes") {
    Rng rng(41);
    CHECK_THROWS_AS(weighted_procrustes({1, 0, 0}, {0, 1, 0}, {1.0, -0.1, 0.0}),
                    DataError);

    SUBCASE("unit weights recover the frame completion") {
        for (int i = 0; i < 200; ++i) {
            RotationMatrix r = sample_uniform(rng);
            auto res = weighted_procrustes(r.col(0), r.col(1), {1.0, 1.0, 1.0});
            CHECK(mat_dist(res.r.matrix(), r.matrix()) < 1e-9);
            CHECK_FALSE(res.non_unique);
        }
    }

    SUBCASE("never beaten by random-rotation search") {
        Rng oracle_rng(43);
        std::vector<RotationMatrix> candidates;
        for (int i = 0; i < 100000; ++i)
            candidates.push_back(sample_uniform(oracle_rng));
        auto objective = [](const RotationMatrix& r, const Vec3& m1,
                            const Vec3& m2, const std::array<double, 3>& w) {
            Mat3 weighted = Mat3::from_cols(r.col(0) * w[0], r.col(1) * w[1],
                                            r.col(2) * w[2]);
            Mat3 target = Mat3::from_cols(m1, m2, {0, 0, 0});
            return mat_dist(weighted, target);
        };
        for (int i = 0; i < 5; ++i) {
            Vec3 m1 = oracles::random_vec(rng, -1, 1);
            Vec3 m2 = oracles::random_vec(rng, -1, 1);
            std::array<double, 3> w{1.0, rng.uniform(0.1, 1.0), 0.0};
            auto res = weighted_procrustes(m1, m2, w);
            double best = objective(res.r, m1, m2, w);
            for (const auto& cand : candidates)
                CHECK(best <= objective(cand, m1, m2, w) + 1e-6);
        }
    }

    SUBCASE("first-column-only weights align the first column") {
        for (int i = 0; i < 100; ++i) {
            Vec3 m1 = oracles::random_vec(rng, -1, 1);
            if (m1.norm() < 0.1) continue;
            Vec3 m2 = oracles::random_vec(rng, -1, 1);
            auto res = weighted_procrustes(m1, m2, {1.0, 0.0, 0.0});
            CHECK(res.non_unique);
            CHECK((res.r.col(0) - m1.normalized()).norm() < 1e-9);
        }
    }

    SUBCASE("vanishing middle weight converges to the orthonormalization") {
        Rng r2(47);
        int tested = 0;
        while (tested < 1000) {
            SixD s{oracles::random_vec(r2, -2, 2), oracles::random_vec(r2, -2, 2)};
            double n1 = s.nu1.norm(), n2 = s.nu2.norm();
            if (n1 < 0.2 || n2 < 0.2) continue;
            if (s.nu1.cross(s.nu2).norm() / (n1 * n2) < 0.05) continue;
            ++tested;
            RotationMatrix g = gso(s);
            double prev = std::numeric_limits<double>::infinity();
            for (double eps : {1e-2, 1e-4, 1e-6}) {
                auto res = weighted_procrustes(s.nu1, s.nu2, {1.0, eps, 0.0});
                double d = chordal_distance(res.r, g);
                CHECK(d <= prev + 1e-12);
                prev = d;
            }
            CHECK(prev < 1e-4);
        }
    }
}

TEST_CASE("finite_diff_grad") {
    // Exact for linear and quadratic functions.
    auto linear = [](const std::vector<double>& x) {
        return 3.0 * x[0] - 2.0 * x[1] + 0.5 * x[2];
    };
    auto g = finite_diff_grad(linear, {0.4, -1.0, 2.0}, 1e-5);
    CHECK(g[0] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(g[1] == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(g[2] == doctest::Approx(0.5).epsilon(1e-9));

    auto quad = [](const std::vector<double>& x) {
        return x[0] * x[0] + 4.0 * x[1] * x[1];
    };
    auto gq = finite_diff_grad(quad, {1.5, -0.5}, 1e-5);
    CHECK(gq[0] == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(gq[1] == doctest::Approx(-4.0).epsilon(1e-8));
}
