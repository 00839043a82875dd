#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "rotkit/errors.hpp"
#include "rotkit/learn.hpp"
#include "rotkit/metrics.hpp"
#include "rotkit/projections.hpp"

using namespace rotkit;
using namespace rotkit::learn;

namespace {

Dataset linear_dataset(Rng& rng, int n, const std::vector<double>& true_w,
                       double bias) {
    Dataset d;
    d.input_dim = static_cast<int>(true_w.size());
    d.target_dim = 1;
    for (int i = 0; i < n; ++i) {
        double y = bias;
        for (int j = 0; j < d.input_dim; ++j) {
            double x = rng.uniform(-1, 1);
            d.x.push_back(x);
            y += true_w[j] * x;
        }
        d.t.push_back(y);
    }
    return d;
}

} // namespace

TEST_CASE("model initialization and inference") {
    Rng rng(1);
    MLPModel m = MLPModel::init({3, 8, 2}, HeadKind::vector, rng);
    CHECK(m.layer_count() == 2);
    CHECK(m.input_dim() == 3);
    CHECK(m.output_dim() == 2);

    SUBCASE("zero weights pass the bias through") {
        MLPModel z = m;
        for (auto& w : z.w) std::fill(w.begin(), w.end(), 0.0);
        z.b[0].assign(8, 0.7);
        z.b[1] = {1.5, -2.5};
        auto y = z.forward_one(std::vector<double>{0.3, -0.4, 0.9});
        CHECK(y[0] == doctest::Approx(1.5 + 0.7 * 8 * z.w[1][0]).epsilon(1e-12));
        // With zero weights in the second layer too, only its bias remains.
        CHECK(y[0] == doctest::Approx(1.5));
        CHECK(y[1] == doctest::Approx(-2.5));
    }

    SUBCASE("a single layer is a plain matrix multiply") {
        Rng r2(2);
        MLPModel lin = MLPModel::init({3, 2}, HeadKind::vector, r2);
        std::vector<double> x{0.5, -1.0, 2.0};
        auto y = lin.forward_one(x);
        for (int o = 0; o < 2; ++o) {
            double s = lin.b[0][o];
            for (int i = 0; i < 3; ++i) s += lin.w[0][o * 3 + i] * x[i];
            CHECK(y[o] == doctest::Approx(s).epsilon(1e-15));
        }
    }

    SUBCASE("same seed gives bit-identical weights and outputs") {
        Rng a(42), b(42);
        MLPModel ma = MLPModel::init({4, 16, 16, 3}, HeadKind::vector, a);
        MLPModel mb = MLPModel::init({4, 16, 16, 3}, HeadKind::vector, b);
        CHECK(ma.w == mb.w);
        CHECK(ma.b == mb.b);
        std::vector<double> x{0.1, 0.2, 0.3, 0.4};
        CHECK(ma.forward_one(x) == mb.forward_one(x));
    }

    SUBCASE("head dimension is enforced") {
        Rng r3(3);
        CHECK_THROWS_AS(MLPModel::init({3, 8, 5}, HeadKind::quat, r3),
                        ConfigError);
    }
}

TEST_CASE("optimizer steps") {
    SUBCASE("zero gradient leaves parameters unchanged") {
        std::vector<double> p{1.0, -2.0};
        std::vector<double> g{0.0, 0.0};
        SgdMomentumState sgd;
        sgd_momentum_step(p, g, sgd, 0.1, 0.9);
        CHECK(p == std::vector<double>{1.0, -2.0});
        AdamState adam;
        adam_step(p, g, adam, 0.1, 0.9, 0.999, 1e-8);
        CHECK(p == std::vector<double>{1.0, -2.0});
    }

    SUBCASE("zero momentum reduces to plain gradient descent") {
        std::vector<double> p{1.0};
        std::vector<double> g{0.5};
        SgdMomentumState st;
        sgd_momentum_step(p, g, st, 0.1, 0.0);
        CHECK(p[0] == doctest::Approx(1.0 - 0.05));
    }

    SUBCASE("both optimizers settle a quadratic bowl") {
        // f(p) = 0.5 (p - c)^T diag(1, 4) (p - c), gradient diag(1,4)(p - c).
        auto grad = [](const std::vector<double>& p) {
            return std::vector<double>{p[0] - 3.0, 4.0 * (p[1] + 1.0)};
        };
        std::vector<double> p{0.0, 0.0};
        SgdMomentumState sgd;
        for (int i = 0; i < 500; ++i) sgd_momentum_step(p, grad(p), sgd, 0.05, 0.9);
        CHECK(std::fabs(p[0] - 3.0) < 1e-6);
        CHECK(std::fabs(p[1] + 1.0) < 1e-6);

        p = {0.0, 0.0};
        AdamState adam;
        for (int i = 0; i < 500; ++i)
            adam_step(p, grad(p), adam, 0.05, 0.9, 0.999, 1e-8);
        CHECK(std::fabs(p[0] - 3.0) < 1e-6);
        CHECK(std::fabs(p[1] + 1.0) < 1e-6);
    }
}

TEST_CASE("training") {
    LossSpec mse_spec;
    mse_spec.metric = LossKind::mse;

    SUBCASE("memorizes a single sample") {
        Rng rng(10);
        Dataset one;
        one.input_dim = 2;
        one.target_dim = 1;
        one.x = {0.5, -0.25};
        one.t = {0.75};
        MLPModel m = MLPModel::init({2, 16, 1}, HeadKind::vector, rng);
        TrainConfig cfg;
        cfg.lr = 0.01;
        cfg.batch_size = 1;
        cfg.max_epochs = 400;
        cfg.patience = -1;
        cfg.seed = 7;
        TrainResult r = train(m, one, one, mse_spec, cfg);
        CHECK(evaluate_loss(r.best, one, mse_spec) < 1e-6);
    }

    SUBCASE("recovers a linear map") {
        Rng rng(11);
        std::vector<double> true_w{1.5, -0.5, 2.0};
        Dataset tr = linear_dataset(rng, 256, true_w, 0.3);
        Dataset va = linear_dataset(rng, 64, true_w, 0.3);
        Rng init(12);
        MLPModel m = MLPModel::init({3, 1}, HeadKind::vector, init);
        TrainConfig cfg;
        cfg.lr = 0.02;
        cfg.batch_size = 32;
        cfg.max_epochs = 600;
        cfg.patience = -1;
        cfg.seed = 13;
        TrainResult r = train(m, tr, va, mse_spec, cfg);
        for (int j = 0; j < 3; ++j)
            CHECK(std::fabs(r.best.w[0][j] - true_w[j]) < 1e-3);
        CHECK(std::fabs(r.best.b[0][0] - 0.3) < 1e-3);
    }

    SUBCASE("patience zero stops after the first non-improving epoch") {
        Rng rng(14);
        Dataset tr = linear_dataset(rng, 64, {1.0, 1.0}, 0.0);
        Dataset va = linear_dataset(rng, 32, {1.0, 1.0}, 0.0);
        Rng init(15);
        MLPModel m = MLPModel::init({2, 4, 1}, HeadKind::vector, init);
        TrainConfig cfg;
        cfg.lr = 0.5; // deliberately unstable so validation loss bounces
        cfg.batch_size = 16;
        cfg.max_epochs = 200;
        cfg.patience = 0;
        cfg.seed = 16;
        TrainResult r = train(m, tr, va, mse_spec, cfg);
        // Stopped at the first epoch whose validation loss did not improve.
        REQUIRE(static_cast<int>(r.history.size()) < 200);
        int last = static_cast<int>(r.history.size()) - 1;
        CHECK(r.best_epoch == last - 1);
    }

    SUBCASE("identical seeds give bit-identical histories") {
        Rng rng(17);
        Dataset tr = linear_dataset(rng, 128, {0.5, -1.0}, 0.1);
        Dataset va = linear_dataset(rng, 32, {0.5, -1.0}, 0.1);
        Rng init(18);
        MLPModel m = MLPModel::init({2, 8, 1}, HeadKind::vector, init);
        TrainConfig cfg;
        cfg.lr = 0.01;
        cfg.batch_size = 16;
        cfg.max_epochs = 20;
        cfg.patience = -1;
        cfg.seed = 19;
        TrainResult a = train(m, tr, va, mse_spec, cfg);
        TrainResult b = train(m, tr, va, mse_spec, cfg);
        REQUIRE(a.history.size() == b.history.size());
        for (std::size_t i = 0; i < a.history.size(); ++i) {
            CHECK(a.history[i].train_loss == b.history[i].train_loss);
            CHECK(a.history[i].val_loss == b.history[i].val_loss);
        }
        CHECK(a.best.w == b.best.w);
    }

    SUBCASE("non-finite loss aborts with a diagnostic") {
        Rng rng(20);
        Dataset tr = linear_dataset(rng, 32, {1.0}, 0.0);
        tr.t[0] = std::numeric_limits<double>::infinity();
        Rng init(21);
        MLPModel m = MLPModel::init({1, 1}, HeadKind::vector, init);
        TrainConfig cfg;
        cfg.max_epochs = 5;
        cfg.batch_size = 8;
        CHECK_THROWS_AS(train(m, tr, tr, mse_spec, cfg), NumericalFailure);
    }

    SUBCASE("empty splits are rejected") {
        Dataset empty;
        Rng init(22);
        MLPModel m = MLPModel::init({1, 1}, HeadKind::vector, init);
        CHECK_THROWS_AS(train(m, empty, empty, mse_spec, TrainConfig{}), DataError);
    }
}

TEST_CASE("loss spec validation") {
    LossSpec s;
    s.metric = LossKind::chordal;
    CHECK_THROWS_AS(s.validate(HeadKind::nined), ConfigError); // needs so3 space
    s.target_space = TargetSpace::so3;
    s.projection = ProjectionPolicy::svd_plus;
    CHECK_NOTHROW(s.validate(HeadKind::nined));
    CHECK_THROWS_AS(s.validate(HeadKind::quat), ConfigError); // projection mismatch

    LossSpec g;
    g.metric = LossKind::geodesic;
    g.target_space = TargetSpace::so3;
    CHECK_THROWS_AS(g.validate(HeadKind::nined), ConfigError); // raw geodesic
    g.projection = ProjectionPolicy::svd_plus;
    CHECK_NOTHROW(g.validate(HeadKind::nined));

    LossSpec qp;
    qp.metric = LossKind::quat_pick_i;
    CHECK_NOTHROW(qp.validate(HeadKind::quat));
    CHECK_THROWS_AS(qp.validate(HeadKind::sixd), ConfigError);

    TrainConfig bad;
    bad.patience = 100;
    bad.max_epochs = 10;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("group-space training pipeline equals the manual composition") {
    // Loss(nined head, geodesic, svd_plus) computed through the batch graph
    // must match projecting the raw output and evaluating the metric.
    Rng rng(23);
    MLPModel m = MLPModel::init({4, 12, 9}, HeadKind::nined, rng);
    Dataset d;
    d.input_dim = 4;
    d.target_dim = 9;
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 4; ++j) d.x.push_back(rng.uniform(-1, 1));
        RotationMatrix r = sample_uniform(rng);
        auto v = r.vec();
        d.t.insert(d.t.end(), v.begin(), v.end());
        d.rot.push_back(r);
    }
    LossSpec spec;
    spec.metric = LossKind::geodesic;
    spec.target_space = TargetSpace::so3;
    spec.projection = ProjectionPolicy::svd_plus;
    double loss = evaluate_loss(m, d, spec);

    std::vector<double> pred(8 * 9);
    m.forward_batch(d.x.data(), 8, pred.data());
    double manual = 0.0;
    for (int i = 0; i < 8; ++i) {
        Mat3 raw = Mat3::from_vec(pred.data() + i * 9);
        manual += geodesic(rotkit::svd_plus(raw), d.rot[i]);
    }
    manual /= 8.0;
    CHECK(loss == doctest::Approx(manual).epsilon(1e-9));
}

TEST_CASE("checkpoint round trip") {
    Rng rng(24);
    MLPModel m = MLPModel::init({3, 5, 4}, HeadKind::quat, rng);
    auto path = std::filesystem::temp_directory_path() / "rotkit_ckpt_test.txt";
    m.save(path.string());
    MLPModel back = MLPModel::load(path.string());
    CHECK(back.widths == m.widths);
    CHECK(back.head == m.head);
    CHECK(back.w == m.w);
    CHECK(back.b == m.b);
    std::filesystem::remove(path);
}

TEST_CASE("double-cover invariance of picking losses at the dataset level") {
    Rng rng(25);
    MLPModel m = MLPModel::init({3, 8, 4}, HeadKind::quat, rng);
    Dataset d;
    d.input_dim = 3;
    d.target_dim = 4;
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 3; ++j) d.x.push_back(rng.uniform(-1, 1));
        UnitQuaternion q = matrix_to_quat(sample_uniform(rng));
        d.t.insert(d.t.end(), {q.w, q.x, q.y, q.z});
    }
    Dataset neg = d;
    for (double& v : neg.t) v = -v;

    for (LossKind k : {LossKind::quat_pick_i, LossKind::quat_pick_ii}) {
        LossSpec spec;
        spec.metric = k;
        CHECK(evaluate_loss(m, d, spec) ==
              doctest::Approx(evaluate_loss(m, neg, spec)).epsilon(1e-12));
    }
}
