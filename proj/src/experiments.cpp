#include "rotkit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include "rotkit/autodiff.hpp"
#include "rotkit/csv.hpp"
#include "rotkit/errors.hpp"
#include "rotkit/projections.hpp"

namespace rotkit::experiments {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 6.28318530717958647692;
} // namespace

void Meta::add(const std::string& key, const std::string& value) {
    entries.emplace_back(key, value);
}
void Meta::add(const std::string& key, double value) {
    entries.emplace_back(key, io::format_double(value));
}
void Meta::add(const std::string& key, long value) {
    entries.emplace_back(key, std::to_string(value));
}
void Meta::add_seed(const std::string& key, uint64_t value) {
    entries.emplace_back(key, std::to_string(value));
}

void Meta::write(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write meta sidecar: " + path);
    for (const auto& [k, v] : entries) f << k << " = " << v << "\n";
}

void parallel_cells(int n_cells, int threads,
                    const std::function<void(int)>& fn) {
    if (n_cells <= 0) return;
    if (threads <= 0)
        threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n_cells));
    if (threads == 1) {
        for (int i = 0; i < n_cells; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n_cells) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

uint64_t cell_seed(uint64_t master, std::initializer_list<uint64_t> parts) {
    uint64_t h = Rng::mix(master ^ 0x243f6a8885a308d3ULL);
    for (uint64_t p : parts) h = Rng::mix(h ^ Rng::mix(p));
    return h;
}

namespace {

/// FNV-1a; pins cell-seed derivation independent of the standard library.
uint64_t tag_hash(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

// ---------------------------------------------------------------------------
// Distance-ratio scan
// ---------------------------------------------------------------------------

double representation_width(RepKind rep) {
    switch (rep) {
        case RepKind::euler:
            return 3.0 * kPi; // box diagonal of [-pi,pi) x [-pi/2,pi/2] x [-pi,pi)
        case RepKind::exp:
            return kTwoPi; // ball of radius pi
        case RepKind::quat:
            return 2.0; // diameter of the unit sphere
        case RepKind::mrp:
            return 2.0; // ball of radius 1
        case RepKind::axis_angle:
            return std::sqrt(4.0 + kPi * kPi);
        case RepKind::sixd:
            return 2.0 * std::sqrt(2.0);
        case RepKind::nined:
            return 2.0 * std::sqrt(2.0);
        default:
            throw ConfigError("representation_width: planar representation");
    }
}

namespace {

/// Second rotation of a boundary-straddling pair: both rotations are close
/// in the group while their canonical representations land on opposite
/// sides of the half-space seam.
std::pair<RotationMatrix, RotationMatrix> boundary_pair(RepKind rep, Rng& rng) {
    switch (rep) {
        case RepKind::quat: {
            // Scalar part hovering at zero, then a small relative rotation.
            double w = rng.uniform(0.0, 0.02);
            Vec3 v = rng.unit_vector() * std::sqrt(1.0 - w * w);
            UnitQuaternion q{w, v.x, v.y, v.z};
            RotationMatrix r1 = quat_to_matrix(q);
            Vec3 axis = rng.unit_vector();
            RotationMatrix r2 =
                compose(r1, exp_so3(axis * rng.uniform(0.0, 0.05)));
            return {r1, r2};
        }
        case RepKind::euler: {
            double beta = rng.uniform(-1.2, 1.2);
            double u1 = rng.uniform(0.0, 0.01), v1 = rng.uniform(0.0, 0.01);
            double u2 = rng.uniform(0.0, 0.01), v2 = rng.uniform(0.0, 0.01);
            RotationMatrix r1 = euler_to_matrix({kPi - u1, beta, kPi - v1});
            RotationMatrix r2 = euler_to_matrix({-kPi + u2, beta, -kPi + v2});
            return {r1, r2};
        }
        case RepKind::exp:
        case RepKind::mrp:
        case RepKind::axis_angle: {
            // Angle hovering at pi about a shared axis, opposing signs.
            Vec3 a = rng.unit_vector();
            double u1 = rng.uniform(0.0, 0.01), u2 = rng.uniform(0.0, 0.01);
            RotationMatrix r1 = exp_so3(a * (kPi - u1));
            RotationMatrix r2 = exp_so3(a * -(kPi - u2));
            return {r1, r2};
        }
        default: {
            RotationMatrix r1 = sample_uniform(rng);
            Vec3 axis = rng.unit_vector();
            RotationMatrix r2 =
                compose(r1, exp_so3(axis * rng.uniform(0.0, 0.05)));
            return {r1, r2};
        }
    }
}

} // namespace

std::vector<LipschitzRow> lipschitz_scan(RepKind rep, int n_pairs,
                                         uint64_t seed) {
    if (rep == RepKind::angle2d || rep == RepKind::sincos2d)
        throw ConfigError("lipschitz_scan: planar representation");
    Rng rng(seed);
    std::vector<LipschitzRow> rows;
    rows.reserve(n_pairs);
    std::string tag = rep_tag(rep);
    for (int i = 0; i < n_pairs; ++i) {
        RotationMatrix r1, r2;
        switch (i % 4) {
            case 0:
            case 1:
                r1 = sample_uniform(rng);
                r2 = sample_uniform(rng);
                break;
            case 2: {
                r1 = sample_uniform(rng);
                Vec3 axis = rng.unit_vector();
                r2 = compose(r1, exp_so3(axis * rng.uniform(0.0, kPi / 4.0)));
                break;
            }
            default: {
                auto pr = boundary_pair(rep, rng);
                r1 = pr.first;
                r2 = pr.second;
                break;
            }
        }
        auto flat_l2 = [](std::span<const double> a, std::span<const double> b) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k)
                s += (a[k] - b[k]) * (a[k] - b[k]);
            return std::sqrt(s);
        };
        auto v1 = rep_to_vector(from_matrix(rep, r1));
        auto v2 = rep_to_vector(from_matrix(rep, r2));
        auto m1 = r1.vec();
        auto m2 = r2.vec();
        LipschitzRow row;
        row.rep = tag;
        // Both distances run through the same flat 2-norm, so the nined rows
        // land on the ratio-1 line bit-exactly.
        row.d_so3 = flat_l2(m1, m2);
        row.d_repr = flat_l2(v1, v2);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Alignment loss
// ---------------------------------------------------------------------------

AlignmentEval alignment_loss_grad(ProjKind kind, std::span<const double> r,
                                  const RotationMatrix& target) {
    int dim = kind == ProjKind::gso ? 6 : 9;
    if (static_cast<int>(r.size()) != dim)
        throw DataError("alignment_loss_grad: wrong representation size");
    ad::Tape tape;
    ad::NodeId rid = tape.input(r, 1, dim, /*requires_grad=*/true);
    ad::NodeId m9 = kind == ProjKind::gso ? tape.gso9(rid) : tape.svdplus9(rid);
    ad::NodeId loss = tape.l2_to_const(m9, target.vec());
    tape.backward(loss);
    AlignmentEval out;
    out.loss = tape.scalar(loss);
    auto adj = tape.adjoint(rid);
    out.grad.assign(adj.begin(), adj.end());
    return out;
}

// ---------------------------------------------------------------------------
// Optimization paths
// ---------------------------------------------------------------------------

GradPathsResult gradient_paths(ProjKind kind, int n_runs, int iters, double lr,
                               double momentum, uint64_t seed,
                               bool include_degenerate_probe) {
    int dim = kind == ProjKind::gso ? 6 : 9;
    int total_runs = n_runs + (include_degenerate_probe ? 1 : 0);
    GradPathsResult result;
    RotationMatrix target = RotationMatrix::identity();
    std::vector<std::string> names =
        kind == ProjKind::gso
            ? std::vector<std::string>{"nu1", "nu2"}
            : std::vector<std::string>{"m1", "m2", "m3"};

    for (int run = 0; run < total_runs; ++run) {
        std::vector<double> r(dim);
        bool probe = include_degenerate_probe && run == n_runs;
        if (probe) {
            // Parallel columns along e3: the Gram-Schmidt instability set.
            r.assign(dim, 0.0);
            r[2] = 1.0;
            r[5] = 2.0;
        } else {
            Rng rng(cell_seed(seed, {static_cast<uint64_t>(run)}));
            for (double& v : r) v = rng.uniform(-2.0, 2.0);
        }
        std::vector<double> velocity(dim, 0.0);
        bool unstable = false;
        for (int it = 0; it <= iters; ++it) {
            AlignmentEval ev;
            bool failed = false;
            try {
                ev = alignment_loss_grad(kind, r, target);
            } catch (const SingularInput&) {
                failed = true;
            }
            double loss = failed ? std::numeric_limits<double>::quiet_NaN()
                                 : ev.loss;
            for (std::size_t v = 0; v < names.size(); ++v) {
                GradPathRow row;
                row.run = run;
                row.iter = it;
                row.vector_name = names[v];
                row.x = r[3 * v + 0];
                row.y = r[3 * v + 1];
                row.z = r[3 * v + 2];
                row.loss = loss;
                result.rows.push_back(std::move(row));
            }
            if (failed || !std::isfinite(loss)) {
                unstable = true;
                break;
            }
            if (it == iters) break;
            for (int k = 0; k < dim; ++k) {
                velocity[k] = momentum * velocity[k] + ev.grad[k];
                r[k] -= lr * velocity[k];
            }
        }
        if (unstable) result.unstable_runs.push_back(run);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Gradient-norm ratio density
// ---------------------------------------------------------------------------

namespace {

double column_norm(std::span<const double> g, int col) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += g[3 * col + i] * g[3 * col + i];
    return std::sqrt(s);
}

} // namespace

GradRatioResult gradient_ratio_density(int n, double box, uint64_t seed) {
    GradRatioResult result;
    RotationMatrix target = RotationMatrix::identity();
    Rng rng_gso(cell_seed(seed, {1}));
    Rng rng_svd(cell_seed(seed, {2}));

    for (int i = 0; i < n; ++i) {
        std::vector<double> r(6);
        for (double& v : r) v = rng_gso.uniform(-box, box);
        try {
            AlignmentEval ev = alignment_loss_grad(ProjKind::gso, r, target);
            double n1 = column_norm(ev.grad, 0);
            double n2 = column_norm(ev.grad, 1);
            if (n1 < 1e-14 || n2 < 1e-14) {
                ++result.skipped_gso;
            } else {
                result.rows.push_back({"gso", "nu1/nu2", n1 / n2});
            }
        } catch (const SingularInput&) {
            ++result.skipped_gso;
        }
    }
    for (int i = 0; i < n; ++i) {
        std::vector<double> r(9);
        for (double& v : r) v = rng_svd.uniform(-box, box);
        AlignmentEval ev = alignment_loss_grad(ProjKind::svd_plus, r, target);
        double n1 = column_norm(ev.grad, 0);
        double n2 = column_norm(ev.grad, 1);
        double n3 = column_norm(ev.grad, 2);
        if (n1 < 1e-14 || n2 < 1e-14 || n3 < 1e-14) {
            ++result.skipped_svd;
            continue;
        }
        result.rows.push_back({"svd_plus", "m1/m2", n1 / n2});
        result.rows.push_back({"svd_plus", "m1/m3", n1 / n3});
        result.rows.push_back({"svd_plus", "m2/m3", n2 / n3});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Fourier feature prediction
// ---------------------------------------------------------------------------

double FourierTarget::eval(const RotationMatrix& r) const {
    auto rv = r.vec();
    double t = t_net.forward_one(std::span<const double>(rv.data(), 9))[0];
    double s = 0.0;
    for (int k = 1; k <= n_b; ++k) {
        double arg = static_cast<double>(k) * kPi * t / period;
        s += a_coef[k - 1] * std::cos(arg) + b_coef[k - 1] * std::sin(arg);
    }
    return s;
}

FourierTarget FourierTarget::make(int n_b, int t_hidden, uint64_t seed) {
    if (n_b < 0 || n_b > 5)
        throw ConfigError("FourierTarget: n_b must be in [0, 5]");
    FourierTarget ft;
    ft.n_b = n_b;
    Rng rng(seed);
    ft.t_net = learn::MLPModel::init({9, t_hidden, 1}, learn::HeadKind::vector,
                                     rng);
    // Five coefficient pairs regardless of n_b, so the same seed yields the
    // same base function at every truncation depth.
    for (int k = 0; k < 5; ++k) {
        ft.a_coef.push_back(rng.normal());
        ft.b_coef.push_back(rng.normal());
    }
    return ft;
}

namespace {

struct FourierRepSpec {
    RepKind kind;
    bool augment;
};

FourierRepSpec fourier_rep_from_tag(const std::string& tag) {
    if (tag == "euler") return {RepKind::euler, false};
    if (tag == "exp") return {RepKind::exp, false};
    if (tag == "quat") return {RepKind::quat, false};
    if (tag == "quat_aug") return {RepKind::quat, true};
    if (tag == "sixd") return {RepKind::sixd, false};
    if (tag == "nined") return {RepKind::nined, false};
    throw ConfigError("fourier_experiment: unknown rep tag " + tag);
}

double rmse_of(const learn::MLPModel& m, const learn::Dataset& d) {
    std::vector<double> pred(d.size());
    m.forward_batch(d.x.data(), d.size(), pred.data());
    double s = 0.0;
    for (int i = 0; i < d.size(); ++i) {
        double e = pred[i] - d.t[i];
        s += e * e;
    }
    return std::sqrt(s / static_cast<double>(d.size()));
}

} // namespace

std::vector<FourierRow> fourier_experiment(const FourierParams& p, Meta* meta) {
    struct Cell {
        long n_b;
        std::string rep;
        long seed;
    };
    std::vector<Cell> cells;
    for (long nb : p.n_b)
        for (const auto& rep : p.reps)
            for (long seed : p.seeds) cells.push_back({nb, rep, seed});

    std::vector<FourierRow> rows(cells.size());
    auto run_cell = [&](int idx) {
        const Cell& cell = cells[idx];
        FourierRepSpec rspec = fourier_rep_from_tag(cell.rep);
        int dim = rep_dim(rspec.kind);

        uint64_t data_seed = cell_seed(p.master_seed,
                                       {0x10, static_cast<uint64_t>(cell.seed)});
        FourierTarget target = FourierTarget::make(
            static_cast<int>(cell.n_b), p.t_hidden, data_seed);

        // One rotation stream per (seed); identical across reps and n_b.
        Rng data_rng(cell_seed(p.master_seed,
                               {0x11, static_cast<uint64_t>(cell.seed)}));
        int total = p.train_n + p.val_n + p.test_n;
        std::vector<RotationMatrix> rots;
        rots.reserve(total);
        for (int i = 0; i < total; ++i) rots.push_back(sample_uniform(data_rng));

        auto make_split = [&](int begin, int count) {
            learn::Dataset d;
            d.input_dim = dim;
            d.target_dim = 1;
            for (int i = begin; i < begin + count; ++i) {
                auto v = rep_to_vector(from_matrix(rspec.kind, rots[i]));
                d.x.insert(d.x.end(), v.begin(), v.end());
                d.t.push_back(target.eval(rots[i]));
            }
            return d;
        };
        learn::Dataset train = make_split(0, p.train_n);
        learn::Dataset val = make_split(p.train_n, p.val_n);
        learn::Dataset test = make_split(p.train_n + p.val_n, p.test_n);

        if (rspec.augment) {
            std::vector<UnitQuaternion> quats;
            std::vector<std::vector<double>> feats;
            for (int i = 0; i < train.size(); ++i) {
                const double* x = train.x.data() + static_cast<std::size_t>(i) * 4;
                quats.push_back({x[0], x[1], x[2], x[3]});
                feats.push_back({train.t[i]});
            }
            augment_quaternion_dataset(quats, feats, p.aug_epsilon);
            learn::Dataset aug;
            aug.input_dim = 4;
            aug.target_dim = 1;
            for (std::size_t i = 0; i < quats.size(); ++i) {
                aug.x.insert(aug.x.end(),
                             {quats[i].w, quats[i].x, quats[i].y, quats[i].z});
                aug.t.push_back(feats[i][0]);
            }
            train = std::move(aug);
        }

        FourierRow row;
        row.rep = cell.rep;
        row.n_b = static_cast<int>(cell.n_b);
        row.seed = cell.seed;

        if (p.hidden == 0) {
            // Zero-capacity model: the best constant, the train-target mean.
            double mean = 0.0;
            for (double y : train.t) mean += y;
            mean /= static_cast<double>(train.t.size());
            auto const_rmse = [&](const learn::Dataset& d) {
                double s = 0.0;
                for (double y : d.t) s += (y - mean) * (y - mean);
                return std::sqrt(s / static_cast<double>(d.t.size()));
            };
            row.rmse_train = const_rmse(train);
            row.rmse_val = const_rmse(val);
            row.rmse_test = const_rmse(test);
            rows[idx] = std::move(row);
            return;
        }

        uint64_t train_seed = cell_seed(
            p.master_seed, {0x12, static_cast<uint64_t>(cell.seed),
                            static_cast<uint64_t>(cell.n_b),
                            tag_hash(cell.rep)});
        Rng init_rng(train_seed);
        learn::MLPModel model = learn::MLPModel::init(
            {dim, p.hidden, p.hidden, 1}, learn::HeadKind::vector, init_rng);

        learn::LossSpec spec;
        spec.metric = learn::LossKind::mse;
        learn::TrainConfig cfg;
        cfg.optimizer = learn::OptKind::adam;
        cfg.lr = p.lr;
        cfg.batch_size = p.batch;
        cfg.max_epochs = p.epochs;
        cfg.patience = -1;
        cfg.seed = cell_seed(train_seed, {0x13});

        learn::TrainResult tr = learn::train(model, train, val, spec, cfg);

        row.rmse_train = rmse_of(tr.best, train);
        row.rmse_val = rmse_of(tr.best, val);
        row.rmse_test = rmse_of(tr.best, test);
        rows[idx] = std::move(row);
    };

    parallel_cells(static_cast<int>(cells.size()), p.threads, run_cell);

    if (meta) {
        meta->add("experiment", std::string("fourier"));
        meta->add("epochs", static_cast<long>(p.epochs));
        meta->add("lr", p.lr);
        meta->add("batch", static_cast<long>(p.batch));
        meta->add("hidden", static_cast<long>(p.hidden));
        meta->add("t_hidden", static_cast<long>(p.t_hidden));
        meta->add("aug_epsilon", p.aug_epsilon);
        meta->add("splits", std::to_string(p.train_n) + "/" +
                                std::to_string(p.val_n) + "/" +
                                std::to_string(p.test_n));
        meta->add("optimizer", std::string("adam beta1=0.9 beta2=0.999 eps=1e-8"));
        meta->add("augmentation",
                  std::string("train split only, dataset-wide duplication"));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Rotation estimation from rotated point sets
// ---------------------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> toy_default_grid() {
    return {
        {"euler", "mse"},    {"exp", "mse"},         {"quat", "mse"},
        {"quat_hm", "mse"},  {"quat_rf", "mse"},     {"quat_rf", "mse_dp"},
        {"quat_hm", "quatpick1"}, {"sixd", "mse"},   {"nined", "mse"},
        {"sixd", "chordal"}, {"nined", "chordal"},   {"nined", "geodesic"},
    };
}

namespace {

struct ToyRepSpec {
    learn::HeadKind head;
    RepKind rep;
    bool halfspace; // canonical quats
    bool random_flip;
};

ToyRepSpec toy_rep_from_tag(const std::string& tag) {
    if (tag == "euler") return {learn::HeadKind::euler, RepKind::euler, false, false};
    if (tag == "exp") return {learn::HeadKind::expcoord, RepKind::exp, false, false};
    if (tag == "quat") return {learn::HeadKind::quat, RepKind::quat, false, false};
    if (tag == "quat_hm") return {learn::HeadKind::quat, RepKind::quat, true, false};
    if (tag == "quat_rf") return {learn::HeadKind::quat, RepKind::quat, true, true};
    if (tag == "sixd") return {learn::HeadKind::sixd, RepKind::sixd, false, false};
    if (tag == "nined") return {learn::HeadKind::nined, RepKind::nined, false, false};
    throw ConfigError("toy_rotation_estimation: unknown rep tag " + tag);
}

learn::LossSpec toy_loss_from_tag(const std::string& tag,
                                  learn::HeadKind head) {
    learn::LossSpec spec;
    if (tag == "mse") {
        spec.metric = learn::LossKind::mse;
    } else if (tag == "mae") {
        spec.metric = learn::LossKind::mae;
    } else if (tag == "mse_dp") {
        spec.metric = learn::LossKind::mse;
        spec.picking = learn::PickingPolicy::min_negation;
    } else if (tag == "cosine") {
        spec.metric = learn::LossKind::cosine;
    } else if (tag == "quatpick1") {
        spec.metric = learn::LossKind::quat_pick_i;
    } else if (tag == "quatpick2") {
        spec.metric = learn::LossKind::quat_pick_ii;
    } else if (tag == "chordal" || tag == "chordalsq" || tag == "geodesic") {
        spec.metric = tag == "chordal" ? learn::LossKind::chordal
                      : tag == "chordalsq" ? learn::LossKind::chordal_sq
                                           : learn::LossKind::geodesic;
        spec.target_space = learn::TargetSpace::so3;
        if (head == learn::HeadKind::sixd)
            spec.projection = learn::ProjectionPolicy::gso;
        else if (head == learn::HeadKind::nined)
            spec.projection = learn::ProjectionPolicy::svd_plus;
    } else {
        throw ConfigError("toy_rotation_estimation: unknown loss tag " + tag);
    }
    return spec;
}

double median_of(std::vector<double> v) {
    if (v.empty()) throw DataError("median of empty set");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::vector<ToyRow> toy_rotation_estimation(const ToyParams& p, Meta* meta) {
    struct Cell {
        std::string rep;
        std::string loss;
        long seed;
    };
    std::vector<Cell> cells;
    for (const auto& [rep, loss] : p.grid)
        for (long seed : p.seeds) cells.push_back({rep, loss, seed});

    std::vector<ToyRow> rows(cells.size());
    auto run_cell = [&](int idx) {
        const Cell& cell = cells[idx];
        ToyRepSpec rspec = toy_rep_from_tag(cell.rep);
        int rep_d = rep_dim(rspec.rep);
        int feat_d = 6 * p.n_points;

        // Point set, rotations, and noise shared across reps and losses for
        // a given seed.
        Rng data_rng(cell_seed(p.master_seed,
                               {0x20, static_cast<uint64_t>(cell.seed)}));
        std::vector<Vec3> points;
        points.reserve(p.n_points);
        for (int i = 0; i < p.n_points; ++i) points.push_back(data_rng.normal3());

        int total = p.train_n + p.val_n + p.test_n;
        std::vector<RotationMatrix> rots;
        std::vector<std::vector<double>> feats;
        rots.reserve(total);
        feats.reserve(total);
        for (int i = 0; i < total; ++i) {
            RotationMatrix r = sample_uniform(data_rng);
            std::vector<double> f;
            f.reserve(feat_d);
            for (const Vec3& pt : points) {
                f.push_back(pt.x);
                f.push_back(pt.y);
                f.push_back(pt.z);
            }
            for (const Vec3& pt : points) {
                Vec3 q = r.matrix() * pt + data_rng.normal3() * p.sigma;
                f.push_back(q.x);
                f.push_back(q.y);
                f.push_back(q.z);
            }
            rots.push_back(r);
            feats.push_back(std::move(f));
        }

        // Sign pattern for the random-flip variant depends only on
        // (seed, rep), so picking and plain losses see identical targets.
        Rng flip_rng(cell_seed(p.master_seed,
                               {0x21, static_cast<uint64_t>(cell.seed),
                                tag_hash(cell.rep)}));
        auto target_of = [&](const RotationMatrix& r) -> std::vector<double> {
            if (rspec.head == learn::HeadKind::quat) {
                UnitQuaternion q = rspec.halfspace ? matrix_to_quat(r)
                                                   : matrix_to_quat_raw(r);
                if (rspec.random_flip && flip_rng.uniform() < 0.5) q = q.negated();
                return {q.w, q.x, q.y, q.z};
            }
            return rep_to_vector(from_matrix(rspec.rep, r));
        };

        auto make_split = [&](int begin, int count) {
            learn::Dataset d;
            d.input_dim = feat_d;
            d.target_dim = rep_d;
            for (int i = begin; i < begin + count; ++i) {
                d.x.insert(d.x.end(), feats[i].begin(), feats[i].end());
                auto t = target_of(rots[i]);
                d.t.insert(d.t.end(), t.begin(), t.end());
                d.rot.push_back(rots[i]);
            }
            return d;
        };
        learn::Dataset train = make_split(0, p.train_n);
        learn::Dataset val = make_split(p.train_n, p.val_n);
        learn::Dataset test = make_split(p.train_n + p.val_n, p.test_n);

        learn::LossSpec spec = toy_loss_from_tag(cell.loss, rspec.head);

        uint64_t train_seed = cell_seed(
            p.master_seed, {0x22, static_cast<uint64_t>(cell.seed),
                            tag_hash(cell.rep),
                            tag_hash(cell.loss)});
        Rng init_rng(train_seed);
        learn::MLPModel model = learn::MLPModel::init(
            {feat_d, p.hidden, p.hidden, rep_d}, rspec.head, init_rng);

        learn::TrainConfig cfg;
        cfg.optimizer = learn::OptKind::adam;
        cfg.lr = p.lr;
        cfg.batch_size = p.batch;
        cfg.max_epochs = p.max_epochs;
        cfg.patience = p.patience;
        cfg.seed = cell_seed(train_seed, {0x23});

        learn::TrainResult tr = learn::train(model, train, val, spec, cfg);

        std::vector<double> pred(static_cast<std::size_t>(test.size()) * rep_d);
        tr.best.forward_batch(test.x.data(), test.size(), pred.data());
        std::vector<double> geos, chords;
        geos.reserve(test.size());
        chords.reserve(test.size());
        for (int i = 0; i < test.size(); ++i) {
            std::span<const double> y(pred.data() + static_cast<std::size_t>(i) * rep_d,
                                      static_cast<std::size_t>(rep_d));
            RotationMatrix rhat =
                learn::head_to_rotation(rspec.head, y, spec.projection);
            geos.push_back(geodesic(rhat, test.rot[i]));
            chords.push_back(chordal(rhat, test.rot[i]));
        }

        ToyRow row;
        row.rep = cell.rep;
        row.loss = cell.loss;
        row.seed = cell.seed;
        row.geodesic_med = median_of(geos);
        row.chordal_med = median_of(chords);
        rows[idx] = std::move(row);
    };

    parallel_cells(static_cast<int>(cells.size()), p.threads, run_cell);

    if (meta) {
        meta->add("experiment", std::string("toyest"));
        meta->add("n_points", static_cast<long>(p.n_points));
        meta->add("sigma", p.sigma);
        meta->add("splits", std::to_string(p.train_n) + "/" +
                                std::to_string(p.val_n) + "/" +
                                std::to_string(p.test_n));
        meta->add("hidden", static_cast<long>(p.hidden));
        meta->add("max_epochs", static_cast<long>(p.max_epochs));
        meta->add("patience", static_cast<long>(p.patience));
        meta->add("lr", p.lr);
        meta->add("batch", static_cast<long>(p.batch));
        meta->add("optimizer", std::string("adam beta1=0.9 beta2=0.999 eps=1e-8"));
        meta->add("quat_rf_flip_prob", 0.5);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Projection timing
// ---------------------------------------------------------------------------

std::vector<BenchRow> bench_projections(const std::vector<long>& batches,
                                        int repetitions, int warmup,
                                        uint64_t seed, Meta* meta) {
    if (repetitions < 1) throw ConfigError("bench: repetitions must be >= 1");
    std::vector<BenchRow> rows;
    Rng rng(seed);
    double sink = 0.0;
    double gso_total = 0.0, svd_total = 0.0;

    for (long batch : batches) {
        std::vector<SixD> gso_in;
        std::vector<Mat3> svd_in;
        gso_in.reserve(batch);
        svd_in.reserve(batch);
        for (long i = 0; i < batch; ++i) {
            SixD s{rng.normal3(), rng.normal3()};
            while (s.nu1.cross(s.nu2).norm() /
                       std::max(1e-300, s.nu1.norm() * s.nu2.norm()) <
                   1e-6)
                s = SixD{rng.normal3(), rng.normal3()};
            gso_in.push_back(s);
            Mat3 m;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) m(a, b) = rng.normal();
            svd_in.push_back(m);
        }

        auto time_op = [&](auto&& op) {
            for (int w = 0; w < warmup; ++w) op();
            std::vector<double> ms(repetitions);
            for (int rep = 0; rep < repetitions; ++rep) {
                auto t0 = std::chrono::steady_clock::now();
                op();
                auto t1 = std::chrono::steady_clock::now();
                ms[rep] = std::chrono::duration<double, std::milli>(t1 - t0).count();
            }
            return median_of(ms);
        };

        double gso_ms = time_op([&] {
            for (const SixD& s : gso_in) sink += gso(s)(0, 0);
        });
        double svd_ms = time_op([&] {
            for (const Mat3& m : svd_in) sink += svd_plus(m)(0, 0);
        });
        rows.push_back({"gso", static_cast<int>(batch), gso_ms});
        rows.push_back({"svd_plus", static_cast<int>(batch), svd_ms});
        gso_total += gso_ms;
        svd_total += svd_ms;
    }
    if (meta) {
        meta->add("experiment", std::string("bench"));
        meta->add("repetitions", static_cast<long>(repetitions));
        meta->add("warmup", static_cast<long>(warmup));
        meta->add("svd_over_gso_time_ratio",
                  gso_total > 0.0 ? svd_total / gso_total : 0.0);
        meta->add("sink", sink); // defeats dead-code elimination
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Distance-gradient fields
// ---------------------------------------------------------------------------

std::vector<DistanceField> distance_field_export(
    const std::vector<MetricKind>& metrics, int resolution) {
    if (resolution < 2) throw ConfigError("distance_field: resolution must be >= 2");
    std::vector<Vec2> grid;
    grid.reserve(static_cast<std::size_t>(resolution) * resolution);
    for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution; ++j) {
            double x = -2.0 + 4.0 * static_cast<double>(i) / (resolution - 1);
            double y = -2.0 + 4.0 * static_cast<double>(j) / (resolution - 1);
            grid.push_back({x, y});
        }
    std::vector<DistanceField> out;
    for (MetricKind k : metrics)
        out.push_back({k, gradient_field(k, Vec2{1.0, 0.0}, grid)});
    return out;
}

} // namespace rotkit::experiments
