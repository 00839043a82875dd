#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rotkit/learn.hpp"
#include "rotkit/metrics.hpp"
#include "rotkit/representations.hpp"

namespace rotkit::experiments {

/// Ordered key/value sidecar written next to every result file. Holds the
/// resolved configuration, seeds, and version so a run can be reproduced
/// bit-identically.
struct Meta {
    std::vector<std::pair<std::string, std::string>> entries;

    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, double value);
    void add(const std::string& key, long value);
    void add_seed(const std::string& key, uint64_t value);
    void write(const std::string& path) const;
};

/// Runs fn(0..n-1) across a small thread pool; results must be written to
/// preallocated slots so the output order is schedule-independent.
/// threads <= 0 selects the hardware count.
void parallel_cells(int n_cells, int threads,
                    const std::function<void(int)>& fn);

/// Stable per-cell seed derivation from the master seed and cell labels.
uint64_t cell_seed(uint64_t master, std::initializer_list<uint64_t> parts);

// ---------------------------------------------------------------------------
// Distance-ratio scan over random rotation pairs
// ---------------------------------------------------------------------------

struct LipschitzRow {
    std::string rep;
    double d_so3 = 0.0;
    double d_repr = 0.0;
};

/// Pairs are drawn in three strata so the scan exposes both the bulk ratio
/// behavior and the discontinuity witnesses: independent pairs, small local
/// perturbations, and perturbations started next to each representation's
/// canonical-half boundary.
std::vector<LipschitzRow> lipschitz_scan(RepKind rep, int n_pairs,
                                         uint64_t seed);

/// Largest distance between two points of the canonical representation set;
/// reference width for the scan plots.
double representation_width(RepKind rep);

// ---------------------------------------------------------------------------
// Alignment loss for the projection-gradient studies
// ---------------------------------------------------------------------------

enum class ProjKind { gso, svd_plus };

struct AlignmentEval {
    double loss = 0.0;
    std::vector<double> grad;
};

/// loss(r) = |vec(target) - vec(f(r))| with f the chosen projection. Both
/// gradient studies call exactly this function, so they cannot diverge.
/// Throws SingularInput for degenerate Gram-Schmidt inputs.
AlignmentEval alignment_loss_grad(ProjKind kind, std::span<const double> r,
                                  const RotationMatrix& target);

// ---------------------------------------------------------------------------
// Optimization paths of the representation vectors
// ---------------------------------------------------------------------------

struct GradPathRow {
    int run = 0;
    int iter = 0;
    std::string vector_name;
    double x = 0.0, y = 0.0, z = 0.0;
    double loss = 0.0;
};

struct GradPathsResult {
    std::vector<GradPathRow> rows;
    std::vector<int> unstable_runs;
};

/// Gradient descent with momentum on the alignment loss toward the identity
/// rotation, starting from per-coordinate uniform draws in [-2, 2]. Records
/// every column vector each iteration. Runs that hit a degenerate input or a
/// non-finite loss are flagged; when include_degenerate_probe is set, one
/// extra run starts from exactly parallel Gram-Schmidt columns.
GradPathsResult gradient_paths(ProjKind kind, int n_runs, int iters, double lr,
                               double momentum, uint64_t seed,
                               bool include_degenerate_probe);

// ---------------------------------------------------------------------------
// Gradient-norm ratio density
// ---------------------------------------------------------------------------

struct GradRatioRow {
    std::string projection;
    std::string ratio_pair;
    double ratio = 0.0;
};

struct GradRatioResult {
    std::vector<GradRatioRow> rows;
    long skipped_gso = 0;
    long skipped_svd = 0;
};

/// Gradient-norm ratios of the alignment loss at n per-coordinate uniform
/// points in [-box, box]^d, for both projections. Degenerate points and
/// zero-gradient points are skipped and counted.
GradRatioResult gradient_ratio_density(int n, double box, uint64_t seed);

// ---------------------------------------------------------------------------
// Feature prediction of a random Fourier series
// ---------------------------------------------------------------------------

/// Scalar target: sum_k A_k cos(k pi t(R) / L) + B_k sin(k pi t(R) / L) with
/// period L = 2 and t a fixed randomly initialized ReLU network on vec(R).
struct FourierTarget {
    int n_b = 1;
    double period = 2.0;
    std::vector<double> a_coef;
    std::vector<double> b_coef;
    learn::MLPModel t_net;

    double eval(const RotationMatrix& r) const;
    static FourierTarget make(int n_b, int t_hidden, uint64_t seed);
};

struct FourierRow {
    std::string rep;
    int n_b = 0;
    long seed = 0;
    double rmse_train = 0.0;
    double rmse_val = 0.0;
    double rmse_test = 0.0;
};

struct FourierParams {
    std::vector<long> n_b{1, 2, 3};
    /// euler | exp | quat | quat_aug | sixd | nined
    std::vector<std::string> reps{"euler", "exp", "quat", "quat_aug", "sixd", "nined"};
    std::vector<long> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int train_n = 800;
    int val_n = 200;
    int test_n = 1000;
    int epochs = 400;
    double lr = 1e-3;
    int batch = 64;
    int hidden = 256;
    int t_hidden = 64;
    double aug_epsilon = 0.1;
    int threads = 0;
    uint64_t master_seed = 0;
};

std::vector<FourierRow> fourier_experiment(const FourierParams& p, Meta* meta);

// ---------------------------------------------------------------------------
// Rotation estimation from rotated point sets
// ---------------------------------------------------------------------------

struct ToyRow {
    std::string rep;
    std::string loss;
    long seed = 0;
    double geodesic_med = 0.0;
    double chordal_med = 0.0;
};

struct ToyParams {
    /// (rep, loss) cells. rep: euler | exp | quat | quat_hm | quat_rf | sixd
    /// | nined; loss: mse | mae | mse_dp | cosine | chordal | chordalsq |
    /// geodesic | quatpick1 | quatpick2.
    std::vector<std::pair<std::string, std::string>> grid;
    std::vector<long> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int n_points = 32;
    double sigma = 0.0;
    int train_n = 1024;
    int val_n = 256;
    int test_n = 512;
    int hidden = 128;
    int max_epochs = 100;
    int patience = 10;
    double lr = 1e-3;
    int batch = 64;
    int threads = 0;
    uint64_t master_seed = 0;
};

/// Default (rep, loss) grid covering the comparison rows.
std::vector<std::pair<std::string, std::string>> toy_default_grid();

std::vector<ToyRow> toy_rotation_estimation(const ToyParams& p, Meta* meta);

// ---------------------------------------------------------------------------
// Forward-pass timing of the two projections
// ---------------------------------------------------------------------------

struct BenchRow {
    std::string op;
    int batch = 0;
    double median_ms = 0.0;
};

std::vector<BenchRow> bench_projections(const std::vector<long>& batches,
                                        int repetitions, int warmup,
                                        uint64_t seed, Meta* meta);

// ---------------------------------------------------------------------------
// Planar distance-gradient fields
// ---------------------------------------------------------------------------

struct DistanceField {
    MetricKind metric;
    std::vector<FieldSample> samples;
};

/// Uniform lattice over [-2, 2]^2 with `resolution` points per axis, target
/// (1, 0).
std::vector<DistanceField> distance_field_export(
    const std::vector<MetricKind>& metrics, int resolution);

} // namespace rotkit::experiments
