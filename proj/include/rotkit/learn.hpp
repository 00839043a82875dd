#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rotkit/autodiff.hpp"
#include "rotkit/rng.hpp"
#include "rotkit/so3.hpp"

namespace rotkit::learn {

/// Structure attached to the model output. `vector` means a plain regression
/// head; the rotation heads define how predictions map into the rotation
/// group for group-space losses and evaluation.
enum class HeadKind { vector, euler, expcoord, quat, sixd, nined };

HeadKind head_from_tag(const std::string& tag);
std::string head_tag(HeadKind h);
int head_dim(HeadKind h);

enum class LossKind {
    mse,
    mae,
    l2,
    cosine,
    chordal,
    chordal_sq,
    geodesic,
    quat_pick_i,
    quat_pick_ii,
};

LossKind loss_from_tag(const std::string& tag);
std::string loss_tag(LossKind k);

enum class ProjectionPolicy { none, gso, svd_plus };
enum class PickingPolicy { plain, min_negation };
enum class TargetSpace { representation, so3 };

/// How the prediction is compared to the target: metric, optional projection
/// into the rotation group, optional picking over the negated target.
struct LossSpec {
    LossKind metric = LossKind::mse;
    ProjectionPolicy projection = ProjectionPolicy::none;
    PickingPolicy picking = PickingPolicy::plain;
    TargetSpace target_space = TargetSpace::representation;
    double arccos_clamp = 1e-7;

    /// Throws ConfigError when the combination is invalid for the head.
    void validate(HeadKind head) const;
};

struct MLPModel {
    std::vector<int> widths; // [in, hidden..., out]
    HeadKind head = HeadKind::vector;
    std::vector<std::vector<double>> w; // per layer, (out x in) row-major
    std::vector<std::vector<double>> b; // per layer, (out)

    /// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
    static MLPModel init(const std::vector<int>& widths, HeadKind head,
                         Rng& rng);

    int input_dim() const { return widths.front(); }
    int output_dim() const { return widths.back(); }
    int layer_count() const { return static_cast<int>(w.size()); }

    /// Inference over a row-major batch (no tape).
    void forward_batch(const double* x, int n, double* y) const;
    std::vector<double> forward_one(std::span<const double> x) const;

    void save(const std::string& path) const;
    static MLPModel load(const std::string& path);
};

/// Supervised set: features x (n x input_dim), targets t (n x target_dim),
/// and, for group-space losses and rotation metrics, the target rotations.
struct Dataset {
    int input_dim = 0;
    int target_dim = 0;
    std::vector<double> x;
    std::vector<double> t;
    std::vector<RotationMatrix> rot;

    int size() const {
        return input_dim == 0 ? 0 : static_cast<int>(x.size()) / input_dim;
    }
};

enum class OptKind { sgd_momentum, adam };

struct TrainConfig {
    OptKind optimizer = OptKind::adam;
    double lr = 1e-3;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 64;
    int max_epochs = 100;
    /// Number of tolerated non-improving validation epochs; negative
    /// disables early stopping.
    int patience = -1;
    uint64_t seed = 0;

    void validate() const;
};

struct EpochRecord {
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    MLPModel best;
    int best_epoch = -1;
    std::vector<EpochRecord> history;
};

/// Gradient-descent-with-momentum parameter update: v <- mu v + g,
/// p <- p - lr v.
struct SgdMomentumState {
    std::vector<double> v;
};
void sgd_momentum_step(std::span<double> p, std::span<const double> g,
                       SgdMomentumState& st, double lr, double momentum);

/// Adam with bias correction.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long t = 0;
};
void adam_step(std::span<double> p, std::span<const double> g, AdamState& st,
               double lr, double beta1, double beta2, double eps);

/// Builds the loss for one batch on the given tape and returns the root
/// node. `rows` indexes into the dataset. Parameter nodes are returned so
/// the caller can read their gradients. Exposed for tests.
struct BatchGraph {
    ad::NodeId loss;
    std::vector<ad::NodeId> w_nodes;
    std::vector<ad::NodeId> b_nodes;
};
BatchGraph build_batch_loss(ad::Tape& tape, const MLPModel& model,
                            const Dataset& data, std::span<const int> rows,
                            const LossSpec& spec);

/// Mean loss over a whole dataset without gradients.
double evaluate_loss(const MLPModel& model, const Dataset& data,
                     const LossSpec& spec);

/// Full training loop with per-epoch history, deterministic given the seed.
/// Returns the best-validation checkpoint. Throws NumericalFailure on a
/// non-finite loss.
TrainResult train(const MLPModel& model, const Dataset& train_set,
                  const Dataset& val_set, const LossSpec& spec,
                  const TrainConfig& cfg);

/// Maps one prediction row through the head's group map (normalize + formula
/// for quaternions, frame completion for sixd, projection for nined).
RotationMatrix head_to_rotation(HeadKind head, std::span<const double> y,
                                ProjectionPolicy projection);

} // namespace rotkit::learn
