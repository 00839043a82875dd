#include "rotkit/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "rotkit/errors.hpp"
#include "rotkit/kernels.hpp"
#include "rotkit/metrics.hpp"
#include "rotkit/projections.hpp"
#include "rotkit/representations.hpp"

namespace rotkit::learn {

HeadKind head_from_tag(const std::string& tag) {
    if (tag == "vector") return HeadKind::vector;
    if (tag == "euler") return HeadKind::euler;
    if (tag == "exp") return HeadKind::expcoord;
    if (tag == "quat") return HeadKind::quat;
    if (tag == "sixd") return HeadKind::sixd;
    if (tag == "nined") return HeadKind::nined;
    throw ConfigError("unknown head tag: " + tag);
}

std::string head_tag(HeadKind h) {
    switch (h) {
        case HeadKind::vector: return "vector";
        case HeadKind::euler: return "euler";
        case HeadKind::expcoord: return "exp";
        case HeadKind::quat: return "quat";
        case HeadKind::sixd: return "sixd";
        case HeadKind::nined: return "nined";
    }
    throw ConfigError("unknown head");
}

int head_dim(HeadKind h) {
    switch (h) {
        case HeadKind::vector: return -1;
        case HeadKind::euler: return 3;
        case HeadKind::expcoord: return 3;
        case HeadKind::quat: return 4;
        case HeadKind::sixd: return 6;
        case HeadKind::nined: return 9;
    }
    throw ConfigError("unknown head");
}

LossKind loss_from_tag(const std::string& tag) {
    if (tag == "mse") return LossKind::mse;
    if (tag == "mae") return LossKind::mae;
    if (tag == "l2") return LossKind::l2;
    if (tag == "cosine") return LossKind::cosine;
    if (tag == "chordal") return LossKind::chordal;
    if (tag == "chordalsq") return LossKind::chordal_sq;
    if (tag == "geodesic") return LossKind::geodesic;
    if (tag == "quatpick1") return LossKind::quat_pick_i;
    if (tag == "quatpick2") return LossKind::quat_pick_ii;
    throw ConfigError("unknown loss tag: " + tag);
}

std::string loss_tag(LossKind k) {
    switch (k) {
        case LossKind::mse: return "mse";
        case LossKind::mae: return "mae";
        case LossKind::l2: return "l2";
        case LossKind::cosine: return "cosine";
        case LossKind::chordal: return "chordal";
        case LossKind::chordal_sq: return "chordalsq";
        case LossKind::geodesic: return "geodesic";
        case LossKind::quat_pick_i: return "quatpick1";
        case LossKind::quat_pick_ii: return "quatpick2";
    }
    throw ConfigError("unknown loss");
}

void LossSpec::validate(HeadKind head) const {
    bool so3_metric = metric == LossKind::chordal ||
                      metric == LossKind::chordal_sq ||
                      metric == LossKind::geodesic;
    if (target_space == TargetSpace::so3) {
        if (!so3_metric)
            throw ConfigError("group-space targets need chordal/chordalsq/geodesic");
        if (head == HeadKind::vector)
            throw ConfigError("plain vector head has no rotation map");
        if (picking != PickingPolicy::plain)
            throw ConfigError("picking does not apply to group-space losses");
    } else {
        if (so3_metric)
            throw ConfigError("chordal/chordalsq/geodesic need target_space = so3");
    }
    bool quat_metric =
        metric == LossKind::quat_pick_i || metric == LossKind::quat_pick_ii;
    if (quat_metric && head != HeadKind::quat)
        throw ConfigError("quaternion picking metrics need a quat head");
    if (quat_metric && picking != PickingPolicy::plain)
        throw ConfigError("quaternion picking metrics already pick");
    switch (projection) {
        case ProjectionPolicy::none:
            break;
        case ProjectionPolicy::gso:
            if (head != HeadKind::sixd)
                throw ConfigError("gso projection needs a sixd head");
            break;
        case ProjectionPolicy::svd_plus:
            if (head != HeadKind::nined)
                throw ConfigError("svd_plus projection needs a nined head");
            break;
    }
    if (target_space == TargetSpace::so3 && metric == LossKind::geodesic &&
        head == HeadKind::nined && projection == ProjectionPolicy::none)
        throw ConfigError("geodesic on raw nined output is undefined");
    if (target_space == TargetSpace::so3 && head == HeadKind::sixd &&
        projection == ProjectionPolicy::none)
        throw ConfigError("sixd head needs gso for group-space losses");
}

MLPModel MLPModel::init(const std::vector<int>& widths, HeadKind head,
                        Rng& rng) {
    if (widths.size() < 2) throw ConfigError("MLPModel: need at least 2 widths");
    for (int wd : widths)
        if (wd <= 0) throw ConfigError("MLPModel: nonpositive width");
    if (head != HeadKind::vector && widths.back() != head_dim(head))
        throw ConfigError("MLPModel: output width does not match head");
    MLPModel m;
    m.widths = widths;
    m.head = head;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        int in = widths[l], out = widths[l + 1];
        double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        std::vector<double> wl(static_cast<std::size_t>(out) * in);
        for (double& v : wl) v = rng.uniform(-bound, bound);
        m.w.push_back(std::move(wl));
        m.b.emplace_back(out, 0.0);
    }
    return m;
}

void MLPModel::forward_batch(const double* x, int n, double* y) const {
    int layers = layer_count();
    std::vector<double> cur(x, x + static_cast<std::size_t>(n) * widths[0]);
    std::vector<double> next;
    for (int l = 0; l < layers; ++l) {
        int in = widths[l], out = widths[l + 1];
        next.resize(static_cast<std::size_t>(n) * out);
        kernels::matmul_nt(cur.data(), w[l].data(), b[l].data(), next.data(),
                           n, in, out);
        if (l + 1 < layers)
            kernels::relu_forward(next.data(), next.data(), next.size());
        cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), y);
}

std::vector<double> MLPModel::forward_one(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim())
        throw DataError("forward_one: input dimension mismatch");
    std::vector<double> y(output_dim());
    forward_batch(x.data(), 1, y.data());
    return y;
}

void MLPModel::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write checkpoint: " + path);
    f << "mlp";
    for (int wd : widths) f << ' ' << wd;
    f << "\nhead " << head_tag(head) << "\n";
    char buf[64];
    auto dump = [&](const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", v[i]);
            f << (i ? " " : "") << buf;
        }
        f << "\n";
    };
    for (int l = 0; l < layer_count(); ++l) {
        f << "w" << l << " ";
        dump(w[l]);
        f << "b" << l << " ";
        dump(b[l]);
    }
}

MLPModel MLPModel::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read checkpoint: " + path);
    std::string line;
    if (!std::getline(f, line)) throw DataError("checkpoint: missing header");
    std::istringstream hs(line);
    std::string tag;
    hs >> tag;
    if (tag != "mlp") throw DataError("checkpoint: bad magic");
    MLPModel m;
    int wd;
    while (hs >> wd) m.widths.push_back(wd);
    if (m.widths.size() < 2) throw DataError("checkpoint: bad widths");
    if (!std::getline(f, line)) throw DataError("checkpoint: missing head");
    std::istringstream hd(line);
    hd >> tag;
    std::string head;
    hd >> head;
    m.head = head_from_tag(head);
    for (std::size_t l = 0; l + 1 < m.widths.size(); ++l) {
        std::size_t in = m.widths[l], out = m.widths[l + 1];
        std::vector<double> wl(in * out), bl(out);
        if (!std::getline(f, line)) throw DataError("checkpoint: missing weights");
        std::istringstream ws(line);
        ws >> tag;
        for (double& v : wl)
            if (!(ws >> v)) throw DataError("checkpoint: truncated weights");
        if (!std::getline(f, line)) throw DataError("checkpoint: missing bias");
        std::istringstream bs(line);
        bs >> tag;
        for (double& v : bl)
            if (!(bs >> v)) throw DataError("checkpoint: truncated bias");
        m.w.push_back(std::move(wl));
        m.b.push_back(std::move(bl));
    }
    return m;
}

void TrainConfig::validate() const {
    if (lr <= 0.0) throw ConfigError("TrainConfig: lr must be positive");
    if (batch_size <= 0) throw ConfigError("TrainConfig: batch_size must be positive");
    if (max_epochs <= 0) throw ConfigError("TrainConfig: max_epochs must be positive");
    if (patience > max_epochs) throw ConfigError("TrainConfig: patience exceeds max_epochs");
    if (momentum < 0.0 || momentum >= 1.0)
        throw ConfigError("TrainConfig: momentum must be in [0, 1)");
}

void sgd_momentum_step(std::span<double> p, std::span<const double> g,
                       SgdMomentumState& st, double lr, double momentum) {
    if (p.size() != g.size()) throw DataError("sgd step: size mismatch");
    if (st.v.size() != p.size()) st.v.assign(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        st.v[i] = momentum * st.v[i] + g[i];
        p[i] -= lr * st.v[i];
    }
}

void adam_step(std::span<double> p, std::span<const double> g, AdamState& st,
               double lr, double beta1, double beta2, double eps) {
    if (p.size() != g.size()) throw DataError("adam step: size mismatch");
    if (st.m.size() != p.size()) {
        st.m.assign(p.size(), 0.0);
        st.v.assign(p.size(), 0.0);
        st.t = 0;
    }
    ++st.t;
    double c1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
    double c2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));
    kernels::adam_update(p.data(), g.data(), st.m.data(), st.v.data(), p.size(),
                         lr, beta1, beta2, eps, c1, c2);
}

namespace {

/// Per-row loss chain after the dense trunk.
ad::NodeId row_loss(ad::Tape& tape, ad::NodeId pred_row, const Dataset& data,
                    int row, const MLPModel& model, const LossSpec& spec) {
    std::span<const double> target(data.t.data() +
                                       static_cast<std::size_t>(row) * data.target_dim,
                                   static_cast<std::size_t>(data.target_dim));
    if (spec.target_space == TargetSpace::representation) {
        auto base = [&](std::span<const double> t) -> ad::NodeId {
            switch (spec.metric) {
                case LossKind::mse: return tape.mse_to_const(pred_row, t);
                case LossKind::mae: return tape.mae_to_const(pred_row, t);
                case LossKind::l2: return tape.l2_to_const(pred_row, t);
                case LossKind::cosine: return tape.cosine_to_const(pred_row, t);
                case LossKind::quat_pick_i: {
                    ad::NodeId q = tape.normalize(pred_row);
                    return tape.quat_pick_i_to_const(q, t);
                }
                case LossKind::quat_pick_ii: {
                    ad::NodeId q = tape.normalize(pred_row);
                    return tape.quat_pick_ii_to_const(q, t);
                }
                default:
                    throw ConfigError("row_loss: metric invalid in representation space");
            }
        };
        if (spec.picking == PickingPolicy::min_negation) {
            std::vector<double> neg(target.begin(), target.end());
            for (double& v : neg) v = -v;
            ad::NodeId a = base(target);
            ad::NodeId b = base(neg);
            return tape.pick_min(a, b);
        }
        return base(target);
    }

    // Group-space target: map the prediction into the rotation group first.
    ad::NodeId mat9;
    switch (model.head) {
        case HeadKind::euler: mat9 = tape.euler_to_mat9(pred_row); break;
        case HeadKind::expcoord: mat9 = tape.expmap9(pred_row); break;
        case HeadKind::quat:
            mat9 = tape.quat_to_mat9(tape.normalize(pred_row));
            break;
        case HeadKind::sixd: mat9 = tape.gso9(pred_row); break;
        case HeadKind::nined:
            mat9 = spec.projection == ProjectionPolicy::svd_plus
                       ? tape.svdplus9(pred_row)
                       : pred_row;
            break;
        default:
            throw ConfigError("row_loss: head has no rotation map");
    }
    const RotationMatrix& rot = data.rot[row];
    auto rv = rot.vec();
    switch (spec.metric) {
        case LossKind::chordal: return tape.l2_to_const(mat9, rv);
        case LossKind::chordal_sq: return tape.sqnorm_to_const(mat9, rv);
        case LossKind::geodesic:
            return tape.geodesic_to_const(mat9, rot, spec.arccos_clamp);
        default:
            throw ConfigError("row_loss: metric invalid in group space");
    }
}

} // namespace

BatchGraph build_batch_loss(ad::Tape& tape, const MLPModel& model,
                            const Dataset& data, std::span<const int> rows,
                            const LossSpec& spec) {
    spec.validate(model.head);
    if (spec.target_space == TargetSpace::so3 &&
        data.rot.size() != static_cast<std::size_t>(data.size()))
        throw DataError("build_batch_loss: group-space loss needs target rotations");
    int n = static_cast<int>(rows.size());
    int in = model.input_dim();
    std::vector<double> xb(static_cast<std::size_t>(n) * in);
    for (int r = 0; r < n; ++r)
        std::copy_n(data.x.data() + static_cast<std::size_t>(rows[r]) * in, in,
                    xb.data() + static_cast<std::size_t>(r) * in);

    BatchGraph g;
    ad::NodeId cur = tape.input(xb, n, in, /*requires_grad=*/false);
    for (int l = 0; l < model.layer_count(); ++l) {
        ad::NodeId wn = tape.input(model.w[l], model.widths[l + 1],
                                   model.widths[l], /*requires_grad=*/true);
        ad::NodeId bn =
            tape.input(model.b[l], 1, model.widths[l + 1], /*requires_grad=*/true);
        g.w_nodes.push_back(wn);
        g.b_nodes.push_back(bn);
        cur = tape.linear(cur, wn, bn);
        if (l + 1 < model.layer_count()) cur = tape.relu(cur);
    }

    bool batched_fast_path = spec.target_space == TargetSpace::representation &&
                             spec.picking == PickingPolicy::plain &&
                             (spec.metric == LossKind::mse ||
                              spec.metric == LossKind::mae);
    if (batched_fast_path) {
        std::vector<double> tb(static_cast<std::size_t>(n) * data.target_dim);
        for (int r = 0; r < n; ++r)
            std::copy_n(data.t.data() +
                            static_cast<std::size_t>(rows[r]) * data.target_dim,
                        data.target_dim,
                        tb.data() + static_cast<std::size_t>(r) * data.target_dim);
        g.loss = spec.metric == LossKind::mse ? tape.mse_to_const(cur, tb)
                                              : tape.mae_to_const(cur, tb);
        return g;
    }

    std::vector<ad::NodeId> losses;
    losses.reserve(n);
    for (int r = 0; r < n; ++r) {
        ad::NodeId pr = tape.row(cur, r);
        losses.push_back(row_loss(tape, pr, data, rows[r], model, spec));
    }
    g.loss = tape.mean(losses);
    return g;
}

namespace {

double plain_vector_metric(LossKind metric, std::span<const double> p,
                           std::span<const double> t) {
    switch (metric) {
        case LossKind::mse: {
            double s = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i)
                s += (p[i] - t[i]) * (p[i] - t[i]);
            return s / static_cast<double>(p.size());
        }
        case LossKind::mae: {
            double s = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - t[i]);
            return s / static_cast<double>(p.size());
        }
        case LossKind::l2: {
            double s = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i)
                s += (p[i] - t[i]) * (p[i] - t[i]);
            return std::sqrt(s);
        }
        case LossKind::cosine: {
            double dot = 0.0, np = 0.0, nt = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                dot += p[i] * t[i];
                np += p[i] * p[i];
                nt += t[i] * t[i];
            }
            np = std::sqrt(np);
            nt = std::sqrt(nt);
            if (np <= 1e-12 || nt <= 1e-12)
                throw NumericalFailure("cosine loss: zero-length operand");
            return 1.0 - dot / (np * nt);
        }
        default:
            throw ConfigError("plain_vector_metric: unsupported metric");
    }
}

double plain_row_loss(const MLPModel& model, const LossSpec& spec,
                      std::span<const double> pred, const Dataset& data,
                      int row) {
    std::span<const double> target(
        data.t.data() + static_cast<std::size_t>(row) * data.target_dim,
        static_cast<std::size_t>(data.target_dim));
    if (spec.target_space == TargetSpace::representation) {
        if (spec.metric == LossKind::quat_pick_i ||
            spec.metric == LossKind::quat_pick_ii) {
            double n = 0.0;
            for (double v : pred) n += v * v;
            n = std::sqrt(n);
            if (n < 1e-12) throw NumericalFailure("quat head output is zero");
            UnitQuaternion q{pred[0] / n, pred[1] / n, pred[2] / n, pred[3] / n};
            UnitQuaternion t{target[0], target[1], target[2], target[3]};
            return spec.metric == LossKind::quat_pick_i
                       ? rotkit::quat_pick_i(q, t)
                       : rotkit::quat_pick_ii(q, t);
        }
        double base = plain_vector_metric(spec.metric, pred, target);
        if (spec.picking == PickingPolicy::min_negation) {
            std::vector<double> neg(target.begin(), target.end());
            for (double& v : neg) v = -v;
            base = std::min(base, plain_vector_metric(spec.metric, pred, neg));
        }
        return base;
    }
    // Group space: map through the head, then evaluate against the target
    // rotation with the same clamped arccos the differentiable path uses.
    const RotationMatrix& rot = data.rot[row];
    std::array<double, 9> p9{};
    if (model.head == HeadKind::nined &&
        spec.projection == ProjectionPolicy::none) {
        std::copy_n(pred.begin(), 9, p9.begin());
    } else {
        p9 = head_to_rotation(model.head, pred, spec.projection).vec();
    }
    auto rv = rot.vec();
    switch (spec.metric) {
        case LossKind::chordal:
        case LossKind::chordal_sq: {
            double s = 0.0;
            for (int i = 0; i < 9; ++i) s += (p9[i] - rv[i]) * (p9[i] - rv[i]);
            return spec.metric == LossKind::chordal ? std::sqrt(s) : s;
        }
        case LossKind::geodesic: {
            double tr = 0.0;
            for (int i = 0; i < 9; ++i) tr += p9[i] * rv[i];
            double u = std::clamp(0.5 * (tr - 1.0), -1.0 + spec.arccos_clamp,
                                  1.0 - spec.arccos_clamp);
            return std::acos(u);
        }
        default:
            throw ConfigError("plain_row_loss: unsupported group metric");
    }
}

} // namespace

double evaluate_loss(const MLPModel& model, const Dataset& data,
                     const LossSpec& spec) {
    if (data.size() == 0) throw DataError("evaluate_loss: empty dataset");
    spec.validate(model.head);
    if (spec.target_space == TargetSpace::so3 &&
        data.rot.size() != static_cast<std::size_t>(data.size()))
        throw DataError("evaluate_loss: group-space loss needs target rotations");
    int n = data.size();
    int out = model.output_dim();
    std::vector<double> pred(static_cast<std::size_t>(n) * out);
    model.forward_batch(data.x.data(), n, pred.data());
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        std::span<const double> row(pred.data() + static_cast<std::size_t>(i) * out,
                                    static_cast<std::size_t>(out));
        s += plain_row_loss(model, spec, row, data, i);
    }
    return s / static_cast<double>(n);
}

RotationMatrix head_to_rotation(HeadKind head, std::span<const double> y,
                                ProjectionPolicy projection) {
    switch (head) {
        case HeadKind::euler:
            return euler_to_matrix(EulerXYZ{y[0], y[1], y[2]});
        case HeadKind::expcoord:
            return exp_so3({y[0], y[1], y[2]});
        case HeadKind::quat: {
            double n = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2] +
                                 y[3] * y[3]);
            if (n < 1e-12) throw NumericalFailure("quat head output is zero");
            return quat_to_matrix(
                UnitQuaternion{y[0] / n, y[1] / n, y[2] / n, y[3] / n});
        }
        case HeadKind::sixd:
            return gso(SixD{{y[0], y[1], y[2]}, {y[3], y[4], y[5]}});
        case HeadKind::nined:
            // Raw matrix outputs are evaluated through the projection too.
            (void)projection;
            return svd_plus(Mat3::from_vec(y.data()));
        default:
            throw ConfigError("head_to_rotation: vector head has no rotation");
    }
}

TrainResult train(const MLPModel& model, const Dataset& train_set,
                  const Dataset& val_set, const LossSpec& spec,
                  const TrainConfig& cfg) {
    cfg.validate();
    spec.validate(model.head);
    if (train_set.size() == 0 || val_set.size() == 0)
        throw DataError("train: empty split");

    MLPModel cur = model;
    Rng rng(cfg.seed);
    std::vector<SgdMomentumState> sgd_w(cur.layer_count()), sgd_b(cur.layer_count());
    std::vector<AdamState> adam_w(cur.layer_count()), adam_b(cur.layer_count());

    TrainResult result;
    result.best = cur;
    double best_val = std::numeric_limits<double>::infinity();
    int wait = 0;

    std::vector<int> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        long seen = 0;
        for (std::size_t start = 0; start < order.size();
             start += cfg.batch_size) {
            std::size_t end = std::min(order.size(),
                                       start + static_cast<std::size_t>(cfg.batch_size));
            std::span<const int> rows(order.data() + start, end - start);
            ad::Tape tape;
            BatchGraph g = build_batch_loss(tape, cur, train_set, rows, spec);
            double loss = tape.scalar(g.loss);
            if (!std::isfinite(loss))
                throw NumericalFailure("train: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", batch index " +
                                       std::to_string(start / cfg.batch_size));
            tape.backward(g.loss);
            for (int l = 0; l < cur.layer_count(); ++l) {
                auto gw = tape.adjoint(g.w_nodes[l]);
                auto gb = tape.adjoint(g.b_nodes[l]);
                if (cfg.optimizer == OptKind::adam) {
                    adam_step(cur.w[l], gw, adam_w[l], cfg.lr, cfg.beta1,
                              cfg.beta2, cfg.eps);
                    adam_step(cur.b[l], gb, adam_b[l], cfg.lr, cfg.beta1,
                              cfg.beta2, cfg.eps);
                } else {
                    sgd_momentum_step(cur.w[l], gw, sgd_w[l], cfg.lr,
                                      cfg.momentum);
                    sgd_momentum_step(cur.b[l], gb, sgd_b[l], cfg.lr,
                                      cfg.momentum);
                }
            }
            epoch_loss += loss * static_cast<double>(rows.size());
            seen += static_cast<long>(rows.size());
        }
        epoch_loss /= static_cast<double>(seen);

        double val_loss = evaluate_loss(cur, val_set, spec);
        if (!std::isfinite(val_loss))
            throw NumericalFailure("train: non-finite validation loss at epoch " +
                                   std::to_string(epoch));
        result.history.push_back({epoch_loss, val_loss});

        if (val_loss < best_val) {
            best_val = val_loss;
            result.best = cur;
            result.best_epoch = epoch;
            wait = 0;
        } else {
            ++wait;
            if (cfg.patience >= 0 && wait > cfg.patience) break;
        }
    }
    return result;
}

} // namespace rotkit::learn
