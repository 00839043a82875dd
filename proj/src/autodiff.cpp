#include "rotkit/autodiff.hpp"

#include <cassert>
#include <cmath>

#include "rotkit/errors.hpp"
#include "rotkit/kernels.hpp"
#include "rotkit/projections.hpp"
#include "rotkit/representations.hpp"

namespace rotkit::ad {

namespace {

std::vector<double> copy_span(std::span<const double> v) {
    return std::vector<double>(v.begin(), v.end());
}

} // namespace

NodeId Tape::push(Node&& n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::input(std::span<const double> v, int rows, int cols,
                   bool requires_grad) {
    if (static_cast<int>(v.size()) != rows * cols)
        throw DataError("Tape::input: shape mismatch");
    Node n;
    n.val = copy_span(v);
    n.rows = rows;
    n.cols = cols;
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

NodeId Tape::scalar_input(double v, bool requires_grad) {
    Node n;
    n.val = {v};
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

NodeId Tape::linear(NodeId xid, NodeId wid, NodeId bid) {
    const Node& x = nodes_[xid];
    const Node& w = nodes_[wid];
    const Node& b = nodes_[bid];
    int n = x.rows, in = x.cols, out = w.rows;
    if (w.cols != in || b.rows * b.cols != out)
        throw DataError("Tape::linear: shape mismatch");
    Node y;
    y.rows = n;
    y.cols = out;
    y.val.resize(static_cast<std::size_t>(n) * out);
    kernels::matmul_nt(x.val.data(), w.val.data(), b.val.data(), y.val.data(),
                       n, in, out);
    y.requires_grad = x.requires_grad || w.requires_grad || b.requires_grad;
    y.backward = [xid, wid, bid, n, in, out](Tape& t, const Node& self) {
        Node& xn = t.node(xid);
        Node& wn = t.node(wid);
        Node& bn = t.node(bid);
        if (xn.requires_grad)
            kernels::matmul_nn_acc(self.adj.data(), wn.val.data(),
                                   xn.adj.data(), n, out, in);
        if (wn.requires_grad)
            kernels::matmul_tn_acc(self.adj.data(), xn.val.data(),
                                   wn.adj.data(), n, out, in);
        if (bn.requires_grad)
            kernels::colsum_acc(self.adj.data(), bn.adj.data(), n, out);
    };
    return push(std::move(y));
}

NodeId Tape::relu(NodeId xid) {
    const Node& x = nodes_[xid];
    Node y;
    y.rows = x.rows;
    y.cols = x.cols;
    y.val.resize(x.val.size());
    kernels::relu_forward(x.val.data(), y.val.data(), x.val.size());
    y.requires_grad = x.requires_grad;
    y.backward = [xid](Tape& t, const Node& self) {
        Node& xn = t.node(xid);
        if (xn.requires_grad)
            kernels::relu_backward_acc(xn.val.data(), self.adj.data(),
                                       xn.adj.data(), xn.val.size());
    };
    return push(std::move(y));
}

NodeId Tape::row(NodeId xid, int i) {
    const Node& x = nodes_[xid];
    if (i < 0 || i >= x.rows) throw DataError("Tape::row: index out of range");
    int cols = x.cols;
    Node y;
    y.rows = 1;
    y.cols = cols;
    y.val.assign(x.val.begin() + static_cast<std::size_t>(i) * cols,
                 x.val.begin() + static_cast<std::size_t>(i + 1) * cols);
    y.requires_grad = x.requires_grad;
    y.backward = [xid, i, cols](Tape& t, const Node& self) {
        Node& xn = t.node(xid);
        if (!xn.requires_grad) return;
        kernels::axpy(1.0, self.adj.data(),
                      xn.adj.data() + static_cast<std::size_t>(i) * cols, cols);
    };
    return push(std::move(y));
}

NodeId Tape::mse_to_const(NodeId xid, std::span<const double> t) {
    const Node& x = nodes_[xid];
    if (x.val.size() != t.size()) throw DataError("mse_to_const: size mismatch");
    double inv = 1.0 / static_cast<double>(t.size());
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double d = x.val[i] - t[i];
        s += d * d;
    }
    Node y;
    y.val = {s * inv};
    y.requires_grad = x.requires_grad;
    y.backward = [xid, tc = copy_span(t), inv](Tape& tp, const Node& self) {
        Node& xn = tp.node(xid);
        if (!xn.requires_grad) return;
        double g = self.adj[0] * 2.0 * inv;
        for (std::size_t i = 0; i < tc.size(); ++i)
            xn.adj[i] += g * (xn.val[i] - tc[i]);
    };
    return push(std::move(y));
}

NodeId Tape::mae_to_const(NodeId xid, std::span<const double> t) {
    const Node& x = nodes_[xid];
    if (x.val.size() != t.size()) throw DataError("mae_to_const: size mismatch");
    double inv = 1.0 / static_cast<double>(t.size());
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += std::fabs(x.val[i] - t[i]);
    Node y;
    y.val = {s * inv};
    y.requires_grad = x.requires_grad;
    y.backward = [xid, tc = copy_span(t), inv](Tape& tp, const Node& self) {
        Node& xn = tp.node(xid);
        if (!xn.requires_grad) return;
        double g = self.adj[0] * inv;
        for (std::size_t i = 0; i < tc.size(); ++i) {
            double d = xn.val[i] - tc[i];
            if (d > 0.0)
                xn.adj[i] += g;
            else if (d < 0.0)
                xn.adj[i] -= g;
        }
    };
    return push(std::move(y));
}

NodeId Tape::l2_to_const(NodeId xid, std::span<const double> t) {
    const Node& x = nodes_[xid];
    if (x.val.size() != t.size()) throw DataError("l2_to_const: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double d = x.val[i] - t[i];
        s += d * d;
    }
    double norm = std::sqrt(s);
    Node y;
    y.val = {norm};
    y.requires_grad = x.requires_grad;
    y.backward = [xid, tc = copy_span(t), norm](Tape& tp, const Node& self) {
        Node& xn = tp.node(xid);
        if (!xn.requires_grad || norm < 1e-15) return;
        double g = self.adj[0] / norm;
        for (std::size_t i = 0; i < tc.size(); ++i)
            xn.adj[i] += g * (xn.val[i] - tc[i]);
    };
    return push(std::move(y));
}

NodeId Tape::sqnorm_to_const(NodeId xid, std::span<const double> t) {
    const Node& x = nodes_[xid];
    if (x.val.size() != t.size())
        throw DataError("sqnorm_to_const: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double d = x.val[i] - t[i];
        s += d * d;
    }
    Node y;
    y.val = {s};
    y.requires_grad = x.requires_grad;
    y.backward = [xid, tc = copy_span(t)](Tape& tp, const Node& self) {
        Node& xn = tp.node(xid);
        if (!xn.requires_grad) return;
        double g = self.adj[0] * 2.0;
        for (std::size_t i = 0; i < tc.size(); ++i)
            xn.adj[i] += g * (xn.val[i] - tc[i]);
    };
    return push(std::move(y));
}

NodeId Tape::cosine_to_const(NodeId xid, std::span<const double> t) {
    const Node& x = nodes_[xid];
    if (x.val.size() != t.size())
        throw DataError("cosine_to_const: size mismatch");
    double dot = 0.0, nx2 = 0.0, nt2 = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        dot += x.val[i] * t[i];
        nx2 += x.val[i] * x.val[i];
        nt2 += t[i] * t[i];
    }
    double nx = std::sqrt(nx2), nt = std::sqrt(nt2);
    if (nx <= 1e-12 || nt <= 1e-12)
        throw DataError("cosine_to_const: zero-length operand");
    double c = dot / (nx * nt);
    Node y;
    y.val = {1.0 - c};
    y.requires_grad = x.requires_grad;
    y.backward = [xid, tc = copy_span(t), nx, nt, c](Tape& tp, const Node& self) {
        Node& xn = tp.node(xid);
        if (!xn.requires_grad) return;
        double g = self.adj[0];
        // d(1 - c)/dx = c x / |x|^2 - t / (|x||t|)
        for (std::size_t i = 0; i < tc.size(); ++i)
            xn.adj[i] += g * (c * xn.val[i] / (nx * nx) - tc[i] / (nx * nt));
    };
    return push(std::move(y));
}

NodeId Tape::geodesic_to_const(NodeId xid, const RotationMatrix& target,
                               double clamp) {
    const Node& x = nodes_[xid];
    if (x.val.size() != 9) throw DataError("geodesic_to_const: need a 9-vector");
    auto r = target.vec();
    // tr(P R^T) equals the flat dot product of the two column-major vectors.
    double tr = 0.0;
    for (int i = 0; i < 9; ++i) tr += x.val[i] * r[i];
    double u = 0.5 * (tr - 1.0);
    bool clamped = u <= -1.0 + clamp || u >= 1.0 - clamp;
    double uc = std::clamp(u, -1.0 + clamp, 1.0 - clamp);
    Node y;
    y.val = {std::acos(uc)};
    y.requires_grad = x.requires_grad;
    y.backward = [xid, r, uc, clamped](Tape& tp, const Node& self) {
        Node& xn = tp.node(xid);
        if (!xn.requires_grad || clamped) return;
        double g = self.adj[0] * (-0.5) / std::sqrt(1.0 - uc * uc);
        for (int i = 0; i < 9; ++i) xn.adj[i] += g * r[i];
    };
    return push(std::move(y));
}

NodeId Tape::quat_pick_i_to_const(NodeId qid, std::span<const double> t) {
    const Node& q = nodes_[qid];
    if (q.val.size() != 4 || t.size() != 4)
        throw DataError("quat_pick_i_to_const: need 4-vectors");
    double dm2 = 0.0, dp2 = 0.0;
    for (int i = 0; i < 4; ++i) {
        dm2 += (q.val[i] - t[i]) * (q.val[i] - t[i]);
        dp2 += (q.val[i] + t[i]) * (q.val[i] + t[i]);
    }
    bool minus = dm2 <= dp2;
    double norm = std::sqrt(minus ? dm2 : dp2);
    Node y;
    y.val = {norm};
    y.requires_grad = q.requires_grad;
    y.backward = [qid, tc = copy_span(t), minus, norm](Tape& tp,
                                                       const Node& self) {
        Node& qn = tp.node(qid);
        if (!qn.requires_grad || norm < 1e-15) return;
        double g = self.adj[0] / norm;
        for (int i = 0; i < 4; ++i)
            qn.adj[i] += g * (minus ? qn.val[i] - tc[i] : qn.val[i] + tc[i]);
    };
    return push(std::move(y));
}

NodeId Tape::quat_pick_ii_to_const(NodeId qid, std::span<const double> t) {
    const Node& q = nodes_[qid];
    if (q.val.size() != 4 || t.size() != 4)
        throw DataError("quat_pick_ii_to_const: need 4-vectors");
    double dot = 0.0;
    for (int i = 0; i < 4; ++i) dot += q.val[i] * t[i];
    Node y;
    y.val = {1.0 - std::fabs(dot)};
    y.requires_grad = q.requires_grad;
    y.backward = [qid, tc = copy_span(t), dot](Tape& tp, const Node& self) {
        Node& qn = tp.node(qid);
        if (!qn.requires_grad || dot == 0.0) return;
        double g = -self.adj[0] * (dot > 0.0 ? 1.0 : -1.0);
        for (int i = 0; i < 4; ++i) qn.adj[i] += g * tc[i];
    };
    return push(std::move(y));
}

NodeId Tape::normalize(NodeId xid) {
    const Node& x = nodes_[xid];
    double n2 = 0.0;
    for (double v : x.val) n2 += v * v;
    double n = std::sqrt(n2);
    if (n < 1e-12) throw NumericalFailure("Tape::normalize: zero vector");
    Node y;
    y.rows = x.rows;
    y.cols = x.cols;
    y.val.resize(x.val.size());
    for (std::size_t i = 0; i < x.val.size(); ++i) y.val[i] = x.val[i] / n;
    y.requires_grad = x.requires_grad;
    y.backward = [xid, n](Tape& tp, const Node& self) {
        Node& xn = tp.node(xid);
        if (!xn.requires_grad) return;
        double dot = 0.0;
        for (std::size_t i = 0; i < self.val.size(); ++i)
            dot += self.adj[i] * self.val[i];
        for (std::size_t i = 0; i < self.val.size(); ++i)
            xn.adj[i] += (self.adj[i] - dot * self.val[i]) / n;
    };
    return push(std::move(y));
}

namespace {

/// Adjoint contraction <G, dR/dq_k> for the quadratic quaternion formula,
/// with G supplied column-major.
void quat_mat_backward(const std::vector<double>& q, const double* gbar,
                       double* qbar) {
    double w = q[0], x = q[1], y = q[2], z = q[3];
    auto g = [&](int i, int j) { return gbar[3 * j + i]; };
    qbar[0] += 2.0 * (-z * g(0, 1) + y * g(0, 2) + z * g(1, 0) - x * g(1, 2) -
                      y * g(2, 0) + x * g(2, 1));
    qbar[1] += 2.0 * (y * g(0, 1) + z * g(0, 2) + y * g(1, 0) -
                      2.0 * x * g(1, 1) - w * g(1, 2) + z * g(2, 0) +
                      w * g(2, 1) - 2.0 * x * g(2, 2));
    qbar[2] += 2.0 * (-2.0 * y * g(0, 0) + x * g(0, 1) + w * g(0, 2) +
                      x * g(1, 0) + z * g(1, 2) - w * g(2, 0) + z * g(2, 1) -
                      2.0 * y * g(2, 2));
    qbar[3] += 2.0 * (-2.0 * z * g(0, 0) - w * g(0, 1) + x * g(0, 2) +
                      w * g(1, 0) - 2.0 * z * g(1, 1) + y * g(1, 2) +
                      x * g(2, 0) + y * g(2, 1));
}

} // namespace

NodeId Tape::quat_to_mat9(NodeId qid) {
    const Node& q = nodes_[qid];
    if (q.val.size() != 4) throw DataError("quat_to_mat9: need a 4-vector");
    double w = q.val[0], x = q.val[1], y = q.val[2], z = q.val[3];
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
    auto rv = r.vec();
    Node out;
    out.rows = 1;
    out.cols = 9;
    out.val.assign(rv.begin(), rv.end());
    out.requires_grad = q.requires_grad;
    out.backward = [qid](Tape& tp, const Node& self) {
        Node& qn = tp.node(qid);
        if (!qn.requires_grad) return;
        quat_mat_backward(qn.val, self.adj.data(), qn.adj.data());
    };
    return push(std::move(out));
}

NodeId Tape::euler_to_mat9(NodeId eid) {
    const Node& e = nodes_[eid];
    if (e.val.size() != 3) throw DataError("euler_to_mat9: need a 3-vector");
    Mat3 a = rot_x(e.val[0]).matrix();
    Mat3 b = rot_y(e.val[1]).matrix();
    Mat3 c = rot_z(e.val[2]).matrix();
    Mat3 r = c * b * a;
    Mat3 e1 = hat({1.0, 0.0, 0.0});
    Mat3 e2 = hat({0.0, 1.0, 0.0});
    Mat3 e3 = hat({0.0, 0.0, 1.0});
    Mat3 d_alpha = c * b * (e1 * a);
    Mat3 d_beta = c * (e2 * b) * a;
    Mat3 d_gamma = (e3 * c) * b * a;
    auto rv = r.vec();
    Node out;
    out.rows = 1;
    out.cols = 9;
    out.val.assign(rv.begin(), rv.end());
    out.requires_grad = e.requires_grad;
    out.backward = [eid, d_alpha, d_beta, d_gamma](Tape& tp, const Node& self) {
        Node& en = tp.node(eid);
        if (!en.requires_grad) return;
        Mat3 g = Mat3::from_vec(self.adj.data());
        en.adj[0] += frobenius_dot(g, d_alpha);
        en.adj[1] += frobenius_dot(g, d_beta);
        en.adj[2] += frobenius_dot(g, d_gamma);
    };
    return push(std::move(out));
}

NodeId Tape::expmap9(NodeId wid) {
    const Node& w = nodes_[wid];
    if (w.val.size() != 3) throw DataError("expmap9: need a 3-vector");
    Vec3 omega{w.val[0], w.val[1], w.val[2]};
    Mat3 r = exp_so3(omega).matrix();
    double a2 = omega.squared_norm();
    // dR/dw_i = (w_i [w]x + [w x (I - R) e_i]x) / |w|^2 * R, with the
    // small-angle limit [e_i]x.
    std::array<Mat3, 3> partials;
    if (a2 < 1e-14) {
        partials[0] = hat({1.0, 0.0, 0.0});
        partials[1] = hat({0.0, 1.0, 0.0});
        partials[2] = hat({0.0, 0.0, 1.0});
    } else {
        Mat3 wx = hat(omega);
        Mat3 imr = Mat3::identity() - r;
        for (int i = 0; i < 3; ++i) {
            Vec3 ei{0.0, 0.0, 0.0};
            ei[i] = 1.0;
            Mat3 num = omega[i] * wx + hat(omega.cross(imr * ei));
            partials[i] = (num * (1.0 / a2)) * r;
        }
    }
    auto rv = r.vec();
    Node out;
    out.rows = 1;
    out.cols = 9;
    out.val.assign(rv.begin(), rv.end());
    out.requires_grad = w.requires_grad;
    out.backward = [wid, partials](Tape& tp, const Node& self) {
        Node& wn = tp.node(wid);
        if (!wn.requires_grad) return;
        Mat3 g = Mat3::from_vec(self.adj.data());
        for (int i = 0; i < 3; ++i) wn.adj[i] += frobenius_dot(g, partials[i]);
    };
    return push(std::move(out));
}

NodeId Tape::gso9(NodeId sid) {
    const Node& s = nodes_[sid];
    if (s.val.size() != 6) throw DataError("gso9: need a 6-vector");
    SixD sixd{{s.val[0], s.val[1], s.val[2]}, {s.val[3], s.val[4], s.val[5]}};
    auto rv = gso(sixd).vec();
    Node out;
    out.rows = 1;
    out.cols = 9;
    out.val.assign(rv.begin(), rv.end());
    out.requires_grad = s.requires_grad;
    out.backward = [sid, sixd](Tape& tp, const Node& self) {
        Node& sn = tp.node(sid);
        if (!sn.requires_grad) return;
        Mat3 g = Mat3::from_vec(self.adj.data());
        SixDGrad grad = gso_vjp(sixd, g);
        for (int i = 0; i < 3; ++i) {
            sn.adj[i] += grad.nu1[i];
            sn.adj[3 + i] += grad.nu2[i];
        }
    };
    return push(std::move(out));
}

NodeId Tape::svdplus9(NodeId mid) {
    const Node& m = nodes_[mid];
    if (m.val.size() != 9) throw DataError("svdplus9: need a 9-vector");
    Mat3 in = Mat3::from_vec(m.val.data());
    auto rv = svd_plus(in).vec();
    Node out;
    out.rows = 1;
    out.cols = 9;
    out.val.assign(rv.begin(), rv.end());
    out.requires_grad = m.requires_grad;
    out.backward = [mid, in](Tape& tp, const Node& self) {
        Node& mn = tp.node(mid);
        if (!mn.requires_grad) return;
        Mat3 g = Mat3::from_vec(self.adj.data());
        Mat3 grad = svd_plus_vjp(in, g).grad;
        auto gv = grad.vec();
        for (int i = 0; i < 9; ++i) mn.adj[i] += gv[i];
    };
    return push(std::move(out));
}

NodeId Tape::pick_min(NodeId aid, NodeId bid) {
    const Node& a = nodes_[aid];
    const Node& b = nodes_[bid];
    if (a.val.size() != 1 || b.val.size() != 1)
        throw DataError("pick_min: scalar operands required");
    bool first = a.val[0] <= b.val[0];
    Node y;
    y.val = {first ? a.val[0] : b.val[0]};
    y.requires_grad = a.requires_grad || b.requires_grad;
    y.backward = [aid, bid, first](Tape& tp, const Node& self) {
        Node& n = first ? tp.node(aid) : tp.node(bid);
        if (n.requires_grad) n.adj[0] += self.adj[0];
    };
    return push(std::move(y));
}

NodeId Tape::mean(const std::vector<NodeId>& xs) {
    if (xs.empty()) throw DataError("Tape::mean: empty list");
    double s = 0.0;
    bool rg = false;
    for (NodeId id : xs) {
        if (nodes_[id].val.size() != 1)
            throw DataError("Tape::mean: scalar operands required");
        s += nodes_[id].val[0];
        rg = rg || nodes_[id].requires_grad;
    }
    double inv = 1.0 / static_cast<double>(xs.size());
    Node y;
    y.val = {s * inv};
    y.requires_grad = rg;
    y.backward = [ids = xs, inv](Tape& tp, const Node& self) {
        for (NodeId id : ids) {
            Node& n = tp.node(id);
            if (n.requires_grad) n.adj[0] += self.adj[0] * inv;
        }
    };
    return push(std::move(y));
}

void Tape::backward(NodeId root) {
    if (root < 0 || root >= static_cast<NodeId>(nodes_.size()))
        throw DataError("Tape::backward: bad root");
    if (nodes_[root].val.size() != 1)
        throw DataError("Tape::backward: root must be scalar");
    for (NodeId i = 0; i <= root; ++i)
        nodes_[i].adj.assign(nodes_[i].val.size(), 0.0);
    nodes_[root].adj[0] = 1.0;
    for (NodeId i = root; i >= 0; --i) {
        const Node& n = nodes_[i];
        if (n.backward && n.requires_grad) n.backward(*this, n);
    }
}

std::span<const double> Tape::value(NodeId id) const { return nodes_[id].val; }

double Tape::scalar(NodeId id) const {
    if (nodes_[id].val.size() != 1)
        throw DataError("Tape::scalar: node is not scalar");
    return nodes_[id].val[0];
}

std::span<const double> Tape::adjoint(NodeId id) const {
    return nodes_[id].adj;
}

} // namespace rotkit::ad
