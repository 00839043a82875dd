#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rotkit/so3.hpp"

namespace rotkit::ad {

using NodeId = int32_t;

/// Reverse-mode differentiation tape. Nodes hold scalar, vector, or
/// row-major matrix values plus an adjoint of the same shape. Parents always
/// precede children (enforced at construction), so the graph is acyclic by
/// construction and the backward pass is a single reverse iteration.
///
/// A tape is single-threaded; independent training runs own separate tapes.
class Tape {
  public:
    struct Node {
        std::vector<double> val;
        std::vector<double> adj;
        int rows = 1;
        int cols = 1;
        bool requires_grad = false;
        std::function<void(Tape&, const Node&)> backward; // empty for leaves
    };

    // --- Leaves -----------------------------------------------------------

    NodeId input(std::span<const double> v, int rows, int cols,
                 bool requires_grad);
    NodeId scalar_input(double v, bool requires_grad = false);

    // --- Dense network ops (batched, kernel-backed) ------------------------

    /// y = x * w^T + bias. x: (n x in), w: (out x in), bias: (out).
    NodeId linear(NodeId x, NodeId w, NodeId bias);
    NodeId relu(NodeId x);
    /// Copy of row i of a matrix node, as a (1 x cols) vector node.
    NodeId row(NodeId x, int i);

    // --- Losses against constant targets -----------------------------------

    /// Mean over all entries of (x - t)^2. t must match x's total size.
    NodeId mse_to_const(NodeId x, std::span<const double> t);
    /// Mean over all entries of |x - t| (derivative 0 on ties).
    NodeId mae_to_const(NodeId x, std::span<const double> t);
    /// Euclidean norm |x - t| (zero gradient at the tip).
    NodeId l2_to_const(NodeId x, std::span<const double> t);
    /// Sum of squares |x - t|^2.
    NodeId sqnorm_to_const(NodeId x, std::span<const double> t);
    /// 1 - cos(angle(x, t)).
    NodeId cosine_to_const(NodeId x, std::span<const double> t);
    /// Geodesic angle between a flattened rotation (9-vector, column-major)
    /// and a constant rotation; the arccos argument is clamped to
    /// [-1 + clamp, 1 - clamp], with zero derivative in the clamped region.
    NodeId geodesic_to_const(NodeId x, const RotationMatrix& target,
                             double clamp);
    /// min(|q - t|, |q + t|) on 4-vectors.
    NodeId quat_pick_i_to_const(NodeId q, std::span<const double> t);
    /// 1 - |q . t| on 4-vectors.
    NodeId quat_pick_ii_to_const(NodeId q, std::span<const double> t);

    // --- Structure maps -----------------------------------------------------

    NodeId normalize(NodeId x);
    /// Unit quaternion (w,x,y,z) -> flattened rotation (column-major 9).
    NodeId quat_to_mat9(NodeId q);
    /// Angles (alpha,beta,gamma) -> flattened rotation.
    NodeId euler_to_mat9(NodeId e);
    /// Exponential coordinates -> flattened rotation.
    NodeId expmap9(NodeId w);
    /// Gram-Schmidt frame completion, 6 -> 9. Degenerate input throws.
    NodeId gso9(NodeId s);
    /// Projection onto the rotation group, 9 -> 9.
    NodeId svdplus9(NodeId m);

    // --- Scalar combinators -------------------------------------------------

    NodeId pick_min(NodeId a, NodeId b);
    NodeId mean(const std::vector<NodeId>& xs);

    // --- Execution ----------------------------------------------------------

    /// Seeds the (scalar) root with adjoint 1 and accumulates adjoints into
    /// every node that requires gradients.
    void backward(NodeId root);

    std::span<const double> value(NodeId id) const;
    double scalar(NodeId id) const;
    std::span<const double> adjoint(NodeId id) const;

    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

    Node& node(NodeId id) { return nodes_[id]; }
    const Node& node(NodeId id) const { return nodes_[id]; }

  private:
    NodeId push(Node&& n);
    std::vector<Node> nodes_;
};

} // namespace rotkit::ad
