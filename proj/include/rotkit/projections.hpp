#pragma once

#include <array>
#include <functional>
#include <vector>

#include "rotkit/mat3.hpp"
#include "rotkit/so3.hpp"

namespace rotkit {

struct SixD; // representations.hpp

/// Full 3x3 singular value decomposition M = U diag(sigma) V^T with U, V
/// orthogonal (rotations or reflections) and sigma descending, nonnegative.
struct SVDFactors {
    Mat3 u;
    Mat3 v;
    std::array<double, 3> sigma{0.0, 0.0, 0.0};
};

/// Jacobi eigen-iteration on M^T M with accumulated eigenvectors; at most 30
/// sweeps, converged when the off-diagonal Frobenius mass falls below 1e-14
/// of the scaled matrix. Throws NumericalFailure if the sweep budget is
/// exhausted.
SVDFactors svd3(const Mat3& m);

struct SvdPlusResult {
    RotationMatrix r;
    /// Set when |det(input)| < 1e-6: the projection approaches the set where
    /// the minimizer stops being unique.
    bool near_singular = false;
};

/// Projection onto the rotation group: U diag(1, 1, det(UV^T)) V^T, the
/// Frobenius-closest rotation to m.
RotationMatrix svd_plus(const Mat3& m);
SvdPlusResult svd_plus_checked(const Mat3& m);

struct SvdPlusVjpResult {
    Mat3 grad;
    /// Set when a singular-value gap fell below the damping floor; the
    /// gradient is finite but regularized.
    bool regularized = false;
};

/// Gradient of any scalar loss through the projection: given the cotangent
/// dL/dR at R = svd_plus(m), returns dL/dm. Gap factors 1/(sigma_j^2 -
/// sigma_i^2) are damped with denominator max(|.|, 1e-8).
SvdPlusVjpResult svd_plus_vjp(const Mat3& m, const Mat3& cotangent);

/// Forward Gram-Schmidt map; identical to representations::sixd_to_matrix.
RotationMatrix gso(const SixD& s);

struct SixDGrad {
    Vec3 nu1;
    Vec3 nu2;
};

/// Gradient of a scalar loss through the Gram-Schmidt map.
SixDGrad gso_vjp(const SixD& s, const Mat3& cotangent);

struct WeightedProcrustesResult {
    RotationMatrix r;
    /// Minimizer is not unique (weighted column matrix is rank deficient).
    bool non_unique = false;
};

/// Exact minimizer of |R diag(w) - [m | 0]|_F over rotations, solved through
/// the SVD of the weighted column matrix [w1*m1, w2*m2, 0]. Weights must be
/// nonnegative.
WeightedProcrustesResult weighted_procrustes(const Vec3& m1, const Vec3& m2,
                                             const std::array<double, 3>& weights);

/// Central-difference gradient of a scalar function of n doubles:
/// (f(x + h e_i) - f(x - h e_i)) / (2h) per coordinate.
std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x, double h);

} // namespace rotkit
