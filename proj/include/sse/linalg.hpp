#pragma once

#include <Eigen/Dense>

namespace sse::linalg {

/// Numerical rank from singular values, threshold max(rows, cols) * eps * sigma_max.
int numerical_rank(const Eigen::MatrixXd& m);

/// (MᵀM)⁻¹Mᵀ. Throws PreconditionError if M is not of full column rank.
Eigen::MatrixXd left_pseudo_inverse(const Eigen::MatrixXd& m);

/// Orthonormal basis (as columns) of the right nullspace of `m`, using the same
/// rank threshold as numerical_rank.
Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& m);

/// max |m_ij|; 0 for an empty matrix.
double max_abs(const Eigen::MatrixXd& m);

/// Bounds on tr(S·B) for symmetric S and symmetric PSD B:
/// lambda_min(S)·tr(B) <= tr(S·B) <= lambda_max(S)·tr(B).
struct TraceProductBounds {
    double lower;
    double value;
    double upper;
};

TraceProductBounds trace_product_bounds(const Eigen::MatrixXd& symmetric, const Eigen::MatrixXd& psd);

}  // namespace sse::linalg
