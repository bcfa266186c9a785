#include "sse/linalg.hpp"

#include <algorithm>
#include <limits>

#include "sse/errors.hpp"

namespace sse::linalg {

namespace {

double rank_threshold(const Eigen::MatrixXd& m, double sigma_max) {
    const auto dim = static_cast<double>(std::max(m.rows(), m.cols()));
    return dim * std::numeric_limits<double>::epsilon() * sigma_max;
}

}  // namespace

int numerical_rank(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double tol = rank_threshold(m, sv(0));
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++r;
    return r;
}

Eigen::MatrixXd left_pseudo_inverse(const Eigen::MatrixXd& m) {
    if (numerical_rank(m) < m.cols())
        throw PreconditionError("left_pseudo_inverse: matrix is not of full column rank");
    const Eigen::MatrixXd gram = m.transpose() * m;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success)
        throw ConvergenceError("left_pseudo_inverse: Gram matrix factorization failed");
    return ldlt.solve(m.transpose());
}

Eigen::MatrixXd nullspace_basis(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.cols();
    if (m.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const int r = numerical_rank(m);
    return svd.matrixV().rightCols(n - r);
}

double max_abs(const Eigen::MatrixXd& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

TraceProductBounds trace_product_bounds(const Eigen::MatrixXd& symmetric, const Eigen::MatrixXd& psd) {
    if (symmetric.rows() != symmetric.cols() || psd.rows() != psd.cols() || symmetric.rows() != psd.rows())
        throw DimensionError("trace_product_bounds: expected two square matrices of equal size");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric, Eigen::EigenvaluesOnly);
    const double tr_b = psd.trace();
    const auto& ev = eig.eigenvalues();
    return {ev.minCoeff() * tr_b, (symmetric * psd).trace(), ev.maxCoeff() * tr_b};
}

}  // namespace sse::linalg
