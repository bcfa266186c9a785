#pragma once

#include <Eigen/Dense>

#include "sse/subsets.hpp"

namespace sse {

/// The plant
///   x(t+1) = A x(t) + w(t),      w ~ N(0, sigma_w^2 I_n)
///   y(t)   = C x(t) + v(t) + phi(t),  v ~ N(0, sigma_v^2 I_p)
/// Row j of C is the output map of sensor j. Immutable once constructed.
class LinearSystem {
public:
    /// Throws DimensionError if A is not square or C does not have n columns,
    /// PreconditionError on negative noise levels.
    LinearSystem(Eigen::MatrixXd A, Eigen::MatrixXd C, double sigma_w, double sigma_v);

    const Eigen::MatrixXd& A() const noexcept { return a_; }
    const Eigen::MatrixXd& C() const noexcept { return c_; }
    double sigma_w() const noexcept { return sigma_w_; }
    double sigma_v() const noexcept { return sigma_v_; }
    int n() const noexcept { return static_cast<int>(a_.rows()); }
    int p() const noexcept { return static_cast<int>(c_.rows()); }

    /// Rows of C for `sensors`, in the given order.
    Eigen::MatrixXd output_rows(const SensorSet& sensors) const;

    /// Same plant with different noise levels.
    LinearSystem with_noise(double sigma_w, double sigma_v) const;

private:
    Eigen::MatrixXd a_;
    Eigen::MatrixXd c_;
    double sigma_w_;
    double sigma_v_;
};

/// Throws PreconditionError unless every index is in [0, p) and indices are distinct.
void validate_sensor_set(const SensorSet& sensors, int p, const char* what);

}  // namespace sse
