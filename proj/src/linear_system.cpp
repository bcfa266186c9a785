#include "sse/linear_system.hpp"

#include <algorithm>
#include <string>

#include "sse/errors.hpp"

namespace sse {

LinearSystem::LinearSystem(Eigen::MatrixXd A, Eigen::MatrixXd C, double sigma_w, double sigma_v)
    : a_(std::move(A)), c_(std::move(C)), sigma_w_(sigma_w), sigma_v_(sigma_v) {
    if (a_.rows() < 1 || a_.rows() != a_.cols())
        throw DimensionError("LinearSystem: A must be square with n >= 1, got " + std::to_string(a_.rows()) + "x" +
                             std::to_string(a_.cols()));
    if (c_.rows() < 1 || c_.cols() != a_.rows())
        throw DimensionError("LinearSystem: C must be p x n with p >= 1 and n = " + std::to_string(a_.rows()) +
                             ", got " + std::to_string(c_.rows()) + "x" + std::to_string(c_.cols()));
    if (!(sigma_w_ >= 0.0) || !(sigma_v_ >= 0.0))
        throw PreconditionError("LinearSystem: noise standard deviations must be nonnegative");
    if (!a_.allFinite() || !c_.allFinite())
        throw PreconditionError("LinearSystem: A and C must be finite");
}

Eigen::MatrixXd LinearSystem::output_rows(const SensorSet& sensors) const {
    validate_sensor_set(sensors, p(), "output_rows");
    return c_(sensors, Eigen::all);
}

LinearSystem LinearSystem::with_noise(double sigma_w, double sigma_v) const {
    return LinearSystem(a_, c_, sigma_w, sigma_v);
}

void validate_sensor_set(const SensorSet& sensors, int p, const char* what) {
    for (int d : sensors)
        if (d < 0 || d >= p)
            throw PreconditionError(std::string(what) + ": sensor index " + std::to_string(d) + " outside [0, " +
                                    std::to_string(p) + ")");
    SensorSet sorted = sensors;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw PreconditionError(std::string(what) + ": duplicate sensor index");
}

}  // namespace sse
