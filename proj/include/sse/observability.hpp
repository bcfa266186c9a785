#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sse/linear_system.hpp"

namespace sse {

/// Stack [C; CA; ...; CA^(mu-1)] and the observability index mu, if any.
struct ObservabilityMatrix {
    Eigen::MatrixXd stack;  // rows_per_block * rows_used x n
    std::optional<int> mu;  // empty when the pair is unobservable within max_rows blocks
};

/// Smallest mu <= max_rows with full column rank; when none exists, `stack` holds
/// all max_rows blocks and `mu` is empty. max_rows defaults to n.
ObservabilityMatrix build_observability_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& c_sub,
                                               std::optional<int> max_rows = std::nullopt);

/// The n-block stack [C_s; C_s A; ...; C_s A^(blocks-1)] (no rank search).
Eigen::MatrixXd stacked_observability(const Eigen::MatrixXd& A, const Eigen::MatrixXd& c_sub, int blocks);

/// True iff (A, C_s) is observable.
bool is_observable(const LinearSystem& system, const SensorSet& sensors);

struct ObservabilityAnalysis {
    int p = 0;
    int theta = 0;
    /// Every subset actually examined, ascending size, lexicographic within a size.
    std::map<SensorSet, bool> per_subset_observable;
    int max_correctable = 0;       // floor((p - theta) / 2)
    int max_detectable = 0;        // p - theta
    int min_hamming_distance = 0;  // p - theta + 1
};

/// Sparse observability index: the smallest theta such that every size-theta
/// sensor subset is observable. Sizes are tried in ascending order and a size is
/// abandoned at its first unobservable subset. Throws PreconditionError if (A, C)
/// itself is unobservable.
ObservabilityAnalysis sparse_observability_index(const LinearSystem& system);

/// theta <= p - 2k. Throws PreconditionError unless 0 <= k <= p.
bool check_sparse_condition(const ObservabilityAnalysis& analysis, int k);

struct HammingWitness {
    int distance = 0;
    /// (x, 0): two initial states whose noiseless symbols agree on p - distance sensors.
    std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> witness;
    SensorSet agreeing_sensors;
};

/// Minimum symbol Hamming distance found by searching every rank-deficient
/// (theta-1)-subset for nullspace directions; distance p and no witness when theta = 1.
HammingWitness hamming_witness(const LinearSystem& system);
HammingWitness hamming_witness(const LinearSystem& system, const ObservabilityAnalysis& analysis);

/// Length-n noiseless observation symbol of every sensor for initial state x0:
/// row d is (c_d'x0, c_d'Ax0, ..., c_d'A^(n-1)x0).
Eigen::MatrixXd observation_symbols(const LinearSystem& system, const Eigen::VectorXd& x0);

enum class DecodeStatus { unique, ambiguous, infeasible };

const char* to_string(DecodeStatus status);

struct DecodeResult {
    std::vector<Eigen::VectorXd> estimates;
    DecodeStatus status = DecodeStatus::infeasible;
    /// Size-(p-k) subsets whose n-block stack is rank deficient; they are skipped.
    std::vector<SensorSet> unobservable_subsets;
    bool sparse_condition_holds = false;
};

inline constexpr double kDecodeMergeTolerance = 1e-6;
inline constexpr double kDecodeResidualTolerance = 1e-6;

/// Brute-force secure decoder for the noiseless plant. `symbols` is p x n (row d is
/// y_d(0..n-1)). Every size-(p-k) subset is solved in the least-squares sense and
/// accepted when its residual is below 1e-6 (1 + ||Y_s||); accepted states closer
/// than 1e-6 are merged.
DecodeResult noiseless_secure_decode(const LinearSystem& system, const Eigen::MatrixXd& symbols, int k);

/// Per-subset matrices used by the block residue tests.
struct SubsetObservabilityData {
    SensorSet subset;
    int mu = 0;
    Eigen::MatrixXd O;       // (theta*mu) x n
    Eigen::MatrixXd O_pinv;  // n x (theta*mu)
    Eigen::MatrixXd J;       // (theta*mu) x (n*(mu-1))
    Eigen::MatrixXd M;       // (theta*mu) x (theta*mu), sigma_w^2 J J' + sigma_v^2 I
    double noise_trace = 0;  // tr(O_pinv M O_pinv')
};

/// Throws PreconditionError if the subset is unobservable.
SubsetObservabilityData build_subset_data(const LinearSystem& system, const SensorSet& subset);

}  // namespace sse
