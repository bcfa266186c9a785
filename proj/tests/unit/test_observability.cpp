#include <doctest.h>

#include <random>

#include "sse/errors.hpp"
#include "sse/linalg.hpp"
#include "sse/observability.hpp"
#include "support/oracles.hpp"

using namespace sse;

namespace {

Eigen::MatrixXd mat(int r, int c, std::initializer_list<double> v) {
    Eigen::MatrixXd m(r, c);
    auto it = v.begin();
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = *it++;
    return m;
}

LinearSystem scalar_three() { return LinearSystem(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(3, 1), 1, 1); }

// theta = 2, p = 5: every pair of distinct rows spans R^2, no single row does.
LinearSystem planar_five() {
    return LinearSystem(Eigen::MatrixXd::Identity(2, 2), mat(5, 2, {1, 0, 0, 1, 1, 1, 1, -1, 1, 2}), 0, 0);
}

}  // namespace

TEST_CASE("observability matrix and index") {
    auto o = build_observability_matrix(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1));
    CHECK(o.mu == 1);
    CHECK(o.stack == Eigen::MatrixXd::Ones(1, 1));

    o = build_observability_matrix(mat(2, 2, {1, 1, 0, 1}), mat(1, 2, {1, 0}));
    CHECK(o.mu == 2);
    CHECK(o.stack == mat(2, 2, {1, 0, 1, 1}));

    o = build_observability_matrix(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Zero(1, 1));
    CHECK_FALSE(o.mu.has_value());

    CHECK_THROWS_AS(build_observability_matrix(Eigen::MatrixXd::Ones(2, 2), Eigen::MatrixXd::Ones(1, 3)),
                    DimensionError);
    CHECK_THROWS_AS(build_observability_matrix(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1), 0),
                    PreconditionError);
}

TEST_CASE("sparse observability index on hand-checked systems") {
    const auto a = sparse_observability_index(scalar_three());
    CHECK(a.theta == 1);
    CHECK(a.max_correctable == 1);
    CHECK(a.max_detectable == 2);
    CHECK(a.min_hamming_distance == 3);

    const LinearSystem twice(Eigen::MatrixXd::Identity(2, 2), mat(4, 2, {1, 0, 0, 1, 1, 0, 0, 1}), 1, 1);
    const auto b = sparse_observability_index(twice);
    CHECK(b.theta == 3);
    CHECK(b.max_correctable == 0);

    const LinearSystem zero_row(Eigen::MatrixXd::Ones(1, 1), mat(3, 1, {1, 0, 1}), 1, 1);
    CHECK(sparse_observability_index(zero_row).theta >= 2);

    const auto e2 = sparse_observability_index(planar_five());
    CHECK(e2.theta == 2);
    CHECK(e2.max_correctable == 1);
    CHECK(e2.max_detectable == 3);
    CHECK(e2.min_hamming_distance == 4);

    const LinearSystem blind(Eigen::MatrixXd::Identity(2, 2), mat(2, 2, {1, 0, 2, 0}), 1, 1);
    CHECK_THROWS_AS(sparse_observability_index(blind), PreconditionError);
}

TEST_CASE("theta agrees with exhaustive enumeration") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> dn(1, 3), dp(1, 6);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = dn(rng);
        const int p = std::max(n == 1 ? 1 : 2, dp(rng));
        const auto sys = oracle::random_structured_system(rng, n, p);
        const auto a = sparse_observability_index(sys);
        CHECK(a.theta == oracle::brute_force_theta(sys));
        CHECK(a.min_hamming_distance == p - a.theta + 1);
    }
}

TEST_CASE("sparse condition") {
    ObservabilityAnalysis a;
    a.p = 3;
    a.theta = 1;
    CHECK(check_sparse_condition(a, 1));
    CHECK(check_sparse_condition(a, 0));
    a.p = 5;
    a.theta = 2;
    CHECK_FALSE(check_sparse_condition(a, 2));
    CHECK(check_sparse_condition(a, 1));
    CHECK_THROWS_AS(check_sparse_condition(a, 6), PreconditionError);
    CHECK_THROWS_AS(check_sparse_condition(a, -1), PreconditionError);
}

TEST_CASE("hamming witness") {
    const auto w1 = hamming_witness(scalar_three());
    CHECK(w1.distance == 3);
    CHECK_FALSE(w1.witness.has_value());

    const auto w2 = hamming_witness(planar_five());
    CHECK(w2.distance == 4);
    REQUIRE(w2.witness.has_value());
    CHECK(w2.witness->first.norm() == doctest::Approx(1.0));
    CHECK(w2.agreeing_sensors.size() == 1);

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const auto sys = oracle::random_structured_system(rng, 2 + trial % 2, 5);
        const auto a = sparse_observability_index(sys);
        CHECK(hamming_witness(sys, a).distance >= a.p - a.theta + 1);
    }
}

TEST_CASE("noiseless decoding") {
    const auto sys = planar_five();
    const Eigen::Vector2d x(0.3, -1.2);
    auto Y = observation_symbols(sys, x);

    auto clean = noiseless_secure_decode(sys, Y, 0);
    REQUIRE(clean.status == DecodeStatus::unique);
    CHECK((clean.estimates[0] - x).norm() < 1e-9);

    Y.row(3) << 40, -7;
    auto one = noiseless_secure_decode(sys, Y, 1);
    CHECK(one.sparse_condition_holds);
    REQUIRE(one.status == DecodeStatus::unique);
    CHECK((one.estimates[0] - x).norm() < 1e-9);

    // mixed observation: sensors 1, 2 follow x1 and sensors 3, 4 follow x2
    const Eigen::Vector2d x1(1, 0), x2(1, 1);
    const auto Y1 = observation_symbols(sys, x1);
    const auto Y2 = observation_symbols(sys, x2);
    CHECK(Y1.row(0) == Y2.row(0));
    Eigen::MatrixXd mixed(5, 2);
    mixed << Y1.row(0), Y1.row(1), Y1.row(2), Y2.row(3), Y2.row(4);
    const auto amb = noiseless_secure_decode(sys, mixed, 2);
    CHECK_FALSE(amb.sparse_condition_holds);
    CHECK(amb.status == DecodeStatus::ambiguous);
    auto contains = [&](const Eigen::Vector2d& v) {
        return std::any_of(amb.estimates.begin(), amb.estimates.end(),
                           [&](const Eigen::VectorXd& e) { return (e - v).norm() < 1e-9; });
    };
    CHECK(contains(x1));
    CHECK(contains(x2));

    Eigen::MatrixXd junk = Eigen::MatrixXd::Zero(5, 2);
    junk.col(0) << 1, 2, 3, 4, 5;
    junk.col(1) << -3, 7, 1, 1, 1;
    CHECK(noiseless_secure_decode(sys, junk, 1).status == DecodeStatus::infeasible);
    CHECK_THROWS_AS(noiseless_secure_decode(sys, Eigen::MatrixXd::Zero(5, 3), 1), DimensionError);
}

TEST_CASE("subset data") {
    const LinearSystem sys(mat(2, 2, {1, 1, 0, 1}), mat(2, 2, {1, 0, 0, 1}), 1, 1);
    const auto d = build_subset_data(sys, {0});
    CHECK(d.mu == 2);
    CHECK(d.J == mat(2, 2, {0, 0, 1, 0}));
    CHECK(d.M == mat(2, 2, {1, 0, 0, 2}));
    CHECK((d.O_pinv * d.O - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-8);

    const auto both = build_subset_data(sys, {0, 1});
    CHECK(both.mu == 1);
    CHECK(both.J.cols() == 0);
    CHECK(both.M == Eigen::MatrixXd::Identity(2, 2));

    const LinearSystem blind(Eigen::MatrixXd::Identity(2, 2), mat(2, 2, {1, 0, 0, 1}), 1, 1);
    CHECK_THROWS_AS(build_subset_data(blind, {0}), PreconditionError);

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = oracle::random_system(rng, 3, 2, 0.5, 0.7);
        const auto sd = build_subset_data(s, {1});
        CHECK((sd.O_pinv * sd.O - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-8);
        if (sd.mu > 1) CHECK(linalg::numerical_rank(sd.O.topRows(sd.mu - 1)) < 3);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sd.M);
        CHECK(eig.eigenvalues().minCoeff() > -1e-12);
        CHECK((sd.M - sd.M.transpose()).norm() == 0.0);
    }
}

TEST_CASE("linear algebra helpers") {
    CHECK(linalg::numerical_rank(mat(2, 2, {1, 2, 2, 4})) == 1);
    CHECK(linalg::nullspace_basis(mat(1, 2, {1, 1})).cols() == 1);
    CHECK_THROWS_AS(linalg::left_pseudo_inverse(mat(2, 2, {1, 2, 2, 4})), PreconditionError);

    std::mt19937_64 rng(8);
    for (int i = 0; i < 100; ++i) {
        const Eigen::MatrixXd g = oracle::gaussian_matrix(rng, 4, 4);
        const Eigen::MatrixXd S = g + g.transpose();
        const Eigen::MatrixXd h = oracle::gaussian_matrix(rng, 4, 2);
        const Eigen::MatrixXd B = h * h.transpose();
        const auto t = linalg::trace_product_bounds(S, B);
        const double scale = 1e-9 * (std::abs(t.lower) + std::abs(t.upper) + 1);
        CHECK(t.lower <= t.value + scale);
        CHECK(t.value <= t.upper + scale);
    }
}
