#include <doctest.h>

#include <cmath>

#include "sse/errors.hpp"
#include "sse/estimator.hpp"
#include "sse/kalman.hpp"
#include "sse/simulation.hpp"
#include "support/oracles.hpp"
#include "support/plants.hpp"

using namespace sse;

namespace {

LinearSystem scalar_three() { return LinearSystem(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(3, 1), 1, 1); }

LinearSystem five_sensor_plane(double sw = 0.5, double sv = 0.5) {
    Eigen::MatrixXd A(2, 2);
    A << 0.95, 0, 0, 0.95;  // scalar dynamics: single sensors cannot see the whole state
    Eigen::MatrixXd C(5, 2);
    C << 1, 0, 0, 1, 1, 1, 1, -1, 1, 2;
    return LinearSystem(A, C, sw, sv);
}

}  // namespace

TEST_CASE("window config validation") {
    CHECK_NOTHROW(WindowConfig{}.validate());
    CHECK_THROWS_AS(WindowConfig::after_burn_in(10, 0).validate(), PreconditionError);
    CHECK_THROWS_AS((WindowConfig{5, 10, std::nullopt, 10}).validate(), PreconditionError);
    CHECK_THROWS_AS(WindowConfig::after_burn_in(10, 10, -1.0).validate(), PreconditionError);
    CHECK(required_horizon(WindowConfig::after_burn_in(100, 1000), 3) == 1102);
}

TEST_CASE("group partition") {
    const auto g = partition_groups(10, 3);
    REQUIRE(g.size() == 3);
    CHECK(g[0] == std::vector<int>{0, 3, 6});
    CHECK(g[1] == std::vector<int>{1, 4, 7});
    CHECK(g[2] == std::vector<int>{2, 5, 8});
    CHECK(partition_groups(4, 1).front().size() == 4);
    CHECK_THROWS_AS(partition_groups(2, 3), PreconditionError);
    CHECK_THROWS_AS(partition_groups(5, 0), PreconditionError);
}

TEST_CASE("block residues vanish for exact noiseless estimates") {
    Eigen::MatrixXd A(2, 2);
    A << 1, 1, 0, 1;
    Eigen::MatrixXd C(2, 2);
    C << 1, 0, 0, 1;
    const LinearSystem sys(A, C, 0, 0);
    const auto data = build_subset_data(sys, {0});
    REQUIRE(data.mu == 2);
    const auto tr = simulate(sys, 20, Eigen::Vector2d(1, 0.5), AttackPlan::none(), 1);
    const Eigen::MatrixXd y0 = tr.attacked_outputs.topRows(1);
    const auto r = compute_block_residues(data, y0, tr.states.middleCols(5, 10), 5);
    CHECK(r.rows() == 2);
    CHECK(r.cols() == 10);
    CHECK(r.cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(compute_block_residues(data, y0, tr.states.middleCols(5, 15), 5), PreconditionError);
    CHECK_THROWS_AS(compute_block_residues(data, tr.attacked_outputs, tr.states.middleCols(5, 10), 5), DimensionError);

    const auto groups = block_residue_test_prediction(data, r, 0.0, 0.0);
    REQUIRE(groups.size() == 2);
    for (const auto& g : groups) {
        CHECK(g.size == 5);
        CHECK(g.statistic < 1e-20);
        CHECK(g.threshold == doctest::Approx(data.noise_trace));
        CHECK(g.pass);
    }
}

TEST_CASE("threshold composition") {
    const LinearSystem sys(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1), 1, 2);
    const auto data = build_subset_data(sys, {0});
    CHECK(data.noise_trace == doctest::Approx(4.0));
    const Eigen::MatrixXd r = Eigen::MatrixXd::Constant(1, 4, 3.0);
    const auto p = block_residue_test_prediction(data, r, 1.5, 0.25);
    CHECK(p[0].statistic == doctest::Approx(9.0));
    CHECK(p[0].threshold == doctest::Approx(1.5 + 4.0 + 0.25));
    CHECK_FALSE(p[0].pass);
    const auto f = block_residue_test_filtering(data, r, 1.5, -2.0, 0.25);
    CHECK(f[0].threshold == doctest::Approx(1.5 + 4.0 + 4.0 + 0.25));
    CHECK(f[0].pass);
}

TEST_CASE("filtering cross term matches a Monte Carlo estimate") {
    std::mt19937_64 rng(21);
    const auto sys = oracle::random_system(rng, 3, 3, 0.8, 1.3);
    const SensorSet subset{0, 2};
    const auto data = build_subset_data(sys, subset);
    const auto filter = solve_steady_state(sys, {0, 1, 2});
    const Eigen::MatrixXd L = restrict_gain_columns(filter, subset);
    const double closed = filtering_cross_term(data, L, sys.sigma_v());

    std::normal_distribution<double> g(0.0, sys.sigma_v());
    const Eigen::Index len = data.O.rows();
    std::vector<double> samples;
    Eigen::VectorXd v(len);
    for (int i = 0; i < 200'000; ++i) {
        for (Eigen::Index j = 0; j < len; ++j) v(j) = g(rng);
        samples.push_back(v.head(2).dot(L.transpose() * (data.O_pinv * v)));
    }
    const auto est = oracle::iid_mean(samples);
    CHECK(std::abs(est.mean - closed) < 4 * est.stderr_);
    CHECK_THROWS_AS(filtering_cross_term(data, Eigen::MatrixXd::Zero(3, 3), 1.0), DimensionError);
}

TEST_CASE("scalar algorithm isolates a zeroed sensor") {
    const auto sys = scalar_three();
    const auto window = WindowConfig::after_burn_in(200, 4000);
    const auto tr = simulate(sys, 4200, Eigen::VectorXd::Zero(1), AttackPlan({1}, strategy::ZeroOut{}), 3);
    const auto rep = algorithm1_scalar_predict(sys, tr, window, 1);
    CHECK(rep.sets.size() == 3);
    CHECK(rep.bound == doctest::Approx((1 + std::sqrt(3.0)) / 2).epsilon(1e-9));
    CHECK(rep.epsilon == doctest::Approx(0.1 * rep.bound));
    REQUIRE(rep.selected_set.has_value());
    CHECK(*rep.selected_set == SensorSet{0, 2});
    CHECK(rep.find({0, 1})->pass == false);
    CHECK(rep.find({1, 2})->pass == false);
    CHECK(rep.find({0, 2})->sensor_checks.size() == 2);
    CHECK(rep.estimates.cols() == 4000);
    CHECK(windowed_mse(tr.states, rep.estimates, 200) <= rep.bound + rep.epsilon);
}

TEST_CASE("huge bias is rejected by every set containing the sensor") {
    const auto sys = plants::coupled_five();
    const auto window = WindowConfig::after_burn_in(200, 5000);
    const int horizon = required_horizon(window, max_subset_mu(sys, sparse_observability_index(sys).theta));
    Eigen::VectorXd b = Eigen::VectorXd::Constant(1, 1e6);
    const auto tr = simulate(sys, horizon, Eigen::VectorXd::Zero(2), AttackPlan({3}, strategy::Bias{b}), 4);
    for (const auto& rep : {algorithm2_vector_predict(sys, tr, window, 1), algorithm3_vector_filter(sys, tr, window, 1)}) {
        for (const auto& c : rep.sets) {
            const bool has3 = std::find(c.sensors.begin(), c.sensors.end(), 3) != c.sensors.end();
            if (has3) CHECK_FALSE(c.pass);
        }
        REQUIRE(rep.selected_set.has_value());
        CHECK(*rep.selected_set == SensorSet{0, 1, 2, 4});
    }
}

TEST_CASE("no passing set yields no selection") {
    const auto sys = scalar_three();
    const auto window = WindowConfig::after_burn_in(100, 1000);
    auto tr = simulate(sys, 1100, Eigen::VectorXd::Zero(1), AttackPlan::none(), 5);
    tr.attacked_outputs.row(0).array() += 50.0;
    tr.attacked_outputs.row(1).array() -= 50.0;
    tr.attacked_outputs.row(2).array() += 100.0;
    const auto rep = algorithm1_scalar_predict(sys, tr.attacked_outputs, window, 1);
    CHECK_FALSE(rep.selected_set.has_value());
    CHECK(rep.estimates.size() == 0);
}

TEST_CASE("preconditions") {
    const auto window = WindowConfig::after_burn_in(10, 100);
    const auto sys = five_sensor_plane();
    const Eigen::MatrixXd y = Eigen::MatrixXd::Zero(5, 200);
    CHECK_THROWS_AS(algorithm2_vector_predict(sys, y, window, 2), PreconditionError);
    CHECK_THROWS_AS(algorithm1_scalar_predict(sys, y, window, 1), PreconditionError);
    CHECK_THROWS_AS(algorithm2_vector_predict(sys, Eigen::MatrixXd::Zero(4, 200), window, 1), DimensionError);
    CHECK_THROWS_AS(algorithm3_vector_filter(sys, Eigen::MatrixXd::Zero(5, 50), window, 1), PreconditionError);
    const auto one = scalar_three();
    CHECK_THROWS_AS(algorithm1_scalar_predict(one, Eigen::MatrixXd::Zero(3, 200), window, 2), PreconditionError);
}

TEST_CASE("vector prediction reduces to the scalar test for unit output maps") {
    Eigen::MatrixXd C(3, 1);
    C << 1, -1, 1;
    const LinearSystem sys(Eigen::MatrixXd::Constant(1, 1, 0.95), C, 1, 1);
    const auto window = WindowConfig::after_burn_in(200, 3000);
    const auto tr = simulate(sys, 3200, Eigen::VectorXd::Zero(1), AttackPlan({2}, strategy::ZeroOut{}), 6);
    const auto a = algorithm1_scalar_predict(sys, tr, window, 1);
    const auto b = algorithm2_vector_predict(sys, tr, window, 1);
    REQUIRE(a.selected_set.has_value());
    REQUIRE(b.selected_set.has_value());
    CHECK(*a.selected_set == *b.selected_set);
    CHECK((a.estimates - b.estimates).cwiseAbs().maxCoeff() < 1e-10);
    for (std::size_t i = 0; i < a.sets.size(); ++i) CHECK(a.sets[i].pass == b.sets[i].pass);
}
