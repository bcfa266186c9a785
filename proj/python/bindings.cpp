#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sse/errors.hpp"
#include "sse/estimator.hpp"
#include "sse/harness.hpp"
#include "sse/kalman.hpp"
#include "sse/observability.hpp"
#include "sse/simulation.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace sse;

namespace {

AttackPlan make_plan(const SensorSet& attacked, const std::string& strategy, const std::optional<Eigen::VectorXd>& bias,
                     int delay, const std::optional<Eigen::MatrixXd>& table) {
    AttackConfig a;
    a.strategy = strategy;
    if (bias) a.bias = *bias;
    a.delay = delay;
    if (table) a.table = *table;
    a.attacked_set = attacked;
    return AttackPlan(attacked, a.make_strategy());
}

py::dict trace_dict(const SimulationTrace& t) {
    return py::dict("states"_a = t.states, "clean_outputs"_a = t.clean_outputs, "outputs"_a = t.attacked_outputs,
                    "process_noise"_a = t.process_noise, "sensor_noise"_a = t.sensor_noise,
                    "attack_vectors"_a = t.attack_vectors, "attacked_set"_a = t.attacked_set, "seed"_a = t.seed);
}

using Algorithm = ResidueReport (*)(const LinearSystem&, const Eigen::MatrixXd&, const WindowConfig&, int);

void def_algorithm(py::module_& m, const char* name, Algorithm fn) {
    m.def(
        name,
        [fn](const LinearSystem& s, const Eigen::MatrixXd& outputs, int k, int t1, int N, std::optional<double> epsilon) {
            py::gil_scoped_release release;
            return fn(s, outputs, WindowConfig{t1, N, epsilon, t1}, k);
        },
        "system"_a, "outputs"_a, "k"_a, "t1"_a = 200, "N"_a = 10000, "epsilon"_a = py::none());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.attr("__version__") = kSoftwareVersion;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<OverflowError>(m, "OverflowError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    py::class_<LinearSystem>(m, "LinearSystem")
        .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd, double, double>(), "A"_a, "C"_a, "sigma_w"_a, "sigma_v"_a)
        .def_property_readonly("A", &LinearSystem::A)
        .def_property_readonly("C", &LinearSystem::C)
        .def_property_readonly("sigma_w", &LinearSystem::sigma_w)
        .def_property_readonly("sigma_v", &LinearSystem::sigma_v)
        .def_property_readonly("n", &LinearSystem::n)
        .def_property_readonly("p", &LinearSystem::p)
        .def("__repr__", [](const LinearSystem& s) {
            return "LinearSystem(n=" + std::to_string(s.n()) + ", p=" + std::to_string(s.p()) + ")";
        });

    py::class_<SteadyStateFilter>(m, "SteadyStateFilter")
        .def_readonly("sensor_set", &SteadyStateFilter::sensor_set)
        .def_readonly("P_pred", &SteadyStateFilter::P_pred)
        .def_readonly("P_filt", &SteadyStateFilter::P_filt)
        .def_readonly("L_pred", &SteadyStateFilter::L_pred)
        .def_readonly("K_filt", &SteadyStateFilter::K_filt)
        .def_readonly("p_opt", &SteadyStateFilter::p_opt)
        .def_readonly("f_opt", &SteadyStateFilter::f_opt)
        .def_readonly("iterations", &SteadyStateFilter::iterations);

    m.def("solve_steady_state", [](const LinearSystem& s, const SensorSet& set) { return solve_steady_state(s, set); },
          "system"_a, "sensor_set"_a);
    m.def("run_prediction", &run_prediction, "filter"_a, "outputs"_a, "x_hat0"_a);
    m.def("run_filtering", &run_filtering, "filter"_a, "outputs"_a, "x_hat0"_a);

    m.def("sparse_observability_index", [](const LinearSystem& s) {
        const auto a = sparse_observability_index(s);
        return py::dict("p"_a = a.p, "theta"_a = a.theta, "max_correctable"_a = a.max_correctable,
                        "max_detectable"_a = a.max_detectable, "min_hamming_distance"_a = a.min_hamming_distance);
    });
    m.def("observation_symbols", &observation_symbols, "system"_a, "x0"_a);
    m.def(
        "noiseless_secure_decode",
        [](const LinearSystem& s, const Eigen::MatrixXd& symbols, int k) {
            const auto d = noiseless_secure_decode(s, symbols, k);
            return py::dict("status"_a = to_string(d.status), "estimates"_a = d.estimates,
                            "sparse_condition_holds"_a = d.sparse_condition_holds);
        },
        "system"_a, "symbols"_a, "k"_a);

    m.def(
        "simulate",
        [](const LinearSystem& s, int horizon, std::optional<Eigen::VectorXd> x0, const SensorSet& attacked_set,
           const std::string& strategy, std::optional<Eigen::VectorXd> bias, int delay,
           std::optional<Eigen::MatrixXd> table, std::uint64_t seed) {
            const Eigen::VectorXd init = x0.value_or(Eigen::VectorXd::Zero(s.n()));
            const auto plan = attacked_set.empty() && strategy == "none"
                                  ? AttackPlan::none()
                                  : make_plan(attacked_set, strategy, bias, delay, table);
            return trace_dict(simulate(s, horizon, init, plan, seed));
        },
        "system"_a, "horizon"_a, "x0"_a = py::none(), "attacked_set"_a = SensorSet{}, "strategy"_a = "none",
        "bias"_a = py::none(), "delay"_a = 1, "table"_a = py::none(), "seed"_a = 0);

    py::class_<CandidateSetReport>(m, "CandidateSet")
        .def_readonly("sensors", &CandidateSetReport::sensors)
        .def_readonly("observable", &CandidateSetReport::observable)
        .def_readonly("opt_trace", &CandidateSetReport::opt_trace)
        .def_readonly("passed", &CandidateSetReport::pass)
        .def_readonly("max_relative_slack", &CandidateSetReport::max_relative_slack);

    py::class_<ResidueReport>(m, "ResidueReport")
        .def_readonly("t1", &ResidueReport::t1)
        .def_readonly("N", &ResidueReport::N)
        .def_readonly("epsilon", &ResidueReport::epsilon)
        .def_readonly("bound", &ResidueReport::bound)
        .def_readonly("sets", &ResidueReport::sets)
        .def_readonly("selected_set", &ResidueReport::selected_set)
        .def_readonly("estimates", &ResidueReport::estimates);

    def_algorithm(m, "scalar_predict", &algorithm1_scalar_predict);
    def_algorithm(m, "vector_predict", &algorithm2_vector_predict);
    def_algorithm(m, "vector_filter", &algorithm3_vector_filter);

    m.def(
        "run_experiment_json",
        [](const std::string& config, int parallel, bool oracle) {
            const auto c = parse_config(config);
            RunOptions opts;
            opts.parallel = parallel;
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = oracle ? oracle_comparison(c, opts) : run_experiment(c, opts);
            }
            return results_json(r).dump();
        },
        "config"_a, "parallel"_a = 1, "oracle"_a = false);
}
