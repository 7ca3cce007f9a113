#include "uavnoma/io.hpp"
#include "uavnoma/model.hpp"
#include "uavnoma/runner.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace uavnoma;

namespace {

Eigen::MatrixXd points_matrix(const Trajectory& t) {
    Eigen::MatrixXd m(t.points.size(), 2);
    for (std::size_t i = 0; i < t.points.size(); ++i) m.row(i) = t.points[i].transpose();
    return m;
}

std::vector<std::uint64_t> seed_list(py::object seeds) {
    if (py::isinstance<py::int_>(seeds)) return {seeds.cast<std::uint64_t>()};
    return seeds.cast<std::vector<std::uint64_t>>();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Trajectory and NOMA power optimization for a multicasting UAV.";

    py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def_readwrite("name", &ScenarioConfig::name)
        .def_readwrite("users_per_group", &ScenarioConfig::users_per_group)
        .def_readwrite("num_slots", &ScenarioConfig::num_slots)
        .def_readwrite("horizon", &ScenarioConfig::horizon)
        .def_readwrite("v_max", &ScenarioConfig::v_max)
        .def_readwrite("altitude", &ScenarioConfig::altitude)
        .def_readwrite("p_max", &ScenarioConfig::p_max)
        .def_readwrite("noise_power", &ScenarioConfig::noise_power)
        .def_readwrite("pathloss_ref", &ScenarioConfig::pathloss_ref)
        .def_readwrite("coverage_radius", &ScenarioConfig::coverage_radius)
        .def_readwrite("start_point", &ScenarioConfig::start_point)
        .def_readwrite("end_point", &ScenarioConfig::end_point)
        .def_readwrite("min_rate", &ScenarioConfig::min_rate)
        .def_readwrite("eps_traj", &ScenarioConfig::eps_traj)
        .def_readwrite("eps_power", &ScenarioConfig::eps_power)
        .def_readwrite("rng_seed", &ScenarioConfig::rng_seed)
        .def_property_readonly("num_groups", &ScenarioConfig::num_groups)
        .def_property_readonly("step_max", &ScenarioConfig::step_max)
        .def("set_uniform_min_rate", &ScenarioConfig::set_uniform_min_rate, py::arg("nats"))
        .def("validate", &ScenarioConfig::validate);

    py::class_<Scenario>(m, "Scenario")
        .def_readwrite("config", &Scenario::config)
        .def_readwrite("speed_min", &Scenario::speed_min)
        .def_readwrite("speed_max", &Scenario::speed_max)
        .def_readwrite("lambda_", &Scenario::lambda)
        .def_readwrite("users", &Scenario::users)
        .def_property(
            "mode", [](const Scenario& s) { return to_string(s.mode); },
            [](Scenario& s, const std::string& v) { s.mode = parse_run_mode(v); })
        .def_readwrite("sweep_param", &Scenario::sweep_param)
        .def_readwrite("sweep_values", &Scenario::sweep_values)
        .def("to_json", [](const Scenario& s) { return scenario_json(s); })
        .def("with_parameter", &apply_parameter, py::arg("param"), py::arg("value"));

    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("parse_scenario", &parse_scenario, py::arg("text"));
    m.def("save_scenario", &save_scenario, py::arg("scenario"), py::arg("path"));

    py::class_<RunOutput>(m, "RunOutput")
        .def_property_readonly("trajectory", [](const RunOutput& o) { return points_matrix(o.result.trajectory); })
        .def_property_readonly("powers", [](const RunOutput& o) { return o.result.powers.p; })
        .def_property_readonly("rates", [](const RunOutput& o) { return o.result.rates; })
        .def_property_readonly("objective", [](const RunOutput& o) { return o.result.objective(); })
        .def_property_readonly("objective_history", [](const RunOutput& o) { return o.result.objective_history; })
        .def_property_readonly("converged", [](const RunOutput& o) { return o.result.converged; })
        .def_property_readonly("iterations", [](const RunOutput& o) { return o.result.iterations; })
        .def_property_readonly("qos_relaxed", [](const RunOutput& o) { return o.result.qos_relaxed; })
        .def_property_readonly("qos_scale", [](const RunOutput& o) { return o.result.qos_scale; })
        .def_property_readonly("infeasible_slots", [](const RunOutput& o) { return o.result.infeasible_slots; })
        .def_property_readonly("mode", [](const RunOutput& o) { return o.result.mode; })
        .def_property_readonly("seed", [](const RunOutput& o) { return o.result.seed; })
        .def_property_readonly("users", [](const RunOutput& o) { return o.trace.positions; })
        .def(
            "save",
            [](const RunOutput& o, const Scenario& sc, const std::filesystem::path& dir, bool reachability) {
                save_result(o.result, sc, o.trace, dir, SaveOptions{reachability});
            },
            py::arg("scenario"), py::arg("directory"), py::arg("reachability") = true);

    m.def(
        "run",
        [](const Scenario& sc, std::optional<std::string> mode, std::uint64_t seed, bool reachability) {
            const RunMode rm = mode ? parse_run_mode(*mode) : sc.mode;
            py::gil_scoped_release release;
            return run_scenario(sc, rm, seed, OnlineOptions{reachability});
        },
        py::arg("scenario"), py::arg("mode") = py::none(), py::arg("seed") = 1, py::arg("reachability") = true);

    m.def(
        "sweep",
        [](const Scenario& sc, const std::string& param, const std::vector<double>& values, py::object seeds,
           std::optional<std::string> mode) {
            const RunMode rm = mode ? parse_run_mode(*mode) : sc.mode;
            const auto seed_vec = seed_list(seeds);
            std::vector<SweepRow> rows;
            {
                py::gil_scoped_release release;
                rows = sweep(sc, param, values, seed_vec, rm);
            }
            py::list out;
            for (const auto& r : rows) {
                py::dict d;
                d["value"] = r.value;
                d["seed"] = r.seed;
                d["objective"] = r.objective;
                d["converged"] = r.converged;
                d["qos_relaxed"] = r.qos_relaxed;
                d["iterations"] = r.iterations;
                d["error"] = r.error;
                out.append(d);
            }
            return out;
        },
        py::arg("scenario"), py::arg("param"), py::arg("values"), py::arg("seeds") = 1, py::arg("mode") = py::none());

    m.def(
        "verify", [](const std::filesystem::path& dir) { return verify_result(dir).problems; },
        py::arg("directory"), "Problems found in a saved result directory; empty when it checks out.");

    m.def(
        "evaluate",
        [](const Scenario& sc, const Eigen::MatrixXd& points, const Eigen::MatrixXd& powers, std::uint64_t seed) {
            if (points.cols() != 2) throw std::invalid_argument("points must be (N+1) x 2");
            Trajectory t;
            for (Eigen::Index i = 0; i < points.rows(); ++i) t.points.emplace_back(points(i, 0), points(i, 1));
            const UserTrace trace = scenario_trace(sc, RunMode::OfflineFixed, seed);
            const PowerSchedule p{powers};
            py::dict d;
            d["rates"] = slot_rates(t, p, trace, sc.config);
            const auto rep = check_feasibility(t, p, trace, sc.config);
            d["feasible"] = rep.feasible();
            d["violations"] = rep.describe();
            return d;
        },
        py::arg("scenario"), py::arg("points"), py::arg("powers"), py::arg("seed") = 1,
        "Exact rates and constraint check of a schedule with the users held at their slot-0 positions.");

    m.def("channel_gain", &channel_gain, py::arg("q"), py::arg("r"), py::arg("altitude"), py::arg("mu0"));
    m.def(
        "sic_order", [](const std::vector<double>& h) { return sic_order(h); }, py::arg("h_rep"));
    m.def("bits_to_nats", &bits_to_nats);
    m.def("nats_to_bits", &nats_to_bits);
    m.def("objective_upper_bound", &objective_upper_bound, py::arg("config"));
}
