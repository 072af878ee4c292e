#include <pybind11/pybind11.h>
#include <pybind11/eigen.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hysterid/bifidelity.hpp"
#include "hysterid/errors.hpp"
#include "hysterid/excitation.hpp"
#include "hysterid/hysteresis.hpp"
#include "hysterid/neuralop.hpp"
#include "hysterid/run_config.hpp"
#include "hysterid/simulate.hpp"

namespace py = pybind11;
using namespace hysterid;

namespace {

py::dict pair_dict(const TrajectoryPair& p) {
    py::dict d;
    d["t"] = p.t;
    d["xi"] = p.xi;
    d["y_lf"] = p.y_lf;
    d["y_hf"] = p.y_hf;
    d["y_corr"] = p.y_corr;
    d["excitation"] = p.excitation;
    d["seed"] = p.seed;
    return d;
}

py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hysteretic structural models and bi-fidelity DeepONet surrogates";

    // Later registrations are tried first, so the base class goes first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def(
        "bouc_wen_rate",
        [](double A, double beta, double gamma, double n, double z, double v) {
            BoucWenParams bw;
            bw.A = A;
            bw.beta = beta;
            bw.gamma = gamma;
            bw.n_pow = n;
            return bouc_wen_rate(bw, z, v);
        },
        py::arg("A"), py::arg("beta"), py::arg("gamma"), py::arg("n"), py::arg("z"), py::arg("v"));

    m.def(
        "kanai_tajimi_psd",
        [](double omega, double omega_g, double zeta_g, double sigma_w) {
            KanaiTajimiSpec s;
            s.omega_g = omega_g;
            s.zeta_g = zeta_g;
            s.sigma_w = sigma_w;
            return kanai_tajimi_psd(s, omega);
        },
        py::arg("omega"), py::arg("omega_g") = 17.0, py::arg("zeta_g") = 0.3, py::arg("sigma_w") = 2.0);

    m.def(
        "kanai_tajimi_realize",
        [](std::uint64_t seed, double duration, double dt) {
            KanaiTajimiSpec s;
            s.duration = duration;
            s.dt = dt;
            const auto sig = kanai_tajimi_realize(s, seed);
            return py::make_tuple(sig.t, sig.channels.at(0));
        },
        py::arg("seed"), py::arg("duration") = 20.0, py::arg("dt") = 0.005,
        "Ground acceleration (t, a) in m/s^2.");

    m.def(
        "simulate",
        [](const std::string& example, std::uint64_t seed, double zeta_s) {
            return pair_dict(simulate_realization(default_example(example_from_string(example), zeta_s), seed));
        },
        py::arg("example"), py::arg("seed"), py::arg("zeta_s") = 0.5,
        "One paired low/high-fidelity realization with default settings.");

    m.def("rel_rmse", &rel_rmse, py::arg("pred"), py::arg("val"));
    m.def("cost_equalized_size", &cost_equalized_size, py::arg("n_bf"), py::arg("cost_ratio"));
    m.def("sensor_indices", &sensor_indices, py::arg("n_store"), py::arg("m"));

    m.def(
        "load_run_config",
        [](const std::filesystem::path& path) { return json_to_py(load_run_config(path).to_json()); },
        py::arg("path"), "Validated configuration with defaults filled in.");

    py::class_<DeepOnetModel>(m, "DeepOnet")
        .def_static(
            "load", [](const std::filesystem::path& p) { return load_checkpoint(p); }, py::arg("path"))
        .def_property_readonly("n_params", &DeepOnetModel::n_params)
        .def_property_readonly("arch", [](const DeepOnetModel& d) { return json_to_py(d.arch.to_json()); })
        .def(
            "__call__",
            [](const DeepOnetModel& d, const Eigen::VectorXd& branch, const Eigen::VectorXd& trunk) {
                return forward(d, branch, trunk);
            },
            py::arg("branch"), py::arg("trunk"))
        .def("parameters", &DeepOnetModel::flatten);
}
