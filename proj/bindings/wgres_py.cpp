// Python bindings for the main operations: transverse spectra, trap states,
// resolvent kernels, resonance poles and golden-rule widths.

#include "wgres/config.hpp"
#include "wgres/errors.hpp"
#include "wgres/resonance.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wgres;

PYBIND11_MODULE(wgres_py, m) {
    m.doc() = "soft-waveguide resonances: transverse modes, Birman-Schwinger trap "
              "states, second-sheet poles and Fermi golden-rule widths";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<GeometryError>(m, "GeometryError");
    py::register_exception<RegimeError>(m, "RegimeError");
    py::register_exception<SolverError>(m, "SolverError");
    py::register_exception<AccuracyError>(m, "AccuracyError");
    py::register_exception<ThresholdError>(m, "ThresholdError");
    py::register_exception<BranchError>(m, "BranchError");
    py::register_exception<MultiplicityError>(m, "MultiplicityError");

    py::enum_<Sheet>(m, "Sheet")
        .value("first", Sheet::first)
        .value("second", Sheet::second);

    py::class_<ProfileSegment>(m, "ProfileSegment")
        .def(py::init<double, double, double>(), py::arg("x0"), py::arg("x1"),
             py::arg("depth"))
        .def_readonly("x0", &ProfileSegment::x0)
        .def_readonly("x1", &ProfileSegment::x1)
        .def_readonly("depth", &ProfileSegment::depth);

    py::class_<TransverseProfile>(m, "TransverseProfile")
        .def_static("constant", &TransverseProfile::constant, py::arg("depth"),
                    py::arg("width"))
        .def_readonly("d", &TransverseProfile::d)
        .def_readonly("segments", &TransverseProfile::segments);

    py::class_<TransverseMode>(m, "TransverseMode")
        .def_readonly("index", &TransverseMode::index)
        .def_readonly("energy", &TransverseMode::energy)
        .def_readonly("kappa", &TransverseMode::kappa)
        .def_readonly("amplitude_left", &TransverseMode::amplitude_left)
        .def("__call__", &eval_mode, py::arg("x2"));

    m.def("solve_modes", &solve_modes, py::arg("profile"), py::arg("tol") = 1e-12);
    m.def("generalized_eigenfunction", &generalized_eigenfunction, py::arg("profile"),
          py::arg("p2"), py::arg("channel"), py::arg("x2"));
    m.def("transverse_green", &transverse_green, py::arg("profile"), py::arg("zeta"),
          py::arg("x2"), py::arg("y2"));

    py::class_<KatoMeasure>(m, "KatoMeasure")
        .def_readonly("total_mass", &KatoMeasure::total_mass)
        .def_readonly("descriptor", &KatoMeasure::descriptor)
        .def_property_readonly("node_count",
                               [](const KatoMeasure& k) { return k.nodes.size(); });

    m.def("disk_measure", &disk_measure, py::arg("cx1"), py::arg("cx2"), py::arg("radius"),
          py::arg("order"));
    m.def("rectangle_measure", &rectangle_measure, py::arg("x1_lo"), py::arg("x1_hi"),
          py::arg("x2_lo"), py::arg("x2_hi"), py::arg("order"));
    m.def("polyline_measure", &polyline_measure, py::arg("points"), py::arg("order"));
    m.def("circle_measure", &circle_measure, py::arg("cx1"), py::arg("cx2"),
          py::arg("radius"), py::arg("order"));
    m.def("distance_to_strip", &distance_to_strip, py::arg("measure"), py::arg("d"));

    py::class_<TrapState>(m, "TrapState")
        .def_readonly("index", &TrapState::index)
        .def_readonly("energy", &TrapState::energy)
        .def_readonly("residual", &TrapState::residual)
        .def_readonly("w", &TrapState::w);

    m.def(
        "trap_eigenvalues",
        [](const KatoMeasure& measure, double beta, double tol) {
            return trap_eigenvalues(measure, beta, tol);
        },
        py::arg("measure"), py::arg("beta"), py::arg("tol") = 1e-10);
    m.def("trap_eigenfunction", &trap_eigenfunction, py::arg("state"), py::arg("measure"),
          py::arg("x1"), py::arg("x2"));

    py::class_<ResonanceSystem>(m, "ResonanceSystem")
        .def_readonly("open_channels", &ResonanceSystem::open_channels)
        .def_readonly("beta", &ResonanceSystem::beta)
        .def_readonly("neighborhood", &ResonanceSystem::neighborhood)
        .def_property_readonly(
            "trap_energy", [](const ResonanceSystem& s) { return s.state.energy; })
        .def_property_readonly("mode_energies", [](const ResonanceSystem& s) {
            std::vector<double> es;
            for (const auto& mode : s.modes) es.push_back(mode.energy);
            return es;
        });

    m.def(
        "make_resonance_system",
        [](const TransverseProfile& profile, const KatoMeasure& measure, double beta, int n,
           double trap_tol) {
            return make_resonance_system(profile, measure, beta, n, trap_tol);
        },
        py::arg("profile"), py::arg("measure"), py::arg("beta"), py::arg("n") = 1,
        py::arg("trap_tol") = 1e-11);
    m.def("with_translated_measure", &with_translated_measure, py::arg("system"),
          py::arg("dx1"), py::arg("dx2"));

    py::class_<ResonancePole>(m, "ResonancePole")
        .def_readonly("trap_index", &ResonancePole::trap_index)
        .def_readonly("channel_segment", &ResonancePole::channel_segment)
        .def_readonly("rho", &ResonancePole::rho)
        .def_readonly("z", &ResonancePole::z)
        .def_readonly("gamma_leading", &ResonancePole::gamma_leading)
        .def_readonly("gamma", &ResonancePole::gamma)
        .def_readonly("newton_residual", &ResonancePole::newton_residual)
        .def_readonly("iterations", &ResonancePole::iterations);

    m.def(
        "find_pole",
        [](const ResonanceSystem& sys, double tol) {
            PoleOptions opts;
            opts.tol = tol;
            return find_pole(sys, opts);
        },
        py::arg("system"), py::arg("tol") = 1e-12);
    m.def("eta_tilde", &eta_tilde, py::arg("system"), py::arg("z"));
    m.def("golden_rule_width", &golden_rule_width, py::arg("system"));
    m.def("golden_rule_cos_form", &golden_rule_cos_form, py::arg("system"));
    m.def("golden_rule_gi_route", &golden_rule_gi_route, py::arg("system"));
    m.def("golden_rule_channels", &golden_rule_channels, py::arg("system"));

    m.def("k0", &k0_complex, py::arg("w"));
    m.def("k1", &k1_complex, py::arg("w"));
    m.def("sqrt_upper", &sqrt_upper, py::arg("z"));
    m.def("tau_mode", &tau_mode, py::arg("z"), py::arg("mode_energy"), py::arg("sheet"));

    m.def("sokhotski_integral", &sokhotski_integral, py::arg("b"), py::arg("delta"),
          py::arg("eps"));
    m.def("sokhotski_closed_form", &sokhotski_closed_form, py::arg("b"), py::arg("delta"));

    m.def(
        "fit_decay",
        [](const std::vector<std::pair<double, double>>& samples) {
            DecayFit f = fit_decay(samples);
            return py::make_tuple(f.slope, f.intercept, f.r_squared);
        },
        py::arg("samples"));
}
