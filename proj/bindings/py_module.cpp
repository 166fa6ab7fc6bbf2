#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "beamlab/evolve.hpp"
#include "beamlab/geometry.hpp"
#include "beamlab/oscillator.hpp"
#include "beamlab/quasimode.hpp"
#include "beamlab/slopefit.hpp"
#include "beamlab/wkb.hpp"

namespace py = pybind11;
using namespace beamlab;

namespace {

PotentialMode mode_from(const std::string& s) {
    if (s == "geometric") return PotentialMode::geometric;
    if (s == "toy") return PotentialMode::toy;
    throw std::invalid_argument("mode must be 'geometric' or 'toy'");
}

HorizonLaw law_from(const std::string& s) {
    if (s == "power") return HorizonLaw::power;
    if (s == "power-eps") return HorizonLaw::power_eps;
    if (s == "log") return HorizonLaw::log;
    throw std::invalid_argument("law must be 'power', 'power-eps' or 'log'");
}

std::vector<double> to_vector(const py::array_t<double>& a) {
    auto buf = a.request();
    const double* p = static_cast<const double*>(buf.ptr);
    return std::vector<double>(p, p + buf.size);
}

py::array_t<std::complex<double>> field_array(const QuasimodeField& f) {
    py::array_t<std::complex<double>> out({f.grid.n_theta, f.grid.n_x});
    std::copy(f.values.begin(), f.values.end(),
              static_cast<std::complex<double>*>(out.request().ptr));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "nonlinear Gaussian-beam quasimodes on a surface of revolution";

    py::class_<OscillatorBasis>(m, "OscillatorBasis")
        .def(py::init<double, int, int>(), py::arg("omega"), py::arg("n_max"),
             py::arg("max_power") = 4)
        .def_property_readonly("omega", &OscillatorBasis::omega)
        .def_property_readonly("n_max", &OscillatorBasis::n_max)
        .def_property_readonly("nodes", [](const OscillatorBasis& b) { return b.nodes(); })
        .def_property_readonly("weights", [](const OscillatorBasis& b) { return b.weights(); })
        .def_property_readonly("orthonormality_error", &OscillatorBasis::orthonormality_error)
        .def("eigenvalue", &OscillatorBasis::eigenvalue, py::arg("n"))
        .def("eval_mode",
             [](const OscillatorBasis& b, int n, const py::array_t<double>& z) {
                 return b.eval_mode(n, to_vector(z));
             })
        .def("eval_series",
             [](const OscillatorBasis& b, const std::vector<double>& coeffs,
                const py::array_t<double>& z) { return b.eval_series(coeffs, to_vector(z)); })
        .def("analyze",
             [](const OscillatorBasis& b, const std::vector<double>& values) {
                 return analyze(values, b);
             })
        .def("synthesize",
             [](const OscillatorBasis& b, const std::vector<double>& coeffs) {
                 return synthesize(coeffs, b);
             });

    m.def("fourier_decay_slope", &fourier_decay_slope, py::arg("n"), py::arg("p"),
          py::arg("grid_n") = 8192, py::arg("extent") = 40.0);

    py::class_<MetricProfile>(m, "MetricProfile")
        .def_property_readonly("c2", &MetricProfile::c2)
        .def_property_readonly("omega", &MetricProfile::omega)
        .def_property_readonly("v1_at_0", &MetricProfile::v1_at_0)
        .def_property_readonly("elliptic", &MetricProfile::elliptic)
        .def_property_readonly("name", &MetricProfile::name)
        .def("A", &MetricProfile::A)
        .def("v1", &MetricProfile::v1)
        .def("effective_potential", &MetricProfile::effective_potential, py::arg("k"),
             py::arg("x"));
    m.def("build_profile", &build_profile, py::arg("preset_or_csv"));

    py::class_<WkbSolution>(m, "WkbSolution")
        .def_readonly("energies", &WkbSolution::energies)
        .def_readonly("defects", &WkbSolution::defects)
        .def_readonly("q", &WkbSolution::q)
        .def_readonly("omega", &WkbSolution::omega)
        .def_readonly("p", &WkbSolution::p)
        .def_readonly("sigma", &WkbSolution::sigma)
        .def_property_readonly("phis", [](const WkbSolution& s) { return s.phis; });

    m.def(
        "solve_hierarchy",
        [](double p, int sigma, int n_terms, double omega, int n_max, bool shifted,
           double h_shift) {
            WkbConfig cfg;
            cfg.p = p;
            cfg.sigma = sigma;
            cfg.n_terms = n_terms;
            cfg.omega = omega;
            cfg.n_max = n_max;
            cfg.shifted = shifted;
            cfg.h_shift = h_shift;
            OscillatorBasis basis(omega, n_max,
                                  std::max(4, 2 * static_cast<int>(std::ceil(p / 2.0))));
            return solve_hierarchy(cfg, basis);
        },
        py::arg("p") = 2.0, py::arg("sigma") = 1, py::arg("n_terms") = 1,
        py::arg("omega") = 1.0, py::arg("n_max") = 128, py::arg("shifted") = false,
        py::arg("h_shift") = 0.0);

    m.def(
        "assemble",
        [](const WkbSolution& sol, double h) {
            const AssembledBeam b = assemble(sol, h);
            py::dict d;
            d["coeffs"] = b.coeffs;
            d["energy"] = b.energy;
            d["lambda"] = b.lambda;
            d["validity_warning"] = b.validity_warning;
            return d;
        },
        py::arg("solution"), py::arg("h"));

    py::class_<QuasimodeField>(m, "QuasimodeField")
        .def_readonly("k", &QuasimodeField::k)
        .def_readonly("h", &QuasimodeField::h)
        .def_readonly("lambda_", &QuasimodeField::lambda)
        .def_readonly("p", &QuasimodeField::p)
        .def_readonly("coupling", &QuasimodeField::coupling)
        .def_readonly("amplitude", &QuasimodeField::amplitude)
        .def_property_readonly("n_theta",
                               [](const QuasimodeField& f) { return f.grid.n_theta; })
        .def_property_readonly("n_x", [](const QuasimodeField& f) { return f.grid.n_x; })
        .def_property_readonly("values", &field_array)
        .def_property_readonly("l2_norm", &field_l2_norm);

    m.def(
        "build_quasimode",
        [](const WkbSolution& sol, int k, const MetricProfile& profile, int n_theta, int n_x) {
            std::optional<TorusGrid> grid;
            if (n_theta > 0 && n_x > 0) grid = TorusGrid{n_theta, n_x};
            return build_quasimode(sol, k, profile, grid);
        },
        py::arg("solution"), py::arg("k"), py::arg("profile"), py::arg("n_theta") = 0,
        py::arg("n_x") = 0);

    m.def(
        "residual",
        [](const QuasimodeField& f, const MetricProfile& profile, const std::string& mode) {
            const Diagnostics d = residual(f, profile, mode_from(mode));
            py::dict out;
            out["residual_l2"] = d.residual_l2;
            out["reduced_residual"] = d.reduced_residual;
            return out;
        },
        py::arg("field"), py::arg("profile"), py::arg("mode") = "geometric");

    m.def(
        "localization",
        [](const QuasimodeField& f, double delta) {
            const Diagnostics d = localization(f, delta);
            py::dict out;
            out["tube_mass_out"] = d.tube_mass_out;
            out["hr_norms"] = d.hr_norms;
            return out;
        },
        py::arg("field"), py::arg("delta"));

    m.def("hr_norm", &hr_norm, py::arg("field"), py::arg("r"));

    m.def(
        "horizon_time",
        [](const std::string& law, double h, double p, double c0, double eps) {
            return horizon_time(law_from(law), h, p, c0, eps);
        },
        py::arg("law"), py::arg("h"), py::arg("p"), py::arg("c0") = 0.1, py::arg("eps") = 0.1);

    m.def(
        "run_evolution",
        [](const QuasimodeField& field, const MetricProfile& profile, double t_final,
           double dt, int record_every, double delta, const std::string& mode,
           int hkh_order) {
            EvolveConfig cfg;
            cfg.dt = dt;
            cfg.t_final = t_final;
            cfg.record_every = record_every;
            cfg.delta = delta;
            cfg.mode = mode_from(mode);
            cfg.hkh_order = hkh_order;
            const EvolutionTrace tr = run(field, cfg, profile);
            py::dict out;
            out["times"] = tr.times;
            out["mass"] = tr.mass;
            out["tube_mass_out"] = tr.tube_mass_out;
            out["dist_to_app"] = tr.dist_to_app;
            out["hkh_norm"] = tr.hkh_norm;
            return out;
        },
        py::arg("field"), py::arg("profile"), py::arg("t_final"), py::arg("dt") = 0.0,
        py::arg("record_every") = 1, py::arg("delta") = 0.1, py::arg("mode") = "geometric",
        py::arg("hkh_order") = 2);

    m.def(
        "fit_slope",
        [](const std::vector<std::pair<double, double>>& pairs) {
            const SlopeFit f = fit_slope(pairs);
            return py::make_tuple(f.slope, f.intercept, f.max_abs_residual);
        },
        py::arg("pairs"));
}
