// Python bindings for the snrlab core (module snrlab._core).

#include "snrlab/config.hpp"
#include "snrlab/error.hpp"
#include "snrlab/fitting.hpp"
#include "snrlab/io.hpp"
#include "snrlab/model.hpp"
#include "snrlab/scan.hpp"
#include "snrlab/scenarios.hpp"
#include "snrlab/snr.hpp"

#include <nlohmann/json.hpp>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace snrlab;

namespace {

py::list table_rows(const scenarios::Table& t) {
    py::list rows;
    for (const auto& row : t.rows) {
        py::dict d;
        for (std::size_t i = 0; i < row.size(); ++i)
            d[py::str(t.columns[i])] = std::visit([](const auto& v) { return py::cast(v); }, row[i]);
        rows.append(std::move(d));
    }
    return rows;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Single-emitter SNR in fluorescence and extinction detection";

    static py::exception<Error> error_type(m, "Error", PyExc_ValueError);
    static py::exception<ValidationError> validation_type(m, "ValidationError", error_type.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            validation_type(e.what());
        } catch (const Error& e) {
            error_type(e.what());
        }
    });

    m.def("angular", &angular, py::arg("hz"));
    m.def("ordinary", &ordinary, py::arg("rad_s"));

    py::class_<EmitterParams>(m, "EmitterParams")
        .def(py::init([](double gamma1, double gamma2, double alpha) {
                 return EmitterParams{gamma1, gamma2, alpha};
             }),
             py::arg("gamma1"), py::arg("gamma2"), py::arg("alpha"))
        .def_static("lifetime_limited", &EmitterParams::lifetime_limited, py::arg("gamma1"), py::arg("alpha"))
        .def_readwrite("gamma1", &EmitterParams::gamma1)
        .def_readwrite("gamma2", &EmitterParams::gamma2)
        .def_readwrite("alpha", &EmitterParams::alpha)
        .def("validate", [](const EmitterParams& e) { e.validate(); })
        .def("__repr__", [](const EmitterParams& e) {
            return "EmitterParams(gamma1=" + std::to_string(e.gamma1) + ", gamma2=" + std::to_string(e.gamma2) +
                   ", alpha=" + std::to_string(e.alpha) + ")";
        });

    py::class_<OpticsParams>(m, "OpticsParams")
        .def(py::init([](double k, double zeta, double mu) { return OpticsParams{k, zeta, mu}; }),
             py::arg("k_geom"), py::arg("zeta"), py::arg("mu"))
        .def_readwrite("k_geom", &OpticsParams::k_geom)
        .def_readwrite("zeta", &OpticsParams::zeta)
        .def_readwrite("mu", &OpticsParams::mu)
        .def("validate", [](const OpticsParams& o) { o.validate(); });

    py::class_<DetectorParams>(m, "DetectorParams")
        .def(py::init([](double p_drk, double kappa) { return DetectorParams{p_drk, kappa}; }),
             py::arg("p_drk") = 0.0, py::arg("rin_kappa") = 0.0)
        .def_readwrite("p_drk", &DetectorParams::p_drk)
        .def_readwrite("rin_kappa", &DetectorParams::rin_kappa)
        .def("validate", [](const DetectorParams& d) { d.validate(); });

    py::class_<DriveParams>(m, "DriveParams")
        .def(py::init([](double p_las, double detuning) { return DriveParams{p_las, detuning}; }),
             py::arg("p_las"), py::arg("detuning") = 0.0)
        .def_readwrite("p_las", &DriveParams::p_las)
        .def_readwrite("detuning", &DriveParams::detuning);

    py::class_<Setup>(m, "Setup")
        .def(py::init([](EmitterParams e, OpticsParams o, DetectorParams d) { return Setup{e, o, d}; }),
             py::arg("emitter"), py::arg("optics"), py::arg("detector"))
        .def_readwrite("emitter", &Setup::emitter)
        .def_readwrite("optics", &Setup::optics)
        .def_readwrite("detector", &Setup::detector)
        .def("validate", &Setup::validate);

    // model
    m.def("saturation_from_power",
          py::overload_cast<double, const EmitterParams&, const OpticsParams&>(&model::saturation_from_power),
          py::arg("p_las"), py::arg("emitter"), py::arg("optics"));
    m.def("power_from_saturation", &model::power_from_saturation, py::arg("s"), py::arg("emitter"),
          py::arg("optics"));
    m.def("incident_from_detected", &model::incident_from_detected, py::arg("detected"), py::arg("optics"));
    m.def("excited_population", &model::excited_population, py::arg("s"), py::arg("detuning"),
          py::arg("emitter"));
    m.def("total_emission", &model::total_emission, py::arg("s"), py::arg("detuning"), py::arg("emitter"));
    m.def("extinction_dip", &model::extinction_dip, py::arg("s"), py::arg("detuning"), py::arg("emitter"),
          py::arg("optics"));
    m.def("visibility", &model::visibility, py::arg("s"), py::arg("emitter"), py::arg("optics"));
    m.def("fwhm", &model::fwhm, py::arg("s"), py::arg("emitter"));
    m.def("saturation_from_fwhm", &model::saturation_from_fwhm, py::arg("fwhm"), py::arg("emitter"));

    // snr
    py::class_<snr::SnrPoint>(m, "SnrPoint")
        .def_readonly("s", &snr::SnrPoint::s)
        .def_readonly("p_las_detected", &snr::SnrPoint::p_las_detected)
        .def_readonly("snr_red", &snr::SnrPoint::snr_red)
        .def_readonly("snr_res", &snr::SnrPoint::snr_res)
        .def_readonly("t_int", &snr::SnrPoint::t_int);
    py::class_<snr::Optimum>(m, "Optimum")
        .def_readonly("s", &snr::Optimum::s)
        .def_readonly("snr", &snr::Optimum::snr);

    m.def("snr_red", &snr::snr_red, py::arg("s"), py::arg("emitter"), py::arg("optics"), py::arg("detector"),
          py::arg("t_int") = 1.0);
    m.def("snr_res", &snr::snr_res, py::arg("s"), py::arg("emitter"), py::arg("optics"), py::arg("detector"),
          py::arg("t_int") = 1.0);
    m.def("snr_res_shot_limited", &snr::snr_res_shot_limited, py::arg("s"), py::arg("emitter"),
          py::arg("optics"), py::arg("t_int") = 1.0);
    m.def("snr_res_shot_limited_max", &snr::snr_res_shot_limited_max, py::arg("emitter"), py::arg("optics"),
          py::arg("t_int") = 1.0);
    m.def("noise_res", &snr::noise_res, py::arg("p_las"), py::arg("optics"), py::arg("detector"),
          py::arg("t_int") = 1.0);
    m.def("snr_res_argmax", &snr::snr_res_argmax, py::arg("emitter"), py::arg("optics"), py::arg("detector"));
    m.def(
        "crossover_saturation",
        [](const EmitterParams& em, const OpticsParams& opt, const DetectorParams& det) {
            return snr::crossover_saturation(em, opt, det);
        },
        py::arg("emitter"), py::arg("optics"), py::arg("detector"));
    m.def("evaluate", &snr::evaluate, py::arg("s"), py::arg("emitter"), py::arg("optics"), py::arg("detector"),
          py::arg("t_int") = 1.0);

    // scan simulation
    py::enum_<Channel>(m, "Channel")
        .value("fluorescence", Channel::fluorescence)
        .value("extinction", Channel::extinction);

    py::class_<ScanConfig>(m, "ScanConfig")
        .def(py::init<>())
        .def_readwrite("detuning_start", &ScanConfig::detuning_start)
        .def_readwrite("detuning_stop", &ScanConfig::detuning_stop)
        .def_readwrite("n_pixels", &ScanConfig::n_pixels)
        .def_readwrite("dwell", &ScanConfig::dwell)
        .def_readwrite("n_scans", &ScanConfig::n_scans)
        .def_readwrite("channel", &ScanConfig::channel)
        .def_readwrite("seed", &ScanConfig::seed)
        .def_readwrite("jitter_sigma", &ScanConfig::jitter_sigma)
        .def_readwrite("leak_fraction", &ScanConfig::leak_fraction)
        .def("integration", &ScanConfig::integration)
        .def_static("centered", &ScanConfig::centered, py::arg("s"), py::arg("emitter"), py::arg("channel"),
                    py::arg("half_widths") = 10.0, py::arg("n_pixels") = 200);

    py::class_<Spectrum>(m, "Spectrum")
        .def_readonly("detunings", &Spectrum::detunings)
        .def_readonly("counts", &Spectrum::counts)
        .def_readonly("config", &Spectrum::config)
        .def_readonly("drive", &Spectrum::drive)
        .def_readonly("setup", &Spectrum::setup)
        .def_readonly("clamped", &Spectrum::clamped)
        .def("__len__", &Spectrum::size)
        .def("to_csv", [](const Spectrum& sp) {
            std::ostringstream os;
            io::write_spectrum_csv(os, sp);
            return os.str();
        })
        .def_static("from_csv", [](const std::string& text) {
            std::istringstream is(text);
            return io::read_spectrum_csv(is);
        })
        .def("to_json", [](const Spectrum& sp) { return io::spectrum_to_json(sp).dump(); })
        .def_static("from_json",
                    [](const std::string& text) { return io::spectrum_from_json(nlohmann::json::parse(text)); });

    m.def("simulate_scan", &simulate_scan, py::arg("config"), py::arg("drive"), py::arg("setup"),
          py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
    m.def("expected_rate", &expected_rate, py::arg("channel"), py::arg("detuning"), py::arg("drive"),
          py::arg("emitter"), py::arg("optics"), py::arg("detector"), py::arg("leak_fraction") = 0.0);

    // fitting
    py::enum_<LineShape>(m, "LineShape").value("peak", LineShape::peak).value("dip", LineShape::dip);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("amplitude", &FitResult::amplitude)
        .def_readonly("center", &FitResult::center)
        .def_readonly("fwhm", &FitResult::fwhm)
        .def_readonly("baseline", &FitResult::baseline)
        .def_readonly("residual_rms", &FitResult::residual_rms)
        .def_readonly("converged", &FitResult::converged)
        .def_readonly("iterations", &FitResult::iterations)
        .def("to_json", [](const FitResult& f) { return io::fit_to_json(f).dump(); });

    py::class_<SnrEstimate>(m, "SnrEstimate")
        .def_readonly("value", &SnrEstimate::value)
        .def_readonly("unbounded", &SnrEstimate::unbounded)
        .def_readonly("off_pixels", &SnrEstimate::off_pixels)
        .def_readonly("noise_rms", &SnrEstimate::noise_rms);

    m.def(
        "fit_lorentzian",
        [](const Spectrum& sp, std::optional<LineShape> shape) {
            return fit_lorentzian(sp, shape.value_or(shape_for(sp)));
        },
        py::arg("spectrum"), py::arg("shape") = py::none());
    m.def(
        "fit_lorentzian_xy",
        [](const std::vector<double>& x, const std::vector<double>& y, LineShape shape) {
            return fit_lorentzian(x, y, shape);
        },
        py::arg("x"), py::arg("y"), py::arg("shape"));
    m.def("extract_snr", py::overload_cast<const Spectrum&, const FitResult&>(&extract_snr), py::arg("spectrum"),
          py::arg("fit"));
    m.def("saturation_from_spectrum", &saturation_from_spectrum, py::arg("fit"), py::arg("emitter"));

    // scenarios
    m.def("preset_names", [] {
        std::vector<std::string> names;
        for (const auto& p : scenarios::presets()) names.emplace_back(p.name);
        return names;
    });
    m.def(
        "preset", [](const std::string& name) { return scenarios::preset(name).setup; }, py::arg("name"));

    py::class_<scenarios::Detectability>(m, "Detectability")
        .def_readonly("detectable", &scenarios::Detectability::detectable)
        .def_readonly("best_s", &scenarios::Detectability::best_s)
        .def_readonly("best_power", &scenarios::Detectability::best_power)
        .def_readonly("best_detected_power", &scenarios::Detectability::best_detected_power)
        .def_readonly("best_snr", &scenarios::Detectability::best_snr)
        .def_readonly("snr_at_t", &scenarios::Detectability::snr_at_t);
    m.def("detectability", &scenarios::detectability, py::arg("emitter"), py::arg("optics"), py::arg("detector"),
          py::arg("snr_target"), py::arg("t_int") = 1.0);

    m.def(
        "measure_point",
        [](const Setup& setup, double detected, Channel channel, const ScanConfig& scan, double half_widths,
           std::uint64_t seed) {
            auto r = scenarios::measure_point(setup, detected, channel, scan, half_widths, seed);
            return py::make_tuple(std::move(r.spectrum), r.fit, r.snr);
        },
        py::arg("setup"), py::arg("detected_power"), py::arg("channel"), py::arg("scan") = ScanConfig{},
        py::arg("half_widths") = 10.0, py::arg("seed") = 0);

    m.def(
        "reproduce",
        [](const std::string& figure, std::uint64_t seed, int repetitions, unsigned threads) {
            scenarios::FigureOptions opts;
            opts.seed = seed;
            opts.repetitions = repetitions;
            opts.threads = threads;
            scenarios::FigureOutput out;
            {
                py::gil_scoped_release release;
                out = scenarios::reproduce(scenarios::figure_from_string(figure), opts);
            }
            py::dict tables;
            tables[py::str("summary")] = table_rows(out.summary);
            for (const auto& [name, t] : out.extra_tables) tables[py::str(name)] = table_rows(t);
            py::list failures;
            for (const auto& f : out.failures)
                failures.append(py::dict(py::arg("detected_power") = f.detected_power,
                                         py::arg("channel") = f.channel, py::arg("seed") = f.seed,
                                         py::arg("message") = f.message));
            py::dict spectra;
            for (auto& [name, sp] : out.spectra) spectra[py::str(name)] = py::cast(std::move(sp));
            return py::dict(py::arg("tables") = tables, py::arg("spectra") = spectra,
                            py::arg("failures") = failures);
        },
        py::arg("figure"), py::arg("seed") = 1, py::arg("repetitions") = 0, py::arg("threads") = 1);

    m.def(
        "load_config",
        [](const std::string& text) {
            const RunConfig rc = parse_run_config(nlohmann::json::parse(text));
            return py::dict(py::arg("preset") = rc.preset_name, py::arg("setup") = rc.setup,
                            py::arg("drive") = rc.drive(), py::arg("scan") = rc.resolved_scan(),
                            py::arg("t_int") = rc.t_int, py::arg("snr_target") = rc.snr_target);
        },
        py::arg("json_text"));
}
