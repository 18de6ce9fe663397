// snrlab - command-line front end
//
//   snrlab analytic  [--config run.json] [--power 1e6] [--detected|--incident]
//   snrlab simulate  [--config run.json] [--seed N] [--threads N]
//   snrlab fit       spectrum.csv [--shape peak|dip]
//   snrlab sweep     [--config run.json] [--reps N]
//   snrlab reproduce fig2|fig3|fig4|fig5 [--reps N]
//
// Output files go to --out, else $SNRLAB_OUT_DIR, else ./snrlab-out.

#include "snrlab/config.hpp"
#include "snrlab/error.hpp"
#include "snrlab/fitting.hpp"
#include "snrlab/io.hpp"
#include "snrlab/model.hpp"
#include "snrlab/scenarios.hpp"
#include "snrlab/snr.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace snrlab;

namespace {

constexpr int kExitError = 1;
constexpr int kExitPartial = 2;

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<unsigned> threads;
    std::optional<double> power;
    std::optional<std::string> channel;
    bool detected = false;
    bool incident = false;
    std::string out;
    int verbosity = 0;

    std::string spectrum_path;
    std::string shape;
    std::string figure;
};

fs::path output_dir(const Options& o) {
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv("SNRLAB_OUT_DIR"); env && *env) return env;
    return "snrlab-out";
}

RunConfig make_config(const Options& o) {
    RunConfig rc = o.config_path.empty() ? parse_run_config(json::object())
                                         : load_run_config(o.config_path);
    if (o.power) rc.power = *o.power;
    if (o.detected) rc.power_is_detected = true;
    if (o.incident) rc.power_is_detected = false;
    if (o.seed) rc.scan.seed = *o.seed;
    if (o.reps) rc.reps = *o.reps;
    if (o.threads) rc.threads = *o.threads;
    if (o.channel) rc.scan.channel = channel_from_string(*o.channel);
    rc.output_dir = output_dir(o);
    rc.verbosity = o.verbosity;
    rc.validate();
    return rc;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_json(const fs::path& path, const json& doc) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    os << doc.dump(2) << '\n';
}

void write_failures(const fs::path& path, const std::vector<scenarios::PointFailure>& failures) {
    json arr = json::array();
    for (const auto& f : failures)
        arr.push_back({{"detected_power_cps", f.detected_power},
                       {"channel", std::string(to_string(f.channel))},
                       {"seed", f.seed},
                       {"error", f.message}});
    write_json(path, arr);
}

int cmd_analytic(const Options& o) {
    const RunConfig rc = make_config(o);
    const auto& [em, opt, det] = rc.setup;
    const double p_las = rc.drive().p_las;
    const double s = model::saturation_from_power(p_las, em, opt);

    json report;
    report["preset"] = rc.preset_name;
    report["incident_power_cps"] = p_las;
    report["detected_power_cps"] = opt.mu * p_las;
    report["saturation"] = s;
    report["t_int_s"] = rc.t_int;
    const auto point = snr::evaluate(s, em, opt, det, rc.t_int);
    report["snr_red"] = number_or_null(point.snr_red);
    report["snr_res"] = point.snr_res;
    report["snr_res_shot_limited"] = snr::snr_res_shot_limited(s, em, opt, rc.t_int);
    report["visibility"] = model::visibility(s, em, opt);
    report["fwhm_hz"] = ordinary(model::fwhm(s, em));

    const auto best = snr::snr_res_argmax(em, opt, det);
    report["argmax"] = {{"saturation", best.s},
                        {"detected_power_cps", opt.mu * model::power_from_saturation(best.s, em, opt)},
                        {"snr_res", best.snr}};
    if (det.p_drk > 0.0) {
        const auto sx = snr::crossover_saturation(em, opt, det);
        report["crossover_saturation"] = sx ? json(*sx) : json(nullptr);
    } else {
        report["crossover_saturation"] = nullptr;
    }
    const auto d = scenarios::detectability(em, opt, det, rc.snr_target, rc.t_int);
    report["detectability"] = {{"snr_target", rc.snr_target}, {"detectable", d.detectable},
                               {"best_snr_at_t", d.snr_at_t}};

    fs::create_directories(rc.output_dir);
    write_json(rc.output_dir / "analytic.json", report);
    std::cout << report.dump(2) << '\n';
    return 0;
}

int cmd_simulate(const Options& o) {
    const RunConfig rc = make_config(o);
    const ScanConfig cfg = rc.resolved_scan();
    const Spectrum sp = simulate_scan(cfg, rc.drive(), rc.setup, rc.threads);
    const FitResult fit = fit_lorentzian(sp, shape_for(sp));

    json result = io::fit_to_json(fit);
    int status = 0;
    try {
        const auto est = extract_snr(sp, fit);
        result["snr"] = est.unbounded ? json("unbounded") : json(est.value);
        result["off_resonant_pixels"] = est.off_pixels;
        result["noise_rms"] = est.noise_rms;
    } catch (const Error& e) {
        result["snr"] = nullptr;
        result["snr_error"] = e.what();
        std::cerr << "snrlab: " << e.what() << '\n';
        status = kExitPartial;
    }
    result["clamped_draws"] = sp.clamped;

    fs::create_directories(rc.output_dir);
    const auto name = scenarios::spectrum_file_name(rc.preset_name, cfg.channel, rc.detected_power());
    const auto stem = fs::path(name).stem().string();
    io::write_spectrum_csv(rc.output_dir / name, sp);
    write_json(rc.output_dir / (stem + ".json"), io::spectrum_to_json(sp));
    write_json(rc.output_dir / (stem + "_fit.json"), result);
    std::cout << result.dump(2) << '\n';
    if (!fit.converged) {
        std::cerr << "snrlab: Lorentzian fit did not converge\n";
        status = kExitPartial;
    }
    return status;
}

int cmd_fit(const Options& o) {
    const Spectrum sp = io::read_spectrum_csv(o.spectrum_path);
    LineShape shape = shape_for(sp);
    if (o.shape == "peak") shape = LineShape::peak;
    else if (o.shape == "dip") shape = LineShape::dip;
    const FitResult fit = fit_lorentzian(sp, shape);

    json result = io::fit_to_json(fit);
    int status = fit.converged ? 0 : kExitPartial;
    if (fit.converged) {
        try {
            const auto est = extract_snr(sp, fit);
            result["snr"] = est.unbounded ? json("unbounded") : json(est.value);
        } catch (const Error& e) {
            result["snr"] = nullptr;
            result["snr_error"] = e.what();
            status = kExitPartial;
        }
        if (sp.setup) {
            try {
                result["saturation"] = saturation_from_spectrum(fit, sp.setup->emitter);
            } catch (const ValidationError& e) {
                result["saturation"] = nullptr;
                result["saturation_error"] = e.what();
            }
        }
    }
    const fs::path out = output_dir(o);
    fs::create_directories(out);
    write_json(out / (fs::path(o.spectrum_path).stem().string() + "_fit.json"), result);
    std::cout << result.dump(2) << '\n';
    return status;
}

int cmd_sweep(const Options& o) {
    const RunConfig rc = make_config(o);
    scenarios::SweepSpec spec;
    spec.preset_name = rc.preset_name;
    spec.setup = rc.setup;
    spec.detected_powers = rc.sweep_powers.empty() ? scenarios::log_space(1e3, 1e7, 9) : rc.sweep_powers;
    spec.channels = rc.sweep_channels;
    spec.scan = rc.scan;
    spec.half_widths = rc.half_widths;
    spec.repetitions = rc.reps;
    spec.seed = rc.scan.seed;
    spec.threads = rc.threads;

    const auto result = scenarios::run_sweep(spec);
    fs::create_directories(rc.output_dir);
    const auto table = scenarios::sweep_table(spec, result);
    scenarios::write_table_csv(rc.output_dir / (rc.preset_name + "_sweep.csv"), table);
    scenarios::write_table_csv(std::cout, table);
    if (!result.failures.empty()) {
        write_failures(rc.output_dir / (rc.preset_name + "_sweep_errors.json"), result.failures);
        std::cerr << "snrlab: " << result.failures.size() << " simulated points failed\n";
        return kExitPartial;
    }
    return 0;
}

int cmd_reproduce(const Options& o) {
    const auto figure = scenarios::figure_from_string(o.figure);
    scenarios::FigureOptions fo;
    fs::path out = output_dir(o);
    if (!o.config_path.empty()) {
        const RunConfig rc = make_config(o);
        fo.preset_name = rc.preset_name;
        fo.setup_override = rc.setup;
        fo.scan = rc.scan;
        fo.seed = rc.scan.seed;
        fo.repetitions = rc.reps;
        fo.threads = rc.threads;
    } else {
        if (o.seed) fo.seed = *o.seed;
        if (o.reps) fo.repetitions = *o.reps;
        if (o.threads) fo.threads = *o.threads;
    }

    const auto result = scenarios::reproduce(figure, fo);
    fs::create_directories(out);
    const std::string fig(scenarios::to_string(figure));
    scenarios::write_table_csv(out / (fig + "_summary.csv"), result.summary);
    for (const auto& [name, table] : result.extra_tables)
        scenarios::write_table_csv(out / (name + ".csv"), table);
    for (const auto& [name, sp] : result.spectra) io::write_spectrum_csv(out / name, sp);
    scenarios::write_table_csv(std::cout, result.summary);
    if (!result.failures.empty()) {
        write_failures(out / (fig + "_errors.json"), result.failures);
        std::cerr << "snrlab: " << result.failures.size() << " points failed\n";
        return kExitPartial;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-emitter fluorescence / extinction SNR toolkit"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory (default $SNRLAB_OUT_DIR or ./snrlab-out)");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--reps", o.reps, "seeds per simulated sweep point");
        sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
        sub->add_option("--power", o.power, "laser power [cps]");
        sub->add_option("--channel", o.channel, "fluorescence | extinction");
        auto* det = sub->add_flag("--detected", o.detected, "powers are detected powers mu*P_las (default)");
        auto* inc = sub->add_flag("--incident", o.incident, "powers are incident powers P_las");
        det->excludes(inc);
        sub->add_flag("-v,--verbose", o.verbosity, "more diagnostics");
    };

    auto* analytic = app.add_subcommand("analytic", "analytic SNR report");
    auto* simulate = app.add_subcommand("simulate", "simulate, fit and score one scan");
    auto* fit = app.add_subcommand("fit", "fit a spectrum CSV");
    auto* sweep = app.add_subcommand("sweep", "power sweep (analytic, optionally simulated)");
    auto* reproduce = app.add_subcommand("reproduce", "regenerate a figure's data");
    for (auto* sub : {analytic, simulate, sweep, reproduce}) add_common(sub);
    fit->add_option("spectrum", o.spectrum_path, "spectrum CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--shape", o.shape, "peak | dip (default from channel metadata)")
        ->check(CLI::IsMember({"peak", "dip"}));
    fit->add_option("--out", o.out, "output directory");
    reproduce->add_option("figure", o.figure, "fig2 | fig3 | fig4 | fig5")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analytic) return cmd_analytic(o);
        if (*simulate) return cmd_simulate(o);
        if (*fit) return cmd_fit(o);
        if (*sweep) return cmd_sweep(o);
        if (*reproduce) return cmd_reproduce(o);
    } catch (const std::exception& e) {
        std::cerr << "snrlab: error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
