#include "snrlab/scenarios.hpp"

#include "snrlab/error.hpp"
#include "snrlab/io.hpp"
#include "snrlab/model.hpp"
#include "snrlab/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

namespace snrlab::scenarios {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const Preset kPresets[] = {
    {"fig3_dbatt",
     "DBATT in n-tetradecane: mu=0.2, K=0.5, alpha=0.2, Gamma1/2pi=17 MHz, lifetime limited",
     {EmitterParams::lifetime_limited(angular(17e6), 0.2), OpticsParams{0.5, kDefaultZeta, 0.2},
      DetectorParams{100.0, 0.0}}},
    {"fig5_ideal", "ideal detection of a weak emitter: alpha=mu=1, K=0.5, P_drk=20 cps",
     {EmitterParams::lifetime_limited(1e3, 1.0), OpticsParams{0.5, 0.0, 1.0},
      DetectorParams{20.0, 0.0}}},
    {"fig5_realistic", "realistic detection of a weak emitter: K=0.5, alpha=0.5, mu=0.2",
     {EmitterParams::lifetime_limited(1e3, 0.5), OpticsParams{0.5, 0.0, 0.2},
      DetectorParams{20.0, 0.0}}},
};

struct ScopedPool {
    // Runs fn(i) for i in [0, n) on up to `threads` workers.
    template <class Fn>
    static void run(std::size_t n, unsigned threads, Fn&& fn) {
        const std::size_t workers = std::clamp<std::size_t>(
            threads == 0 ? std::thread::hardware_concurrency() : threads, 1, std::max<std::size_t>(n, 1));
        if (workers == 1) {
            for (std::size_t i = 0; i < n; ++i) fn(i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) fn(i);
            });
    }
};

} // namespace

std::span<const Preset> presets() noexcept { return kPresets; }

const Preset& preset(std::string_view name) {
    for (const auto& p : kPresets)
        if (p.name == name) return p;
    std::string known;
    for (const auto& p : kPresets) known += (known.empty() ? "" : ", ") + std::string(p.name);
    throw ValidationError("preset", "unknown preset \"" + std::string(name) + "\" (known: " + known + ")");
}

std::vector<double> log_space(double lo, double hi, std::size_t n) {
    if (n < 2 || !(lo > 0.0) || !(hi > lo))
        throw ValidationError("sweep", "log_space needs n >= 2 and 0 < lo < hi");
    std::vector<double> out(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

void SweepSpec::validate() const {
    setup.validate();
    if (detected_powers.empty()) throw ValidationError("sweep.powers", "at least one power is required");
    for (double p : detected_powers)
        if (!(p > 0.0) || !std::isfinite(p)) throw ValidationError("sweep.powers", "powers must be > 0");
    if (channels.empty()) throw ValidationError("sweep.channels", "at least one channel is required");
    if (repetitions < 0) throw ValidationError("sweep.reps", "must be >= 0");
    if (!(half_widths > 0.0)) throw ValidationError("sweep.half_widths", "must be > 0");
    if (!(scan.dwell > 0.0)) throw ValidationError("scan.dwell", "must be > 0");
    if (scan.n_scans < 1) throw ValidationError("scan.n_scans", "must be >= 1");
}

std::uint64_t point_seed(std::uint64_t base, std::size_t point, Channel channel, int rep) noexcept {
    auto s = Stream::at(base, point, (static_cast<std::uint64_t>(rep) << 1) |
                                         (channel == Channel::fluorescence ? 1u : 0u));
    return s();
}

PointMeasurement measure_point(const Setup& setup, double detected_power, Channel channel,
                               const ScanConfig& scan_template, double half_widths,
                               std::uint64_t seed, unsigned threads) {
    const DriveParams drive{model::incident_from_detected(detected_power, setup.optics), 0.0};
    const double s = model::saturation_from_power(drive, setup.emitter, setup.optics);
    ScanConfig cfg = ScanConfig::centered(s, setup.emitter, channel, half_widths, scan_template.n_pixels);
    cfg.dwell = scan_template.dwell;
    cfg.n_scans = scan_template.n_scans;
    cfg.jitter_sigma = scan_template.jitter_sigma;
    cfg.leak_fraction = scan_template.leak_fraction;
    cfg.seed = seed;

    PointMeasurement m;
    m.spectrum = simulate_scan(cfg, drive, setup, threads);
    m.fit = fit_lorentzian(m.spectrum, shape_for(m.spectrum));
    if (!m.fit.converged) throw Error("Lorentzian fit did not converge");
    m.snr = extract_snr(m.spectrum, m.fit);
    return m;
}

SweepResult run_sweep(const SweepSpec& spec) {
    spec.validate();
    std::vector<double> powers = spec.detected_powers;
    std::sort(powers.begin(), powers.end());

    const auto& [em, opt, det] = spec.setup;
    const double t_int = spec.scan.integration();
    SweepResult out;
    out.rows.resize(powers.size());
    for (std::size_t i = 0; i < powers.size(); ++i) {
        const double s = model::saturation_from_power(powers[i] / opt.mu, em, opt);
        out.rows[i].analytic = snr::evaluate(s, em, opt, det, t_int);
        out.rows[i].analytic.p_las_detected = powers[i];
    }
    if (spec.repetitions == 0) return out;

    const std::size_t n_ch = spec.channels.size();
    const auto reps = static_cast<std::size_t>(spec.repetitions);
    const std::size_t n_tasks = powers.size() * n_ch * reps;
    struct Outcome {
        double snr = kNaN;
        std::string error;
        std::uint64_t seed = 0;
    };
    std::vector<Outcome> outcomes(n_tasks);

    ScopedPool::run(n_tasks, spec.threads, [&](std::size_t task) {
        const std::size_t point = task / (n_ch * reps);
        const std::size_t ch = (task / reps) % n_ch;
        const int rep = static_cast<int>(task % reps);
        auto& o = outcomes[task];
        o.seed = point_seed(spec.seed, point, spec.channels[ch], rep);
        try {
            const auto m = measure_point(spec.setup, powers[point], spec.channels[ch], spec.scan,
                                         spec.half_widths, o.seed);
            if (m.snr.unbounded) throw Error("noise-free spectrum, SNR unbounded");
            o.snr = m.snr.value;
        } catch (const std::exception& e) {
            o.error = e.what();
        }
    });

    for (std::size_t point = 0; point < powers.size(); ++point) {
        auto& row = out.rows[point];
        row.simulated.resize(n_ch);
        for (std::size_t ch = 0; ch < n_ch; ++ch) {
            std::vector<double> values;
            for (std::size_t rep = 0; rep < reps; ++rep) {
                const auto& o = outcomes[(point * n_ch + ch) * reps + rep];
                if (o.error.empty()) {
                    values.push_back(o.snr);
                } else {
                    out.failures.push_back({powers[point], spec.channels[ch], o.seed, o.error});
                }
            }
            auto& sim = row.simulated[ch];
            sim.successes = static_cast<int>(values.size());
            sim.failures = static_cast<int>(reps - values.size());
            if (values.empty()) {
                sim.mean = sim.std_error = kNaN;
                continue;
            }
            const double n = static_cast<double>(values.size());
            sim.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
            double ss = 0.0;
            for (double v : values) ss += (v - sim.mean) * (v - sim.mean);
            sim.std_error = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : kNaN;
        }
    }
    return out;
}

Detectability detectability(const EmitterParams& em, const OpticsParams& opt,
                            const DetectorParams& det, double snr_target, double t_int) {
    em.validate();
    opt.validate();
    det.validate();
    if (!(t_int > 0.0)) throw ValidationError("t_int", "must be > 0");
    const auto best = snr::snr_res_argmax(em, opt, det);
    Detectability d;
    d.best_s = best.s;
    d.best_power = model::power_from_saturation(best.s, em, opt);
    d.best_detected_power = opt.mu * d.best_power;
    d.best_snr = best.snr;
    d.snr_at_t = best.snr * std::sqrt(t_int);
    d.detectable = d.snr_at_t >= snr_target;
    return d;
}

// -----------------------------------------------------------------------
// Tables
// -----------------------------------------------------------------------

void write_table_csv(std::ostream& os, const Table& table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        os << (i ? "," : "") << table.columns[i];
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) os << io::format_double(v);
                    else os << v;
                },
                row[i]);
        }
        os << '\n';
    }
}

void write_table_csv(const std::filesystem::path& path, const Table& table) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    write_table_csv(os, table);
}

Table sweep_table(const SweepSpec& spec, const SweepResult& result) {
    Table t;
    t.columns = {"detected_power_cps", "saturation", "t_int_s", "snr_red", "snr_res"};
    const bool simulated = spec.repetitions > 0;
    if (simulated) {
        for (Channel c : spec.channels) {
            const std::string tag = c == Channel::extinction ? "res" : "red";
            for (const char* suffix : {"_sim_mean", "_sim_stderr", "_sim_ok", "_sim_failed"})
                t.columns.push_back("snr_" + tag + suffix);
        }
    }
    for (const auto& row : result.rows) {
        const auto& a = row.analytic;
        std::vector<Cell> cells{a.p_las_detected, a.s, a.t_int, a.snr_red, a.snr_res};
        for (const auto& sim : row.simulated) {
            cells.insert(cells.end(), {sim.mean, sim.std_error, std::int64_t{sim.successes},
                                       std::int64_t{sim.failures}});
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

std::string spectrum_file_name(std::string_view preset_name, Channel channel, double detected_power) {
    char power[64];
    if (detected_power == std::round(detected_power) && detected_power < 1e18)
        std::snprintf(power, sizeof power, "%.0f", detected_power);
    else
        std::snprintf(power, sizeof power, "%.6g", detected_power);
    return std::string(preset_name) + "_" + std::string(to_string(channel)) + "_" + power + ".csv";
}

// -----------------------------------------------------------------------
// Figures
// -----------------------------------------------------------------------

Figure figure_from_string(std::string_view name) {
    if (name == "fig2") return Figure::fig2;
    if (name == "fig3") return Figure::fig3;
    if (name == "fig4") return Figure::fig4;
    if (name == "fig5") return Figure::fig5;
    throw ValidationError("figure", "expected one of fig2, fig3, fig4, fig5; got \"" + std::string(name) + "\"");
}

std::string_view to_string(Figure f) noexcept {
    switch (f) {
    case Figure::fig2: return "fig2";
    case Figure::fig3: return "fig3";
    case Figure::fig4: return "fig4";
    case Figure::fig5: return "fig5";
    }
    return "?";
}

namespace {

struct Resolved {
    std::string name;
    Setup setup;
};

Resolved resolve(const FigureOptions& o, std::string_view fallback) {
    Resolved r;
    r.name = o.preset_name.empty() ? std::string(fallback) : o.preset_name;
    r.setup = o.setup_override ? *o.setup_override : preset(r.name).setup;
    r.setup.validate();
    return r;
}

FigureOutput reproduce_fig2(const FigureOptions& o) {
    const auto [name, setup] = resolve(o, "fig3_dbatt");
    const auto& [em, opt, det] = setup;
    FigureOutput out;
    out.summary.columns = {"detected_power_cps", "channel",     "saturation",   "amplitude",
                           "baseline",           "fwhm_hz",     "visibility",   "snr_extracted",
                           "snr_analytic",       "converged"};
    std::size_t point = 0;
    for (double power : kFig2DetectedPowers) {
        for (Channel ch : {Channel::extinction, Channel::fluorescence}) {
            const double s = model::saturation_from_power(power / opt.mu, em, opt);
            const double analytic = ch == Channel::extinction
                                        ? snr::snr_res(s, em, opt, det, o.scan.integration())
                                        : snr::snr_red(s, em, opt, det, o.scan.integration());
            const auto seed = point_seed(o.seed, point, ch, 0);
            std::vector<Cell> row{power, std::string(to_string(ch)), s};
            try {
                auto m = measure_point(setup, power, ch, o.scan, 10.0, seed, o.threads);
                const double vis = ch == Channel::extinction ? -m.fit.amplitude / m.fit.baseline : kNaN;
                row.insert(row.end(), {m.fit.amplitude, m.fit.baseline, ordinary(m.fit.fwhm), vis,
                                       m.snr.value, analytic, std::int64_t{1}});
                out.spectra.emplace_back(spectrum_file_name(name, ch, power), std::move(m.spectrum));
            } catch (const std::exception& e) {
                out.failures.push_back({power, ch, seed, e.what()});
                row.insert(row.end(), {kNaN, kNaN, kNaN, kNaN, kNaN, analytic, std::int64_t{0}});
            }
            out.summary.rows.push_back(std::move(row));
        }
        ++point;
    }
    return out;
}

FigureOutput reproduce_fig3(const FigureOptions& o) {
    const auto [name, setup] = resolve(o, "fig3_dbatt");
    const auto& [em, opt, det] = setup;
    FigureOutput out;
    out.summary.columns = {"detected_power_cps", "saturation", "snr_res", "snr_res_shot_limited"};
    for (double power : log_space(1e3, 1e9, 601)) {
        const double s = model::saturation_from_power(power / opt.mu, em, opt);
        out.summary.rows.push_back({power, s, snr::snr_res(s, em, opt, det),
                                    snr::snr_res_shot_limited(s, em, opt)});
    }
    const auto best = snr::snr_res_argmax(em, opt, det);
    Table optimum;
    optimum.columns = {"saturation", "detected_power_cps", "snr_res", "snr_res_shot_limited_max"};
    optimum.rows.push_back({best.s, opt.mu * model::power_from_saturation(best.s, em, opt), best.snr,
                            snr::snr_res_shot_limited_max(em, opt)});
    out.extra_tables.emplace_back("fig3_optimum", std::move(optimum));
    return out;
}

FigureOutput reproduce_fig4(const FigureOptions& o) {
    const auto [name, setup] = resolve(o, "fig3_dbatt");
    const auto& [em, opt, det] = setup;
    SweepSpec spec;
    spec.preset_name = name;
    spec.setup = setup;
    for (double s : log_space(6e-6, 1e-2, 25))
        spec.detected_powers.push_back(opt.mu * model::power_from_saturation(s, em, opt));
    spec.scan = o.scan;
    spec.repetitions = o.repetitions;
    spec.seed = o.seed;
    spec.threads = o.threads;
    auto result = run_sweep(spec);

    FigureOutput out;
    out.summary = sweep_table(spec, result);
    out.failures = std::move(result.failures);

    Table cross;
    cross.columns = {"crossover_saturation", "crossover_detected_power_cps"};
    if (const auto sx = snr::crossover_saturation(em, opt, det))
        cross.rows.push_back({*sx, opt.mu * model::power_from_saturation(*sx, em, opt)});
    else
        cross.rows.push_back({kNaN, kNaN});
    out.extra_tables.emplace_back("fig4_crossover", std::move(cross));
    return out;
}

FigureOutput reproduce_fig5(const FigureOptions& o) {
    const auto [name, setup] = resolve(o, "fig5_ideal");
    FigureOutput out;
    out.summary.columns = {"gamma1_rad_s", "detected_power_cps", "saturation", "snr_res"};
    Table peaks;
    peaks.columns = {"gamma1_rad_s", "best_saturation", "best_detected_power_cps", "best_snr_res",
                     "snr_res_shot_limited_max"};
    const double dephasing_ratio = setup.emitter.gamma2 / setup.emitter.gamma1;
    for (double g1 : kFig5Gamma1Grid) {
        EmitterParams em = setup.emitter;
        em.gamma1 = g1;
        em.gamma2 = dephasing_ratio * g1;
        const auto& opt = setup.optics;
        for (double s : log_space(1e-4, 1e4, 161)) {
            out.summary.rows.push_back(
                {g1, opt.mu * model::power_from_saturation(s, em, opt), s, snr::snr_res(s, em, opt, setup.detector)});
        }
        const auto d = detectability(em, opt, setup.detector, 0.0);
        peaks.rows.push_back({g1, d.best_s, d.best_detected_power, d.best_snr,
                              snr::snr_res_shot_limited_max(em, opt)});
    }
    out.extra_tables.emplace_back("fig5_peaks", std::move(peaks));
    return out;
}

} // namespace

FigureOutput reproduce(Figure figure, const FigureOptions& options) {
    switch (figure) {
    case Figure::fig2: return reproduce_fig2(options);
    case Figure::fig3: return reproduce_fig3(options);
    case Figure::fig4: return reproduce_fig4(options);
    case Figure::fig5: return reproduce_fig5(options);
    }
    throw ValidationError("figure", "unknown figure");
}

} // namespace snrlab::scenarios
