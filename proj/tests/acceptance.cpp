// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "snrlab/error.hpp"
#include "snrlab/fitting.hpp"
#include "snrlab/io.hpp"
#include "snrlab/model.hpp"
#include "snrlab/scan.hpp"
#include "snrlab/scenarios.hpp"
#include "snrlab/snr.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace snrlab;

namespace {

struct Outcome {
    bool pass{true};
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
    }
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}
std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}
std::string fmt(const char* f, double a, double b, double c) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

const Setup& fig3() { return scenarios::preset("fig3_dbatt").setup; }

double s_at_detected(const Setup& setup, double detected) {
    return model::saturation_from_power(detected / setup.optics.mu, setup.emitter, setup.optics);
}

// Fitted SNR of one simulated scan; 0 when the line cannot be fitted
// (a failed detection).
double measured_snr(const Setup& setup, double detected, Channel ch, const ScanConfig& scan,
                    std::uint64_t seed) {
    try {
        return scenarios::measure_point(setup, detected, ch, scan, 10.0, seed).snr.value;
    } catch (const Error&) {
        return 0.0;
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ---------------------------------------------------------------------------

Outcome c1_equal_snr_point() {
    Outcome o;
    const auto& [em, opt, det] = fig3();
    const double s = s_at_detected(fig3(), 1e6);
    const double res = snr::snr_res(s, em, opt, det, 1.0);
    const double red = snr::snr_red(s, em, opt, det, 1.0);
    o.require(std::abs(res - 100.0) <= 15.0, fmt("snr_res=%.3f (100+-15)", res));
    o.require(std::abs(red - 100.0) <= 25.0, fmt("snr_red=%.3f (100+-25)", red));
    return o;
}

Outcome c2_visibility() {
    Outcome o;
    const auto& [em, opt, det] = fig3();
    const double vis = model::visibility(0.0, em, opt);
    o.require(std::abs(vis - 0.100) <= 0.005, fmt("analytic=%.5f (0.100+-0.005)", vis));

    ScanConfig scan;  // 100 x 10 ms
    scan.n_pixels = 200;
    const auto m = scenarios::measure_point(fig3(), 3e4, Channel::extinction, scan, 10.0, 2024);
    const double fitted = -m.fit.amplitude / m.fit.baseline;
    o.require(m.fit.converged && std::abs(fitted - 0.10) <= 0.02, fmt("fitted=%.4f (0.10+-0.02)", fitted));
    return o;
}

Outcome c3_low_power_contrast() {
    Outcome o;
    ScanConfig scan;  // 100 x 10 ms = 1 s per pixel
    std::vector<double> ext, flu;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ext.push_back(measured_snr(fig3(), 2e3, Channel::extinction, scan, 100 + seed));
        flu.push_back(measured_snr(fig3(), 2e3, Channel::fluorescence, scan, 200 + seed));
    }
    const double me = median(ext), mf = median(flu);
    o.require(me >= 3.0, fmt("median extinction SNR=%.3f (>=3)", me));
    o.require(mf < 2.0, fmt("median fluorescence SNR=%.3f (<2)", mf));
    return o;
}

Outcome c4_extinction_optimum() {
    Outcome o;
    Setup s = fig3();
    s.optics.zeta = 0.0;  // zeta*alpha << 1
    const DetectorParams shot{0.0, 0.0};
    const auto best = snr::snr_res_argmax(s.emitter, s.optics, shot);
    const auto& em = s.emitter;
    const double closed = std::sqrt(em.gamma1 * em.gamma1 * em.alpha * s.optics.k_geom * s.optics.mu /
                                    (16.0 * em.gamma2));
    o.require(std::abs(best.s - 1.0) <= 1e-4, fmt("S*=%.8f", best.s));
    o.require(rel(best.snr, closed) <= 1e-9, fmt("peak=%.6f closed=%.6f rel=%.2e", best.snr, closed, rel(best.snr, closed)));
    return o;
}

Outcome c5_functional_forms() {
    Outcome o;
    const auto& [em, opt, det] = fig3();
    const DetectorParams shot{0.0, 0.0};
    double res_ref = 0, red_ref = 0, worst_res = 0, worst_red = 0;
    for (int i = 0; i <= 800; ++i) {
        const double s = std::pow(10.0, -6.0 + 8.0 * i / 800.0);
        const double res = snr::snr_res(s, em, opt, shot) / (std::sqrt(s) / (1 + s));
        const double red = snr::snr_red(s, em, opt, det) / (s / (1 + s));
        if (i == 0) res_ref = res, red_ref = red;
        worst_res = std::max(worst_res, rel(res, res_ref));
        worst_red = std::max(worst_red, rel(red, red_ref));
    }
    o.require(worst_res <= 1e-10, fmt("snr_res/(sqrtS/(1+S)) spread=%.2e", worst_res));
    o.require(worst_red <= 1e-10, fmt("snr_red/(S/(1+S)) spread=%.2e", worst_red));
    return o;
}

Outcome c6_sqrt_t() {
    Outcome o;
    const auto& [em, opt, det] = fig3();
    double worst = 0;
    for (double s : {1e-5, 1e-2, 1.0, 30.0}) {
        const double red1 = snr::snr_red(s, em, opt, det, 1.0);
        const double res1 = snr::snr_res(s, em, opt, det, 1.0);
        for (double t : {0.01, 1.0, 100.0}) {
            worst = std::max(worst, rel(snr::snr_red(s, em, opt, det, t), red1 * std::sqrt(t)));
            worst = std::max(worst, rel(snr::snr_res(s, em, opt, det, t), res1 * std::sqrt(t)));
        }
    }
    o.require(worst <= 1e-12, fmt("max relative deviation=%.2e", worst));
    return o;
}

Outcome c7_weak_emitter() {
    Outcome o;
    auto with_gamma1 = [](Setup s) {
        s.emitter = EmitterParams::lifetime_limited(1e3, s.emitter.alpha);
        return s;
    };
    const Setup ideal = with_gamma1(scenarios::preset("fig5_ideal").setup);
    const Setup real = with_gamma1(scenarios::preset("fig5_realistic").setup);
    const auto di = scenarios::detectability(ideal.emitter, ideal.optics, ideal.detector, 5.0);
    const auto dr = scenarios::detectability(real.emitter, real.optics, real.detector, 5.0, 5.0);
    o.require(std::abs(di.best_snr - 7.9) <= 0.1, fmt("ideal peak=%.4f (7.9+-0.1)", di.best_snr));
    o.require(std::abs(dr.best_snr - 2.5) <= 0.1, fmt("realistic peak=%.4f (2.5+-0.1)", dr.best_snr));
    o.require(di.detectable && dr.detectable, "detectable at target 5 (1 s ideal, 5 s realistic)");

    ScanConfig scan;
    scan.n_scans = 100;
    scan.dwell = 0.25;  // 25 s per pixel
    for (const auto* setup : {&ideal, &real}) {
        const auto d = setup == &ideal ? di : dr;
        std::vector<double> v;
        for (std::uint64_t seed = 0; seed < 20; ++seed)
            v.push_back(measured_snr(*setup, d.best_detected_power, Channel::extinction, scan, 700 + seed));
        const double m = mean(v);
        o.require(m >= 10.0, fmt(setup == &ideal ? "ideal 25 s mean SNR=%.3f (>=10)"
                                                 : "realistic 25 s mean SNR=%.3f (>=10)", m));
    }
    return o;
}

Outcome c8_monte_carlo_equivalence() {
    Outcome o;
    const auto& setup = fig3();
    ScanConfig scan;
    int compared = 0;
    for (double s : {1e-5, 1e-4, 1e-3, 1e-2}) {
        const double detected = setup.optics.mu * model::power_from_saturation(s, setup.emitter, setup.optics);
        for (Channel ch : {Channel::extinction, Channel::fluorescence}) {
            const double pred = ch == Channel::extinction
                                    ? snr::snr_res(s, setup.emitter, setup.optics, setup.detector)
                                    : snr::snr_red(s, setup.emitter, setup.optics, setup.detector);
            if (pred < 10.0) continue;
            std::vector<double> v;
            for (int rep = 0; rep < 20; ++rep)
                v.push_back(measured_snr(setup, detected, ch, scan,
                                         scenarios::point_seed(8, static_cast<std::size_t>(std::log10(s) + 10), ch, rep)));
            const double m = mean(v);
            ++compared;
            o.require(rel(m, pred) < 0.15,
                      std::string(to_string(ch)) + fmt(" S=%.0e sim=%.2f pred=%.2f", s, m, pred));
        }
    }
    o.require(compared >= 5, "points with prediction >= 10: " + std::to_string(compared));
    return o;
}

Outcome c9_fit_oracle() {
    Outcome o;
    // noiseless recovery
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(200);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = -1.0 + 2.0 * static_cast<double>(i) / 199.0;
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        const double a = (t % 2 ? -1 : 1) * (0.1 + u(rng)), c = 0.3 * (u(rng) - 0.5), w = 0.05 + 0.15 * u(rng),
                     b = 1.0 + 10.0 * u(rng);
        std::vector<double> y;
        for (double xi : x) y.push_back(lorentzian(xi, a, c, w, b));
        const auto f = fit_lorentzian(x, y, a < 0 ? LineShape::dip : LineShape::peak);
        worst = std::max({worst, rel(f.amplitude, a), rel(f.fwhm, w), rel(f.baseline, b), std::abs(f.center - c) / w});
    }
    o.require(worst <= 1e-6, fmt("noiseless worst rel error=%.2e", worst));

    // Poisson noise at SNR >= 50: FWHM within 5%
    const auto& setup = fig3();
    double worst_w = 0, min_snr = 1e300;
    for (double detected : {1e6, 3e6}) {
        for (Channel ch : {Channel::extinction, Channel::fluorescence}) {
            const auto m = scenarios::measure_point(setup, detected, ch, ScanConfig{}, 10.0, 31);
            const double s = s_at_detected(setup, detected);
            worst_w = std::max(worst_w, rel(m.fit.fwhm, model::fwhm(s, setup.emitter)));
            min_snr = std::min(min_snr, m.snr.value);
        }
    }
    o.require(min_snr >= 50.0 && worst_w <= 0.05, fmt("min SNR=%.1f, worst FWHM error=%.4f", min_snr, worst_w));

    // S round trip via the fluorescence linewidth
    ScanConfig deep;
    deep.dwell = 1.0;  // 100 s per pixel
    for (double s : {0.1, 1.0, 10.0}) {
        const double detected = setup.optics.mu * model::power_from_saturation(s, setup.emitter, setup.optics);
        const auto m = scenarios::measure_point(setup, detected, Channel::fluorescence, deep, 10.0, 77);
        const double inferred = saturation_from_spectrum(m.fit, setup.emitter);
        o.require(rel(inferred, s) <= 0.10, fmt("S=%.1f -> %.4f (SNR %.0f)", s, inferred, m.snr.value));
    }
    return o;
}

Outcome c10_determinism() {
    Outcome o;
    auto render = [](unsigned threads) {
        ScanConfig cfg = ScanConfig::centered(0.01, fig3().emitter, Channel::extinction);
        cfg.seed = 123456789;
        cfg.jitter_sigma = fig3().emitter.gamma2;
        Setup noisy = fig3();
        noisy.detector.rin_kappa = 1e-3;
        const auto sp = simulate_scan(cfg, DriveParams{5e6, 0.0}, noisy, threads);
        std::ostringstream os;
        io::write_spectrum_csv(os, sp);

        scenarios::SweepSpec spec;
        spec.setup = fig3();
        spec.detected_powers = {2e3, 3e4, 1e6};
        spec.repetitions = 4;
        spec.seed = 5;
        spec.threads = threads;
        scenarios::write_table_csv(os, scenarios::sweep_table(spec, scenarios::run_sweep(spec)));
        return os.str();
    };
    const auto a = render(1), b = render(1), c = render(8);
    o.require(a == b, "repeat run byte-identical");
    o.require(a == c, "1 vs 8 threads byte-identical");
    o.require(a.size() > 1000, std::to_string(a.size()) + " bytes compared");
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"C1  equal-SNR point", c1_equal_snr_point},
        {"C2  visibility", c2_visibility},
        {"C3  low-power contrast", c3_low_power_contrast},
        {"C4  extinction optimum", c4_extinction_optimum},
        {"C5  functional forms", c5_functional_forms},
        {"C6  sqrt(t) scaling", c6_sqrt_t},
        {"C7  weak-emitter detectability", c7_weak_emitter},
        {"C8  Monte Carlo / analytic", c8_monte_carlo_equivalence},
        {"C9  fit oracle", c9_fit_oracle},
        {"C10 determinism", c10_determinism},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %-32s %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", name, out.detail.c_str(), secs);
        if (!out.pass) ++failed;
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
