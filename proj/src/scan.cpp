#include "snrlab/scan.hpp"

#include "snrlab/error.hpp"
#include "snrlab/model.hpp"
#include "snrlab/random.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

namespace snrlab {

std::string_view to_string(Channel c) noexcept {
    return c == Channel::fluorescence ? "fluorescence" : "extinction";
}

Channel channel_from_string(std::string_view name) {
    if (name == "fluorescence") return Channel::fluorescence;
    if (name == "extinction") return Channel::extinction;
    throw ValidationError("channel", "expected \"fluorescence\" or \"extinction\", got \"" +
                                         std::string(name) + "\"");
}

void ScanConfig::validate(std::string_view path) const {
    const std::string p(path);
    if (!std::isfinite(detuning_start) || !std::isfinite(detuning_stop) ||
        !(detuning_stop > detuning_start))
        throw ValidationError(p + ".detuning_stop", "must be greater than detuning_start");
    if (n_pixels < 8) throw ValidationError(p + ".n_pixels", "must be >= 8");
    if (!(dwell > 0.0) || !std::isfinite(dwell)) throw ValidationError(p + ".dwell", "must be > 0");
    if (n_scans < 1) throw ValidationError(p + ".n_scans", "must be >= 1");
    if (!(jitter_sigma >= 0.0)) throw ValidationError(p + ".jitter_sigma", "must be >= 0");
    if (!(leak_fraction >= 0.0)) throw ValidationError(p + ".leak_fraction", "must be >= 0");
}

ScanConfig ScanConfig::centered(double s, const EmitterParams& em, Channel channel,
                                double half_widths, int n_pixels) {
    ScanConfig cfg;
    const double half = half_widths * model::fwhm(s, em);
    cfg.detuning_start = -half;
    cfg.detuning_stop = half;
    cfg.n_pixels = n_pixels;
    cfg.channel = channel;
    return cfg;
}

std::vector<double> detuning_grid(const ScanConfig& cfg) {
    std::vector<double> grid(static_cast<std::size_t>(cfg.n_pixels));
    const double step = (cfg.detuning_stop - cfg.detuning_start) / (cfg.n_pixels - 1);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = cfg.detuning_start + static_cast<double>(i) * step;
    grid.back() = cfg.detuning_stop;
    return grid;
}

namespace {

struct RateTerms {
    double laser;    // part that follows the laser intensity
    double emitter;  // emitter-driven part, signed
    double dark;
};

RateTerms rate_terms(Channel channel, double detuning, const DriveParams& drive,
                     const Setup& setup, double leak_fraction) {
    const auto& [em, opt, det] = setup;
    const double s = model::saturation_from_power(drive.p_las, em, opt);
    if (channel == Channel::fluorescence) {
        const auto split = model::emission_split(model::total_emission(s, detuning, em), em, opt);
        return {leak_fraction * opt.mu * drive.p_las, opt.mu * split.red, det.p_drk};
    }
    return {opt.mu * drive.p_las, -opt.mu * model::extinction_dip(s, detuning, em, opt), det.p_drk};
}

} // namespace

double expected_rate(Channel channel, double detuning, const DriveParams& drive,
                     const EmitterParams& em, const OpticsParams& opt, const DetectorParams& det,
                     double leak_fraction) {
    const auto t = rate_terms(channel, detuning, drive, Setup{em, opt, det}, leak_fraction);
    return std::max(0.0, t.laser + t.emitter) + t.dark;
}

Spectrum simulate_scan(const ScanConfig& cfg, const DriveParams& drive, const Setup& setup,
                       unsigned threads) {
    cfg.validate();
    drive.validate();
    setup.validate();
    if (cfg.channel == Channel::extinction) require_dip_prefactor(setup.emitter, setup.optics);

    Spectrum out;
    out.detunings = detuning_grid(cfg);
    out.config = cfg;
    out.drive = drive;
    out.setup = setup;

    const auto n_pix = out.detunings.size();
    const auto n_scans = static_cast<std::size_t>(cfg.n_scans);
    // White intensity noise: per-dwell relative std kappa/sqrt(dwell) gives a
    // variance (mu kappa P)^2 * t after summing t/dwell passes.
    const double rin_sigma = setup.detector.rin_kappa / std::sqrt(cfg.dwell);
    // Jitter draws use a pixel index no grid can reach.
    constexpr std::uint64_t kJitterSlot = ~std::uint64_t{0};

    struct Partial {
        std::vector<std::uint64_t> counts;
        std::uint64_t clamped = 0;
    };

    auto run_scans = [&](std::size_t first, std::size_t last, Partial& part) {
        part.counts.assign(n_pix, 0);
        for (std::size_t scan = first; scan < last; ++scan) {
            double shift = 0.0;
            if (cfg.jitter_sigma > 0.0) {
                auto js = Stream::at(cfg.seed, scan, kJitterSlot);
                shift = std::normal_distribution<double>(0.0, cfg.jitter_sigma)(js);
            }
            for (std::size_t px = 0; px < n_pix; ++px) {
                auto stream = Stream::at(cfg.seed, scan, px);
                const auto terms = rate_terms(cfg.channel, out.detunings[px] - shift, drive, setup,
                                              cfg.leak_fraction);
                double factor = 1.0;
                if (rin_sigma > 0.0)
                    factor = std::max(0.0, 1.0 + rin_sigma * std::normal_distribution<double>()(stream));
                // The transmission dip rides on the instantaneous laser intensity.
                double optical = cfg.channel == Channel::extinction
                                     ? factor * (terms.laser + terms.emitter)
                                     : factor * terms.laser + terms.emitter;
                if (optical < 0.0) {
                    optical = 0.0;
                    ++part.clamped;
                }
                const double mean = (optical + terms.dark) * cfg.dwell;
                if (mean > 0.0)
                    part.counts[px] += std::poisson_distribution<std::uint64_t>(mean)(stream);
            }
        }
    };

    const std::size_t n_workers =
        std::clamp<std::size_t>(threads == 0 ? std::thread::hardware_concurrency() : threads, 1,
                                n_scans);
    std::vector<Partial> parts(n_workers);
    if (n_workers == 1) {
        run_scans(0, n_scans, parts[0]);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            const std::size_t first = n_scans * w / n_workers;
            const std::size_t last = n_scans * (w + 1) / n_workers;
            pool.emplace_back([&, first, last, w] { run_scans(first, last, parts[w]); });
        }
    }

    out.counts.assign(n_pix, 0);
    for (const auto& part : parts) {
        for (std::size_t px = 0; px < n_pix; ++px) out.counts[px] += part.counts[px];
        out.clamped += part.clamped;
    }
    return out;
}

Spectrum accumulate(std::span<const Spectrum> spectra) {
    if (spectra.empty()) throw Error("accumulate: no spectra given");
    Spectrum total = spectra.front();
    for (const auto& sp : spectra.subspan(1)) {
        if (sp.detunings != total.detunings)
            throw Error("accumulate: spectra were recorded on different detuning grids");
        for (std::size_t i = 0; i < total.counts.size(); ++i) total.counts[i] += sp.counts[i];
        total.config.n_scans += sp.config.n_scans;
        total.clamped += sp.clamped;
    }
    return total;
}

} // namespace snrlab
