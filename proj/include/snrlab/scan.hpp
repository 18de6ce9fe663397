#pragma once
// scan.hpp - Monte Carlo photon-counting frequency scans
//
// A scan steps the laser across a detuning grid; at each pixel the
// detector integrates for `dwell` seconds. `n_scans` passes are summed
// pixel-wise. Counts are Poisson draws around the expected rate.

#include "snrlab/params.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace snrlab {

enum class Channel { fluorescence, extinction };

std::string_view to_string(Channel c) noexcept;
/// Parses "fluorescence" / "extinction". Throws ValidationError otherwise.
Channel channel_from_string(std::string_view name);

struct ScanConfig {
    double detuning_start{};  ///< [rad/s]
    double detuning_stop{};   ///< [rad/s]
    int n_pixels{200};
    double dwell{0.01};  ///< per-pixel integration per pass [s]
    int n_scans{100};
    Channel channel{Channel::extinction};
    std::uint64_t seed{0};
    double jitter_sigma{0.0};   ///< per-scan line-centre jitter [rad/s]
    double leak_fraction{0.0};  ///< laser leakage through the long-pass filter

    /// Total integration per pixel, dwell * n_scans.
    double integration() const noexcept { return dwell * n_scans; }

    void validate(std::string_view path = "scan") const;

    /// Grid spanning +-`half_widths` power-broadened FWHM around resonance.
    static ScanConfig centered(double s, const EmitterParams& em, Channel channel,
                               double half_widths = 10.0, int n_pixels = 200);
};

std::vector<double> detuning_grid(const ScanConfig& cfg);

struct Spectrum {
    std::vector<double> detunings;      ///< [rad/s], ascending
    std::vector<std::uint64_t> counts;  ///< summed over config.n_scans passes
    ScanConfig config;
    DriveParams drive;
    std::optional<Setup> setup;   ///< physical parameters, when known
    std::uint64_t clamped{0};     ///< (scan, pixel) draws whose rate was clamped to 0

    std::size_t size() const noexcept { return counts.size(); }
};

/// Noise-free detected rate [cps] for one channel at one detuning.
///   fluorescence: mu*P_red(delta) + P_drk + leak*mu*P_las
///   extinction:   mu*(P_las - P_dip(delta)) + P_drk
double expected_rate(Channel channel, double detuning, const DriveParams& drive,
                     const EmitterParams& em, const OpticsParams& opt, const DetectorParams& det,
                     double leak_fraction = 0.0);

/// Simulates `cfg.n_scans` passes. The result is a pure function of
/// (cfg, drive, setup); `threads` only changes wall time.
Spectrum simulate_scan(const ScanConfig& cfg, const DriveParams& drive, const Setup& setup,
                       unsigned threads = 1);

/// Pixel-wise sum of spectra recorded on the same grid.
Spectrum accumulate(std::span<const Spectrum> spectra);

} // namespace snrlab
