#pragma once
// scenarios.hpp - parameter presets, power sweeps and figure reproductions

#include "snrlab/fitting.hpp"
#include "snrlab/scan.hpp"
#include "snrlab/snr.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace snrlab::scenarios {

/// Collection efficiency calibrated so that the fluorescence SNR is ~100 at
/// a detected power of 1e6 cps with the fig3_dbatt parameters.
inline constexpr double kDefaultZeta = 0.0126;

inline constexpr std::array<double, 3> kFig2DetectedPowers{1e6, 3e4, 2e3};
/// Detected power at which the extinction dip reaches ~10% visibility.
inline constexpr double kVisibilityQuotePower = 3.2e4;
/// Radiative-rate axis of the weak-emitter study [rad/s].
inline constexpr std::array<double, 6> kFig5Gamma1Grid{1e3, 1e4, 1e5, 1e6, 1e7, 1e8};

struct Preset {
    std::string_view name;
    std::string_view description;
    Setup setup;
};

/// fig3_dbatt, fig5_ideal, fig5_realistic.
std::span<const Preset> presets() noexcept;
/// Throws ValidationError for an unknown name.
const Preset& preset(std::string_view name);

/// `n` log-spaced values from lo to hi inclusive (n >= 2, 0 < lo < hi).
std::vector<double> log_space(double lo, double hi, std::size_t n);

// -----------------------------------------------------------------------
// Sweeps
// -----------------------------------------------------------------------
struct SweepSpec {
    std::string preset_name{"custom"};
    Setup setup;
    std::vector<double> detected_powers;  ///< mu * P_las [cps]
    std::vector<Channel> channels{Channel::extinction, Channel::fluorescence};
    /// Template for simulated points: dwell, n_scans, n_pixels, jitter and
    /// leakage are used; the grid is re-centred at every power.
    ScanConfig scan{};
    double half_widths{10.0};
    int repetitions{0};  ///< seeds per simulated point; 0 = analytic only
    std::uint64_t seed{0};
    unsigned threads{1};

    void validate() const;
};

struct SimulatedSnr {
    double mean{};
    double std_error{};
    int successes{};
    int failures{};
};

struct SweepRow {
    snr::SnrPoint analytic;
    /// Indexed like SweepSpec::channels; empty when repetitions == 0.
    std::vector<SimulatedSnr> simulated;
};

struct PointFailure {
    double detected_power{};
    Channel channel{};
    std::uint64_t seed{};
    std::string message;
};

struct SweepResult {
    std::vector<SweepRow> rows;  ///< ascending detected power
    std::vector<PointFailure> failures;
};

SweepResult run_sweep(const SweepSpec& spec);

/// Seed used for repetition `rep` of point `point` in `channel`.
std::uint64_t point_seed(std::uint64_t base, std::size_t point, Channel channel, int rep) noexcept;

/// Simulates one scan at a detected power with the grid centred on the line
/// and returns the fitted SNR. Throws Error on fit/extraction failure.
struct PointMeasurement {
    Spectrum spectrum;
    FitResult fit;
    SnrEstimate snr;
};
PointMeasurement measure_point(const Setup& setup, double detected_power, Channel channel,
                               const ScanConfig& scan_template, double half_widths,
                               std::uint64_t seed, unsigned threads = 1);

// -----------------------------------------------------------------------
// Detectability of weak emitters
// -----------------------------------------------------------------------
struct Detectability {
    bool detectable{false};
    double best_s{};               ///< saturation at the extinction optimum
    double best_power{};           ///< incident P_las [cps]
    double best_detected_power{};  ///< mu * P_las [cps]
    double best_snr{};             ///< per sqrt(Hz), i.e. at 1 s
    double snr_at_t{};             ///< best_snr * sqrt(t_int)
};

Detectability detectability(const EmitterParams& em, const OpticsParams& opt,
                            const DetectorParams& det, double snr_target, double t_int = 1.0);

// -----------------------------------------------------------------------
// Tables
// -----------------------------------------------------------------------
using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

void write_table_csv(std::ostream& os, const Table& table);
void write_table_csv(const std::filesystem::path& path, const Table& table);

Table sweep_table(const SweepSpec& spec, const SweepResult& result);

/// "<preset>_<channel>_<power_cps>.csv"
std::string spectrum_file_name(std::string_view preset, Channel channel, double detected_power);

// -----------------------------------------------------------------------
// Figure reproductions
// -----------------------------------------------------------------------
enum class Figure { fig2, fig3, fig4, fig5 };
Figure figure_from_string(std::string_view name);
std::string_view to_string(Figure f) noexcept;

struct FigureOptions {
    std::string preset_name;  ///< empty: the figure's own preset
    std::optional<Setup> setup_override;
    std::uint64_t seed{1};
    int repetitions{0};  ///< fig4: seeds per simulated point
    unsigned threads{1};
    ScanConfig scan{};   ///< dwell / n_scans / n_pixels template
};

struct FigureOutput {
    Table summary;
    /// Secondary tables (e.g. per-curve optima), keyed by file stem.
    std::vector<std::pair<std::string, Table>> extra_tables;
    /// Spectra recorded along the way, keyed by file name.
    std::vector<std::pair<std::string, Spectrum>> spectra;
    std::vector<PointFailure> failures;
};

FigureOutput reproduce(Figure figure, const FigureOptions& options);

} // namespace snrlab::scenarios
