#pragma once
// config.hpp - declarative run configuration (JSON) with preset inheritance
//
//   {
//     "preset": "fig3_dbatt",
//     "optics":   { "zeta": 0.02 },
//     "drive":    { "power_cps": 1e6, "power_semantics": "detected" },
//     "scan":     { "channel": "extinction", "n_scans": 100, "dwell_s": 0.01 },
//     "sweep":    { "power_min_cps": 1e3, "power_max_cps": 1e7, "points": 9, "reps": 20 },
//     "analysis": { "t_int_s": 1.0, "snr_target": 5 }
//   }
//
// Rates are given in Hz (gamma1_hz = Gamma1 / 2pi) or rad/s (gamma1_rad_s);
// conversion to rad/s happens here and nowhere else. Unknown keys are
// rejected with the offending field path.

#include "snrlab/scan.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace snrlab {

struct RunConfig {
    std::string preset_name{"fig3_dbatt"};
    Setup setup;

    double power{1e6};            ///< as written in the config
    bool power_is_detected{true};  ///< true: mu*P_las, false: incident P_las
    double detuning{0.0};          ///< [rad/s]

    ScanConfig scan;                ///< grid filled from power when not given
    bool explicit_grid{false};
    double half_widths{10.0};
    unsigned threads{1};

    std::vector<double> sweep_powers;  ///< detected powers [cps]
    std::vector<Channel> sweep_channels{Channel::extinction, Channel::fluorescence};
    int reps{0};

    double t_int{1.0};
    double snr_target{5.0};

    std::filesystem::path output_dir{"."};
    int verbosity{0};

    DriveParams drive() const;
    double detected_power() const;
    /// Scan config with the grid centred on the line when no explicit grid was given.
    ScanConfig resolved_scan() const;

    void validate() const;
};

/// Builds a configuration from a JSON document. Throws ValidationError.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace snrlab
