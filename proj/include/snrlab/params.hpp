#pragma once
// params.hpp - physical parameter sets of the emitter / optics / detector model
//
// Units: powers are photon rates in counts per second (cps); Gamma1, Gamma2
// and detunings are angular rates in rad/s.

#include <numbers>
#include <string_view>

namespace snrlab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Converts an ordinary frequency (Hz) to an angular rate (rad/s).
constexpr double angular(double hz) noexcept { return kTwoPi * hz; }
/// Converts an angular rate (rad/s) to an ordinary frequency (Hz).
constexpr double ordinary(double rad_s) noexcept { return rad_s / kTwoPi; }

// -----------------------------------------------------------------------
// Two-level emitter
// -----------------------------------------------------------------------
struct EmitterParams {
    double gamma1{};  ///< total spontaneous emission rate [rad/s]
    double gamma2{};  ///< transverse decay rate [rad/s], >= gamma1/2
    double alpha{};   ///< zero-phonon-line branching ratio, (0, 1]

    /// Lifetime-limited emitter (no pure dephasing): gamma2 = gamma1 / 2.
    static EmitterParams lifetime_limited(double gamma1, double alpha) noexcept {
        return {gamma1, gamma1 / 2.0, alpha};
    }

    void validate(std::string_view path = "emitter") const;
};

// -----------------------------------------------------------------------
// Collection / excitation geometry
// -----------------------------------------------------------------------
struct OpticsParams {
    double k_geom{};  ///< geometrical factor K (scattered / incident power, weak drive)
    double zeta{};    ///< fraction of the total emission collected into the detection solid angle
    double mu{};      ///< transmission losses times detector efficiency, (0, 1]

    void validate(std::string_view path = "optics") const;
};

struct DetectorParams {
    double p_drk{};      ///< dark-count rate [cps]
    double rin_kappa{};  ///< laser intensity-noise coefficient kappa

    void validate(std::string_view path = "detector") const;
};

struct DriveParams {
    double p_las{};     ///< incident laser power before losses [cps]
    double detuning{};  ///< laser detuning from the 0-0 line [rad/s]

    void validate(std::string_view path = "drive") const;
};

/// Rejects alpha*zeta >= 1, the regime where the resonant dip prefactor
/// (1 - alpha*zeta) vanishes.
void require_dip_prefactor(const EmitterParams& em, const OpticsParams& opt);

/// Bundle of the three parameter sets that stay fixed during a scan or sweep.
struct Setup {
    EmitterParams emitter;
    OpticsParams optics;
    DetectorParams detector;

    void validate() const;
};

} // namespace snrlab
