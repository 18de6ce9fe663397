#pragma once
// model.hpp - steady-state power budget of a driven two-level emitter
//
// All functions are pure. Powers are in cps, rates and detunings in rad/s.
// Off resonance the excited population follows the standard steady-state
// two-level result
//
//     rho22(S, delta) = (S/2) / (1 + S + (delta/Gamma2)^2)
//
// whose FWHM in delta is the power-broadened width 2*Gamma2*sqrt(1+S).

#include "snrlab/params.hpp"

namespace snrlab::model {

/// On-resonance saturation parameter S = (alpha/Gamma2) * K * P_las.
double saturation_from_power(const DriveParams& drive, const EmitterParams& em,
                             const OpticsParams& opt);
double saturation_from_power(double p_las, const EmitterParams& em, const OpticsParams& opt);

/// Inverse of saturation_from_power. Throws ValidationError for S <= 0.
double power_from_saturation(double s, const EmitterParams& em, const OpticsParams& opt);

/// Incident power that produces `detected` cps on the detector (P_las = detected / mu).
inline double incident_from_detected(double detected, const OpticsParams& opt) {
    return detected / opt.mu;
}

double excited_population(double s, double detuning, const EmitterParams& em);

/// Power emitted into 4pi: Gamma1 * rho22.
double total_emission(double s, double detuning, const EmitterParams& em);

struct EmissionSplit {
    double collected{};  ///< P_m^Omega = zeta * P_m^4pi
    double resonant{};   ///< alpha * P_m^Omega (zero-phonon line)
    double red{};        ///< (1 - alpha) * P_m^Omega (red-shifted vibronic emission)
};

EmissionSplit emission_split(double p_m_4pi, const EmitterParams& em, const OpticsParams& opt);

/// Size of the resonant transmission dip, (1 - alpha*zeta) * Gamma1 * rho22(S, delta).
/// The detuning profile is a Lorentzian of the power-broadened width.
/// Throws ValidationError when alpha*zeta >= 1.
double extinction_dip(double s, double detuning, const EmitterParams& em, const OpticsParams& opt);

/// Fractional dip depth P_dip / P_las on resonance. For S << 1 this tends
/// to (1 - alpha*zeta) * alpha * K * Gamma1 / (2 Gamma2).
double visibility(double s, const EmitterParams& em, const OpticsParams& opt);

/// Power-broadened linewidth 2*Gamma2*sqrt(1+S) [rad/s].
double fwhm(double s, const EmitterParams& em);

/// Inverts fwhm(). Throws ValidationError ("sub-natural linewidth") when
/// the measured width is below 2*Gamma2.
double saturation_from_fwhm(double fwhm_meas, const EmitterParams& em);

} // namespace snrlab::model
