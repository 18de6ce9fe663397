#include "snrlab/model.hpp"

#include "snrlab/error.hpp"

#include <cmath>

namespace snrlab::model {

double saturation_from_power(double p_las, const EmitterParams& em, const OpticsParams& opt) {
    return em.alpha / em.gamma2 * opt.k_geom * p_las;
}

double saturation_from_power(const DriveParams& drive, const EmitterParams& em,
                             const OpticsParams& opt) {
    return saturation_from_power(drive.p_las, em, opt);
}

double power_from_saturation(double s, const EmitterParams& em, const OpticsParams& opt) {
    if (!(s > 0.0) || !std::isfinite(s))
        throw ValidationError("saturation", "must be a finite value > 0");
    return s * em.gamma2 / (em.alpha * opt.k_geom);
}

double excited_population(double s, double detuning, const EmitterParams& em) {
    const double x = detuning / em.gamma2;
    return 0.5 * s / (1.0 + s + x * x);
}

double total_emission(double s, double detuning, const EmitterParams& em) {
    return em.gamma1 * excited_population(s, detuning, em);
}

EmissionSplit emission_split(double p_m_4pi, const EmitterParams& em, const OpticsParams& opt) {
    const double collected = opt.zeta * p_m_4pi;
    return {collected, em.alpha * collected, (1.0 - em.alpha) * collected};
}

double extinction_dip(double s, double detuning, const EmitterParams& em, const OpticsParams& opt) {
    require_dip_prefactor(em, opt);
    return (1.0 - em.alpha * opt.zeta) * total_emission(s, detuning, em);
}

double visibility(double s, const EmitterParams& em, const OpticsParams& opt) {
    if (s == 0.0) {
        // S -> 0 limit of P_dip / P_las
        require_dip_prefactor(em, opt);
        return (1.0 - em.alpha * opt.zeta) * em.alpha * opt.k_geom * em.gamma1 / (2.0 * em.gamma2);
    }
    return extinction_dip(s, 0.0, em, opt) / power_from_saturation(s, em, opt);
}

double fwhm(double s, const EmitterParams& em) { return 2.0 * em.gamma2 * std::sqrt(1.0 + s); }

double saturation_from_fwhm(double fwhm_meas, const EmitterParams& em) {
    const double ratio = fwhm_meas / (2.0 * em.gamma2);
    if (!std::isfinite(ratio) || ratio < 1.0)
        throw ValidationError("fwhm", "sub-natural linewidth: measured FWHM is below 2*gamma2");
    return ratio * ratio - 1.0;
}

} // namespace snrlab::model
