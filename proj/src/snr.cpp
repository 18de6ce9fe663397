#include "snrlab/snr.hpp"

#include "snrlab/error.hpp"
#include "snrlab/model.hpp"

#include <cmath>
#include <limits>

namespace snrlab::snr {
namespace {

void require_time(double t_int) {
    if (!(t_int > 0.0) || !std::isfinite(t_int))
        throw ValidationError("t_int", "integration time must be > 0");
}

// Fluorescence coefficient: snr_red = c_f * S/(1+S) at t = 1 s.
double fluorescence_coefficient(const EmitterParams& em, const OpticsParams& opt,
                                const DetectorParams& det) {
    if (det.p_drk == 0.0)
        throw Error("fluorescence SNR undefined for zero dark counts");
    return opt.mu * opt.zeta * (1.0 - em.alpha) * em.gamma1 / (2.0 * std::sqrt(det.p_drk));
}

double shot_limited_coefficient(const EmitterParams& em, const OpticsParams& opt) {
    require_dip_prefactor(em, opt);
    return (1.0 - opt.zeta * em.alpha) * 0.5 * em.gamma1 *
           std::sqrt(opt.mu * em.alpha * opt.k_geom / em.gamma2);
}

} // namespace

double snr_red(double s, const EmitterParams& em, const OpticsParams& opt,
               const DetectorParams& det, double t_int) {
    require_time(t_int);
    return fluorescence_coefficient(em, opt, det) * s / (1.0 + s) * std::sqrt(t_int);
}

double snr_red_max(const EmitterParams& em, const OpticsParams& opt, const DetectorParams& det,
                   double t_int) {
    require_time(t_int);
    return fluorescence_coefficient(em, opt, det) * std::sqrt(t_int);
}

double noise_res(double p_las, const OpticsParams& opt, const DetectorParams& det, double t_int) {
    require_time(t_int);
    const double detected = opt.mu * p_las;
    const double rin = det.rin_kappa * detected;
    return std::sqrt(t_int * (detected + rin * rin + det.p_drk));
}

double snr_res(double s, const EmitterParams& em, const OpticsParams& opt,
               const DetectorParams& det, double t_int) {
    require_time(t_int);
    require_dip_prefactor(em, opt);
    if (s == 0.0) return 0.0;
    const double p_las = model::power_from_saturation(s, em, opt);
    const double signal = opt.mu * model::extinction_dip(s, 0.0, em, opt) * t_int;
    return signal / noise_res(p_las, opt, det, t_int);
}

double snr_res_shot_limited(double s, const EmitterParams& em, const OpticsParams& opt,
                            double t_int) {
    require_time(t_int);
    return shot_limited_coefficient(em, opt) * std::sqrt(s) / (1.0 + s) * std::sqrt(t_int);
}

double snr_res_shot_limited_max(const EmitterParams& em, const OpticsParams& opt, double t_int) {
    require_time(t_int);
    require_dip_prefactor(em, opt);
    const double peak = std::sqrt(em.gamma1 * em.gamma1 * em.alpha * opt.k_geom * opt.mu /
                                  (16.0 * em.gamma2));
    return (1.0 - opt.zeta * em.alpha) * peak * std::sqrt(t_int);
}

Optimum snr_res_argmax(const EmitterParams& em, const OpticsParams& opt, const DetectorParams& det) {
    require_dip_prefactor(em, opt);
    if (det.rin_kappa == 0.0 && det.p_drk == 0.0) return {1.0, snr_res(1.0, em, opt, det)};

    // snr_res is unimodal in log S; bracket generously around the shot-noise optimum.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(1e-10);
    double hi = std::log(1e8);
    auto f = [&](double log_s) { return snr_res(std::exp(log_s), em, opt, det); };
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    // |d log S| < 1e-6 <=> relative tolerance 1e-6 in S
    while (hi - lo > 1e-7) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    const double s = std::exp(0.5 * (lo + hi));
    return {s, snr_res(s, em, opt, det)};
}

std::optional<double> crossover_saturation(const EmitterParams& em, const OpticsParams& opt,
                                           const DetectorParams& det, double s_min, double s_max) {
    if (!(s_min > 0.0) || !(s_max > s_min))
        throw ValidationError("crossover", "search window must satisfy 0 < s_min < s_max");
    if (opt.zeta == 0.0 || em.alpha == 1.0) return std::nullopt;  // no red fluorescence at all

    auto diff = [&](double log_s) {
        const double s = std::exp(log_s);
        return snr_red(s, em, opt, det) - snr_res(s, em, opt, det);
    };
    double lo = std::log(s_min);
    double hi = std::log(s_max);
    const double d_lo = diff(lo);
    const double d_hi = diff(hi);
    if (d_lo >= 0.0 || d_hi <= 0.0) return std::nullopt;

    // Bisect until the two SNRs agree to well below 1e-6 relative.
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (diff(mid) < 0.0 ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

SnrPoint evaluate(double s, const EmitterParams& em, const OpticsParams& opt,
                  const DetectorParams& det, double t_int) {
    SnrPoint p;
    p.s = s;
    p.t_int = t_int;
    p.p_las_detected = s > 0.0 ? opt.mu * model::power_from_saturation(s, em, opt) : 0.0;
    p.snr_red = det.p_drk > 0.0 ? snr_red(s, em, opt, det, t_int)
                                : std::numeric_limits<double>::quiet_NaN();
    p.snr_res = snr_res(s, em, opt, det, t_int);
    return p;
}

} // namespace snrlab::snr
