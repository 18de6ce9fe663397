#pragma once
// snr.hpp - analytic signal-to-noise ratios of the two detection channels
//
// Signal is the single-emitter response only; noise collects every other
// fluctuation (the signal's own shot noise is excluded). Every SNR scales
// as sqrt(t_int).

#include "snrlab/params.hpp"

#include <optional>

namespace snrlab::snr {

inline constexpr double kDefaultIntegration = 1.0;  // s per frequency pixel

/// Operating point of one sweep row.
struct SnrPoint {
    double s{};               ///< saturation parameter
    double p_las_detected{};  ///< mu * P_las [cps]
    double snr_red{};         ///< fluorescence channel
    double snr_res{};         ///< resonant extinction channel
    double t_int{kDefaultIntegration};
};

/// Fluorescence excitation SNR:
///   mu*zeta*(1-alpha)*Gamma1 / (2 sqrt(P_drk)) * S/(1+S) * sqrt(t).
/// Throws Error when P_drk == 0, where the dark-count-only noise model is undefined.
double snr_red(double s, const EmitterParams& em, const OpticsParams& opt,
               const DetectorParams& det, double t_int = kDefaultIntegration);

/// S -> infinity limit of snr_red at t_int.
double snr_red_max(const EmitterParams& em, const OpticsParams& opt, const DetectorParams& det,
                   double t_int = kDefaultIntegration);

/// Total extinction-channel noise in counts over t_int, treating all three
/// contributions as white: sqrt(t * (mu P + (mu kappa P)^2 + P_drk)).
double noise_res(double p_las, const OpticsParams& opt, const DetectorParams& det,
                 double t_int = kDefaultIntegration);

/// Extinction SNR with the full noise budget: mu * P_dip * t / noise_res.
double snr_res(double s, const EmitterParams& em, const OpticsParams& opt,
               const DetectorParams& det, double t_int = kDefaultIntegration);

/// Shot-noise-limited closed form
///   (1 - zeta alpha) (Gamma1/2) sqrt(mu alpha K / Gamma2) sqrt(S)/(1+S) sqrt(t).
double snr_res_shot_limited(double s, const EmitterParams& em, const OpticsParams& opt,
                            double t_int = kDefaultIntegration);

/// Maximum of the shot-noise-limited extinction SNR, reached at S = 1:
/// sqrt(Gamma1^2 alpha K mu / (16 Gamma2)) * (1 - zeta alpha).
double snr_res_shot_limited_max(const EmitterParams& em, const OpticsParams& opt,
                                double t_int = kDefaultIntegration);

struct Optimum {
    double s{};
    double snr{};
};

/// Saturation that maximizes snr_res (at t = 1 s). Exactly S = 1 when the
/// detector adds neither intensity noise nor dark counts, otherwise a
/// golden-section search over log S (relative tolerance 1e-6).
Optimum snr_res_argmax(const EmitterParams& em, const OpticsParams& opt, const DetectorParams& det);

/// Where the fluorescence SNR overtakes the extinction SNR. Bisection on
/// the sign of snr_red - snr_res over log S in [s_min, s_max]; nullopt
/// when the curves do not cross in that window.
std::optional<double> crossover_saturation(const EmitterParams& em, const OpticsParams& opt,
                                           const DetectorParams& det, double s_min = 1e-12,
                                           double s_max = 1e6);

SnrPoint evaluate(double s, const EmitterParams& em, const OpticsParams& opt,
                  const DetectorParams& det, double t_int = kDefaultIntegration);

} // namespace snrlab::snr
