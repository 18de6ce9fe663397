#pragma once
// fitting.hpp - Lorentzian line fitting and SNR extraction
//
// Model: y(delta) = baseline + amplitude * h^2 / ((delta - center)^2 + h^2),
// h = fwhm / 2. Amplitude is signed (negative for a transmission dip).
//
// The optimizer is a bounded Levenberg-Marquardt iteration with the
// analytic Jacobian. Coordinates are normalized internally so that the
// relative-step test is scale free.

#include "snrlab/params.hpp"

#include <optional>
#include <span>

namespace snrlab {

struct Spectrum;

enum class LineShape { peak, dip };

struct FitResult {
    double amplitude{};     ///< counts, signed
    double center{};        ///< rad/s
    double fwhm{};          ///< rad/s
    double baseline{};      ///< counts
    double residual_rms{};  ///< rms of (data - model) over all pixels
    bool converged{false};
    int iterations{0};
};

struct FitOptions {
    int max_iterations{200};
    double step_tolerance{1e-8};  ///< relative parameter step for convergence
    /// Narrowest admissible FWHM [rad/s]. Unset: the lifetime-limited width
    /// 2*gamma2 when the spectrum carries emitter parameters, otherwise two
    /// grid steps.
    std::optional<double> min_fwhm;
    /// Widest admissible FWHM. Unset: one eighth of the scanned span, so that
    /// an off-resonant window of 3 FWHM always remains.
    std::optional<double> max_fwhm;
};

double lorentzian(double detuning, double amplitude, double center, double fwhm,
                  double baseline) noexcept;

/// Fits raw (x, y) samples; x must be ascending with at least 8 points.
FitResult fit_lorentzian(std::span<const double> x, std::span<const double> y, LineShape shape,
                         const FitOptions& options = {});

FitResult fit_lorentzian(const Spectrum& spec, LineShape shape, const FitOptions& options = {});

/// Default line shape of a channel: peaks in fluorescence, dips in extinction.
LineShape shape_for(const Spectrum& spec) noexcept;

struct SnrEstimate {
    double value{};            ///< |amplitude| / off-resonant rms; +inf when unbounded
    bool unbounded{false};     ///< zero off-resonant residual
    std::size_t off_pixels{};  ///< pixels with |delta - center| > 3 fwhm
    double noise_rms{};
};

/// On-resonant signal divided by the off-resonant rms residual. Throws
/// Error when the fit did not converge or fewer than 10 pixels lie outside
/// 3 FWHM of the fitted centre.
SnrEstimate extract_snr(std::span<const double> x, std::span<const double> y,
                        const FitResult& fit);
SnrEstimate extract_snr(const Spectrum& spec, const FitResult& fit);

/// Saturation inferred from the power-broadened linewidth of a fit.
double saturation_from_spectrum(const FitResult& fit, const EmitterParams& em);

} // namespace snrlab
