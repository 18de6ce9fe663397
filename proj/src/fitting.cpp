#include "snrlab/fitting.hpp"

#include "snrlab/error.hpp"
#include "snrlab/model.hpp"
#include "snrlab/scan.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace snrlab {

double lorentzian(double detuning, double amplitude, double center, double fwhm,
                  double baseline) noexcept {
    const double h = 0.5 * fwhm;
    const double d = detuning - center;
    return baseline + amplitude * h * h / (d * d + h * h);
}

namespace {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

enum Param { kBaseline = 0, kAmplitude = 1, kCenter = 2, kFwhm = 3 };

double median(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

// Width between the half-extremum crossings either side of `idx`, or NaN.
double half_extremum_width(std::span<const double> x, std::span<const double> y, std::size_t idx,
                           double baseline, double amplitude) {
    if (amplitude == 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double half = baseline + 0.5 * amplitude;
    // inside(v): v is still beyond the half level, on the extremum side
    auto inside = [&](double v) { return amplitude > 0.0 ? v > half : v < half; };
    auto crossing = [&](std::size_t a, std::size_t b) {
        return x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
    };

    double left = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = idx; j-- > 0;) {
        if (!inside(y[j])) {
            left = crossing(j, j + 1);
            break;
        }
    }
    double right = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = idx + 1; j < x.size(); ++j) {
        if (!inside(y[j])) {
            right = crossing(j - 1, j);
            break;
        }
    }
    return right - left;
}

struct Normalized {
    std::vector<double> x, y;
    double x0{}, xs{1.0}, y0{}, ys{1.0};
};

// Residuals r = model - y and Jacobian of the model in normalized units.
double evaluate(const Normalized& n, const Vec4& p, Mat4* jtj, Vec4* jtr) {
    const double b = p[kBaseline], a = p[kAmplitude], c = p[kCenter], h = 0.5 * p[kFwhm];
    const double h2 = h * h;
    double cost = 0.0;
    if (jtj) jtj->setZero();
    if (jtr) jtr->setZero();
    for (std::size_t i = 0; i < n.x.size(); ++i) {
        const double d = n.x[i] - c;
        const double den = d * d + h2;
        const double shape = h2 / den;
        const double r = b + a * shape - n.y[i];
        cost += r * r;
        if (jtj) {
            Vec4 g;
            g[kBaseline] = 1.0;
            g[kAmplitude] = shape;
            g[kCenter] = a * 2.0 * d * h2 / (den * den);
            g[kFwhm] = a * h * d * d / (den * den);
            jtj->noalias() += g * g.transpose();
            *jtr += g * r;
        }
    }
    return cost;
}

} // namespace

FitResult fit_lorentzian(std::span<const double> x, std::span<const double> y, LineShape shape,
                         const FitOptions& options) {
    if (x.size() != y.size()) throw ValidationError("fit", "x and y lengths differ");
    if (x.size() < 8) throw ValidationError("fit", "at least 8 pixels are required");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw ValidationError("fit", "detunings must be strictly ascending");

    const double span = x.back() - x.front();
    const double step = span / static_cast<double>(x.size() - 1);
    const double min_fwhm = options.min_fwhm.value_or(2.0 * step);
    const double max_fwhm = std::max(options.max_fwhm.value_or(span / 8.0), min_fwhm);

    // Deterministic initial guess.
    const double baseline = median({y.begin(), y.end()});
    const auto extremum = shape == LineShape::peak ? std::max_element(y.begin(), y.end())
                                                   : std::min_element(y.begin(), y.end());
    const auto idx = static_cast<std::size_t>(extremum - y.begin());
    const double amplitude = *extremum - baseline;
    double width = half_extremum_width(x, y, idx, baseline, amplitude);
    if (!std::isfinite(width) || width <= 0.0) width = span / 10.0;
    width = std::clamp(width, min_fwhm, max_fwhm);

    Normalized n;
    n.x0 = 0.5 * (x.front() + x.back());
    n.xs = 0.5 * span;
    n.y0 = baseline;
    double dev = 0.0;
    for (double v : y) dev = std::max(dev, std::abs(v - baseline));
    n.ys = dev > 0.0 ? dev : 1.0;
    n.x.resize(x.size());
    n.y.resize(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        n.x[i] = (x[i] - n.x0) / n.xs;
        n.y[i] = (y[i] - n.y0) / n.ys;
    }

    const double lo_w = min_fwhm / n.xs, hi_w = max_fwhm / n.xs;
    auto project = [&](Vec4 p) {
        p[kCenter] = std::clamp(p[kCenter], -1.0, 1.0);
        p[kFwhm] = std::clamp(p[kFwhm], lo_w, hi_w);
        return p;
    };

    Vec4 p;
    p[kBaseline] = 0.0;
    p[kAmplitude] = amplitude / n.ys;
    p[kCenter] = (x[idx] - n.x0) / n.xs;
    p[kFwhm] = width / n.xs;
    p = project(p);

    Mat4 jtj;
    Vec4 jtr;
    double cost = evaluate(n, p, &jtj, &jtr);
    double lambda = 1e-3 * jtj.diagonal().maxCoeff();
    if (!(lambda > 0.0)) lambda = 1e-3;

    FitResult out;
    for (out.iterations = 1; out.iterations <= options.max_iterations; ++out.iterations) {
        Vec4 damping = jtj.diagonal();
        const double floor = 1e-12 * std::max(damping.maxCoeff(), 1.0);
        damping = damping.cwiseMax(floor);
        Mat4 lhs = jtj + lambda * Mat4(damping.asDiagonal());
        Vec4 rhs = -jtr;
        // Parameters pinned at a bound by a descent direction pointing outward
        // are held fixed for this step.
        for (int i : {kCenter, kFwhm}) {
            const double lo = i == kCenter ? -1.0 : lo_w;
            const double hi = i == kCenter ? 1.0 : hi_w;
            const bool pinned = (p[i] <= lo && rhs[i] < 0.0) || (p[i] >= hi && rhs[i] > 0.0);
            if (!pinned) continue;
            lhs.row(i).setZero();
            lhs.col(i).setZero();
            lhs(i, i) = 1.0;
            rhs[i] = 0.0;
        }
        const Vec4 delta = lhs.ldlt().solve(rhs);
        const Vec4 trial = project(p + delta);
        const double rel_step = (trial - p).norm() / (p.norm() + 1e-12);
        const double trial_cost = evaluate(n, trial, nullptr, nullptr);

        if (std::isfinite(trial_cost) && trial_cost < cost) {
            p = trial;
            cost = evaluate(n, p, &jtj, &jtr);
            lambda = std::max(lambda * 0.3, 1e-300);
            if (rel_step < options.step_tolerance) {
                out.converged = true;
                break;
            }
        } else {
            // No descent even for a vanishing step: we sit at the minimum.
            if (rel_step < options.step_tolerance || cost == 0.0) {
                out.converged = true;
                break;
            }
            lambda *= 4.0;
        }
    }
    out.iterations = std::min(out.iterations, options.max_iterations);

    out.baseline = p[kBaseline] * n.ys + n.y0;
    out.amplitude = p[kAmplitude] * n.ys;
    out.center = p[kCenter] * n.xs + n.x0;
    out.fwhm = p[kFwhm] * n.xs;

    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - lorentzian(x[i], out.amplitude, out.center, out.fwhm, out.baseline);
        ss += r * r;
    }
    out.residual_rms = std::sqrt(ss / static_cast<double>(x.size()));
    return out;
}

namespace {

std::vector<double> counts_as_double(const Spectrum& spec) {
    return {spec.counts.begin(), spec.counts.end()};
}

} // namespace

FitResult fit_lorentzian(const Spectrum& spec, LineShape shape, const FitOptions& options) {
    FitOptions opts = options;
    if (!opts.min_fwhm && spec.setup) opts.min_fwhm = 2.0 * spec.setup->emitter.gamma2;
    const auto y = counts_as_double(spec);
    return fit_lorentzian(spec.detunings, y, shape, opts);
}

LineShape shape_for(const Spectrum& spec) noexcept {
    return spec.config.channel == Channel::fluorescence ? LineShape::peak : LineShape::dip;
}

SnrEstimate extract_snr(std::span<const double> x, std::span<const double> y,
                        const FitResult& fit) {
    if (!fit.converged) throw Error("extract_snr: the Lorentzian fit did not converge");
    SnrEstimate est;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::abs(x[i] - fit.center) <= 3.0 * fit.fwhm) continue;
        const double r = y[i] - lorentzian(x[i], fit.amplitude, fit.center, fit.fwhm, fit.baseline);
        ss += r * r;
        ++est.off_pixels;
    }
    if (est.off_pixels < 10)
        throw Error("extract_snr: only " + std::to_string(est.off_pixels) +
                    " pixels lie beyond 3 FWHM of the line; record a wider scan");
    est.noise_rms = std::sqrt(ss / static_cast<double>(est.off_pixels));
    // Residuals at the optimizer's round-off level count as noise-free.
    const double resolution = 1e-9 * std::max(std::abs(fit.amplitude), std::abs(fit.baseline));
    if (est.noise_rms <= resolution) {
        est.unbounded = true;
        est.value = std::numeric_limits<double>::infinity();
    } else {
        est.value = std::abs(fit.amplitude) / est.noise_rms;
    }
    return est;
}

SnrEstimate extract_snr(const Spectrum& spec, const FitResult& fit) {
    const auto y = counts_as_double(spec);
    return extract_snr(spec.detunings, y, fit);
}

double saturation_from_spectrum(const FitResult& fit, const EmitterParams& em) {
    return model::saturation_from_fwhm(fit.fwhm, em);
}

} // namespace snrlab
