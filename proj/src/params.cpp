#include "snrlab/params.hpp"

#include "snrlab/error.hpp"

#include <cmath>
#include <string>

namespace snrlab {
namespace {

std::string join(std::string_view path, const char* field) {
    std::string out(path);
    out += '.';
    out += field;
    return out;
}

void require(bool ok, std::string_view path, const char* field, const char* what) {
    if (!ok) throw ValidationError(join(path, field), what);
}

bool finite(double v) { return std::isfinite(v); }

} // namespace

void EmitterParams::validate(std::string_view path) const {
    require(finite(gamma1) && gamma1 > 0.0, path, "gamma1", "must be > 0");
    require(finite(gamma2), path, "gamma2", "must be finite");
    // Gamma2 = Gamma1/2 is the dephasing-free limit; allow rounding at that edge.
    require(gamma2 >= 0.5 * gamma1 * (1.0 - 1e-12), path, "gamma2", "must be >= gamma1/2");
    require(finite(alpha) && alpha > 0.0 && alpha <= 1.0, path, "alpha", "must lie in (0, 1]");
}

void OpticsParams::validate(std::string_view path) const {
    require(finite(k_geom) && k_geom > 0.0, path, "k_geom", "must be > 0");
    require(finite(zeta) && zeta >= 0.0 && zeta <= 1.0, path, "zeta", "must lie in [0, 1]");
    require(finite(mu) && mu > 0.0 && mu <= 1.0, path, "mu", "must lie in (0, 1]");
}

void DetectorParams::validate(std::string_view path) const {
    require(finite(p_drk) && p_drk >= 0.0, path, "p_drk", "must be >= 0");
    require(finite(rin_kappa) && rin_kappa >= 0.0, path, "rin_kappa", "must be >= 0");
}

void DriveParams::validate(std::string_view path) const {
    require(finite(p_las) && p_las >= 0.0, path, "p_las", "must be >= 0");
    require(finite(detuning), path, "detuning", "must be finite");
}

void require_dip_prefactor(const EmitterParams& em, const OpticsParams& opt) {
    if (!(em.alpha * opt.zeta < 1.0))
        throw ValidationError("optics.zeta", "alpha*zeta must be < 1 for the resonant extinction dip");
}

void Setup::validate() const {
    emitter.validate();
    optics.validate();
    detector.validate();
}

} // namespace snrlab
