#include "snrlab/error.hpp"
#include "snrlab/model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace snrlab;
using namespace snrlab::model;

namespace {

const EmitterParams kDbatt = EmitterParams::lifetime_limited(angular(17e6), 0.2);
const OpticsParams kOptics{0.5, 0.0126, 0.2};

struct RandomParams {
    EmitterParams em;
    OpticsParams opt;
};

RandomParams draw(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double g1 = std::pow(10.0, 2.0 + 7.0 * u(rng));
    const double g2 = g1 * (0.5 + 5.0 * u(rng));
    const double alpha = 0.01 + 0.99 * u(rng);
    return {{g1, g2, alpha}, {0.05 + 2.0 * u(rng), 0.99 * u(rng), 0.01 + 0.99 * u(rng)}};
}

} // namespace

TEST_CASE("saturation parameter from laser power") {
    const DriveParams drive{5e6, 0.0};
    const double s = saturation_from_power(drive, kDbatt, kOptics);
    // 0.2 / (pi * 17e6) * 0.5 * 5e6
    CHECK(s == doctest::Approx(5e5 / (std::numbers::pi * 17e6)).epsilon(1e-12));
    CHECK(s == doctest::Approx(9.4e-3).epsilon(0.01));
    CHECK(saturation_from_power(0.0, kDbatt, kOptics) == 0.0);
    CHECK(saturation_from_power(2e6, kDbatt, kOptics) ==
          doctest::Approx(2.0 * saturation_from_power(1e6, kDbatt, kOptics)).epsilon(1e-15));
    CHECK(power_from_saturation(s, kDbatt, kOptics) == doctest::Approx(5e6).epsilon(1e-14));
}

TEST_CASE("power from saturation") {
    const double p = power_from_saturation(1.0, kDbatt, kOptics);
    CHECK(p == doctest::Approx(std::numbers::pi * 17e6 / 0.1).epsilon(1e-14));
    CHECK(p == doctest::Approx(5.34e8).epsilon(0.001));
    CHECK(power_from_saturation(1e-300, kDbatt, kOptics) < 1e-290);
    CHECK_THROWS_AS(power_from_saturation(0.0, kDbatt, kOptics), ValidationError);
    CHECK_THROWS_AS(power_from_saturation(-1.0, kDbatt, kOptics), ValidationError);
}

TEST_CASE("excited-state population") {
    CHECK(excited_population(1.0, 0.0, kDbatt) == doctest::Approx(0.25));
    CHECK(excited_population(1e12, 0.0, kDbatt) == doctest::Approx(0.5).epsilon(1e-9));
    // (1/2) / (1 + 1 + 2) = 1/8
    CHECK(excited_population(1.0, kDbatt.gamma2 * std::sqrt(2.0), kDbatt) == doctest::Approx(0.125));
    CHECK(excited_population(0.0, 0.0, kDbatt) == 0.0);
}

TEST_CASE("total emission") {
    const double g1 = kDbatt.gamma1;
    CHECK(total_emission(1e12, 0.0, kDbatt) == doctest::Approx(g1 / 2).epsilon(1e-9));
    CHECK(g1 / 2 == doctest::Approx(5.34e7).epsilon(0.001));
    CHECK(total_emission(0.0, 0.0, kDbatt) == 0.0);
    CHECK(total_emission(1.0, 0.0, kDbatt) == doctest::Approx(g1 / 4));
}

TEST_CASE("emission split") {
    const EmitterParams full{1e6, 5e5, 1.0};
    const auto a = emission_split(1e6, full, OpticsParams{0.5, 1.0, 1.0});
    CHECK(a.collected == 1e6);
    CHECK(a.resonant == 1e6);
    CHECK(a.red == 0.0);

    const auto b = emission_split(1e6, kDbatt, OpticsParams{0.5, 0.0, 1.0});
    CHECK(b.collected == 0.0);
    CHECK(b.resonant == 0.0);
    CHECK(b.red == 0.0);

    const auto c = emission_split(1e6, kDbatt, OpticsParams{0.5, 0.01, 1.0});
    CHECK(c.collected == doctest::Approx(1e4));
    CHECK(c.resonant == doctest::Approx(2e3));
    CHECK(c.red == doctest::Approx(8e3));
}

TEST_CASE("extinction dip") {
    // weak-drive visibility (1 - alpha zeta) alpha K
    CHECK(visibility(0.0, kDbatt, kOptics) == doctest::Approx((1 - 0.2 * 0.0126) * 0.1));
    CHECK(visibility(1e-6, kDbatt, kOptics) == doctest::Approx(0.10).epsilon(0.05));
    CHECK(extinction_dip(0.0, 0.0, kDbatt, kOptics) == 0.0);
    const OpticsParams no_collection{0.5, 0.0, 0.2};
    CHECK(extinction_dip(1.0, 0.0, kDbatt, no_collection) == doctest::Approx(kDbatt.gamma1 / 4));
    CHECK(kDbatt.gamma1 / 4 == doctest::Approx(2.67e7).epsilon(0.001));
    CHECK(extinction_dip(1e12, 0.0, kDbatt, kOptics) ==
          doctest::Approx((1 - 0.2 * 0.0126) * kDbatt.gamma1 / 2).epsilon(1e-9));

    const EmitterParams unity{1e6, 5e5, 1.0};
    CHECK_THROWS_AS(extinction_dip(1.0, 0.0, unity, OpticsParams{0.5, 1.0, 1.0}), ValidationError);
}

TEST_CASE("power-broadened linewidth") {
    CHECK(fwhm(0.0, kDbatt) == doctest::Approx(kDbatt.gamma1));
    CHECK(ordinary(fwhm(0.0, kDbatt)) == doctest::Approx(17e6));
    CHECK(fwhm(3.0, kDbatt) == doctest::Approx(4.0 * kDbatt.gamma2));
    for (double e = -6.0; e <= 2.0; e += 0.25) {
        const double s = std::pow(10.0, e);
        CHECK(saturation_from_fwhm(fwhm(s, kDbatt), kDbatt) == doctest::Approx(s).epsilon(1e-8));
    }
    CHECK(saturation_from_fwhm(2.0 * kDbatt.gamma2, kDbatt) == 0.0);
    CHECK_THROWS_WITH_AS(saturation_from_fwhm(1.9 * kDbatt.gamma2, kDbatt),
                         doctest::Contains("sub-natural"), ValidationError);
}

TEST_CASE("lineshape FWHM matches the power-broadened width") {
    // Half-maximum of rho22 in detuning, located by bisection.
    for (double s : {0.0, 0.3, 1.0, 10.0}) {
        const double peak = total_emission(s == 0.0 ? 1e-9 : s, 0.0, kDbatt);
        double lo = 0.0, hi = 100.0 * kDbatt.gamma2;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (total_emission(s == 0.0 ? 1e-9 : s, mid, kDbatt) > 0.5 * peak ? lo : hi) = mid;
        }
        CHECK(2.0 * lo == doctest::Approx(fwhm(s, kDbatt)).epsilon(1e-6));
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((EmitterParams{0.0, 1.0, 0.5}.validate()), ValidationError);
    CHECK_THROWS_AS((EmitterParams{2.0, 0.9, 0.5}.validate()), ValidationError);
    CHECK_THROWS_AS((EmitterParams{2.0, 1.0, 0.0}.validate()), ValidationError);
    CHECK_THROWS_AS((EmitterParams{2.0, 1.0, 1.5}.validate()), ValidationError);
    CHECK_NOTHROW(kDbatt.validate());
    CHECK_THROWS_AS((OpticsParams{0.0, 0.1, 0.5}.validate()), ValidationError);
    CHECK_THROWS_AS((OpticsParams{0.5, 1.1, 0.5}.validate()), ValidationError);
    CHECK_THROWS_AS((OpticsParams{0.5, 0.1, 0.0}.validate()), ValidationError);
    CHECK_THROWS_AS((DetectorParams{-1.0, 0.0}.validate()), ValidationError);
    CHECK_THROWS_AS((DriveParams{-1.0, 0.0}.validate()), ValidationError);
    try {
        OpticsParams{0.5, 2.0, 0.5}.validate();
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "optics.zeta");
    }
}

TEST_CASE("property: energy bookkeeping, monotonicity, symmetry, linearity") {
    std::mt19937_64 rng(20240917);
    std::uniform_real_distribution<double> log_s(-6.0, 3.0);
    for (int trial = 0; trial < 500; ++trial) {
        const auto [em, opt] = draw(rng);
        const double s = std::pow(10.0, log_s(rng));
        const double emitted = total_emission(s, 0.0, em);
        const double resonant = emission_split(emitted, em, opt).resonant;
        CHECK(extinction_dip(s, 0.0, em, opt) + resonant == doctest::Approx(emitted).epsilon(1e-13));
        CHECK((em.gamma1 / 2) * s / (1 + s) == doctest::Approx(emitted).epsilon(1e-13));

        const double s2 = s * 1.01;
        CHECK(total_emission(s2, 0.0, em) > emitted);
        CHECK(extinction_dip(s2, 0.0, em, opt) > extinction_dip(s, 0.0, em, opt));
        CHECK(emission_split(total_emission(s2, 0.0, em), em, opt).red >=
              emission_split(emitted, em, opt).red);
        CHECK(excited_population(s, 0.0, em) < 0.5);

        const double d = em.gamma2 * std::pow(10.0, log_s(rng) / 3.0);
        CHECK(total_emission(s, d, em) == total_emission(s, -d, em));
        CHECK(extinction_dip(s, d, em, opt) == extinction_dip(s, -d, em, opt));
        CHECK(total_emission(s, d, em) < emitted);

        const double weak = std::min(s, 1e-3);
        const double p = power_from_saturation(weak, em, opt);
        const double ratio = total_emission(saturation_from_power(2 * p, em, opt), 0.0, em) /
                             total_emission(saturation_from_power(p, em, opt), 0.0, em);
        CHECK(ratio == doctest::Approx(2.0).epsilon(0.002));
    }
}
