#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chromonet/bath.hpp"
#include "chromonet/errors.hpp"
#include "chromonet/units.hpp"
#include "oracles.hpp"

using namespace chromonet;

namespace {

// Refines a trapezoid rule on a fixed window until two levels agree to 1e-9.
double trapezoid_mean_energy(const BathSpec& b) {
    const double kt = units::thermal_energy(b.temperature);
    const double lo = 1e-6 * b.gamma, hi = b.gamma + 80.0 * kt;
    auto bose = [&](double w) { return 1.0 / std::expm1(w / kt); };
    auto num = [&](double w) { return spectral_density(b, w) * w * bose(w); };
    auto den = [&](double w) { return spectral_density(b, w) * bose(w); };
    double prev = 0.0;
    for (int panels = 1024;; panels *= 2) {
        const double h = (hi - lo) / panels;
        double sn = 0.5 * (num(lo) + num(hi)), sd = 0.5 * (den(lo) + den(hi));
        for (int i = 1; i < panels; ++i) {
            sn += num(lo + i * h);
            sd += den(lo + i * h);
        }
        const double value = sn / sd;
        if (panels > 1024 && std::abs(value - prev) < 1e-9 * value) return value;
        prev = value;
    }
}

}  // namespace

TEST_CASE("correlation amplitude examples") {
    BathSpec b;
    const auto c = correlation_amplitude(b);
    CHECK(c.real() == doctest::Approx(35.0 * 2.0 * 0.6950348 * 298.0));
    CHECK(c.real() == doctest::Approx(14498.4).epsilon(1e-5));
    CHECK(c.imag() == doctest::Approx(-1750.0));

    b.lambda = 0.0;
    CHECK(correlation_amplitude(b) == std::complex<double>(0.0, 0.0));

    BathSpec lo, hi;
    hi.lambda = 350.0;
    const auto ratio = correlation_amplitude(hi) / correlation_amplitude(lo);
    CHECK(ratio.real() == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(std::abs(ratio.imag()) < 1e-14);
}

TEST_CASE("real part vanishes in the zero-temperature limit") {
    BathSpec b;
    b.temperature = 1e-9;
    const auto c = correlation_amplitude(b);
    CHECK(std::abs(c.real()) < 1e-6);
    CHECK(c.imag() == doctest::Approx(-1750.0));
}

TEST_CASE("spectral density examples") {
    const BathSpec b;
    CHECK(spectral_density(b, 0.0) == 0.0);
    CHECK(spectral_density(b, b.gamma) == doctest::Approx(b.lambda / std::numbers::pi));
}

TEST_CASE("J(w)/w integrates to lambda") {
    const BathSpec b;
    // Split the range so the peak near gamma is finely resolved.
    auto f = [&](double w) { return w > 0.0 ? spectral_density(b, w) / w : 2.0 * b.lambda / (std::numbers::pi * b.gamma); };
    const double total = oracle::simpson(f, 0.0, 20.0 * b.gamma, 20000) +
                         oracle::simpson(f, 20.0 * b.gamma, 1e4 * b.gamma, 200000);
    CHECK(total == doctest::Approx(b.lambda).epsilon(1e-3));
}

TEST_CASE("mean phonon energy at room temperature") {
    const BathSpec b;
    const double e = mean_phonon_energy(b);
    CHECK(e >= 62.0);
    CHECK(e <= 66.0);

    BathSpec strong = b;
    strong.lambda = 350.0;
    CHECK(mean_phonon_energy(strong) == doctest::Approx(e).epsilon(1e-9));
}

TEST_CASE("mean phonon energy matches a trapezoid oracle at 150 K") {
    BathSpec b;
    b.temperature = 150.0;
    CHECK(mean_phonon_energy(b) == doctest::Approx(trapezoid_mean_energy(b)).epsilon(5e-3));
}

TEST_CASE("mean phonon energy increases with temperature") {
    double prev = 0.0;
    for (double t : {100.0, 200.0, 298.0, 400.0}) {
        BathSpec b;
        b.temperature = t;
        const double e = mean_phonon_energy(b);
        CHECK(e > prev);
        prev = e;
    }
}

TEST_CASE("invalid baths are rejected") {
    BathSpec b;
    b.lambda = -1.0;
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b = BathSpec{};
    b.gamma = 0.0;
    CHECK_THROWS_AS(b.validate(), ConfigError);
    b = BathSpec{};
    b.temperature = 0.0;
    CHECK_THROWS_AS(b.validate(), ConfigError);
}
