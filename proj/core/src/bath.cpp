#include "chromonet/bath.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "chromonet/errors.hpp"
#include "chromonet/units.hpp"

namespace chromonet {

void BathSpec::validate() const {
    if (!(lambda >= 0.0)) throw ConfigError("reorganization energy must be >= 0");
    if (!(gamma > 0.0)) throw ConfigError("bath cutoff gamma must be > 0");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
}

std::complex<double> correlation_amplitude(const BathSpec& bath) {
    bath.validate();
    const double kt = units::thermal_energy(bath.temperature);
    return bath.lambda * std::complex<double>(2.0 * kt, -bath.gamma);
}

double spectral_density(const BathSpec& bath, double omega) {
    bath.validate();
    if (!(omega >= 0.0)) throw ConfigError("spectral density needs omega >= 0");
    return (2.0 / std::numbers::pi) * bath.lambda * bath.gamma * omega /
           (omega * omega + bath.gamma * bath.gamma);
}

double mean_phonon_energy(const BathSpec& bath, double rel_tol) {
    bath.validate();
    const double g = bath.gamma;
    const double kt = units::thermal_energy(bath.temperature);
    const double beta = 1.0 / kt;

    // lambda and the 2/pi prefactor cancel in the ratio.
    auto shape = [g](double w) { return g * w / (w * w + g * g); };
    auto bose = [beta](double w) { return 1.0 / std::expm1(beta * w); };
    auto numerator = [&](double w) { return shape(w) * w * bose(w); };
    auto denominator = [&](double w) { return shape(w) * bose(w); };

    // int_W^inf n(w) dw = -log(1 - exp(-beta W)) / beta; shape*w <= g and shape <= g/W there.
    auto bose_tail = [beta](double w) { return -std::log1p(-std::exp(-beta * w)) / beta; };

    using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double lo = 1e-6 * g;
    double hi = g + 10.0 * kt;

    for (int attempt = 0; attempt < 64; ++attempt, hi *= 2.0) {
        double num_err = 0.0, den_err = 0.0;
        const double num = Quad::integrate(numerator, lo, hi, 30, rel_tol, &num_err);
        const double den = Quad::integrate(denominator, lo, hi, 30, rel_tol, &den_err);
        const double num_tail = g * bose_tail(hi);
        const double den_tail = g / hi * bose_tail(hi);
        if (num_tail > 1e-6 * num || den_tail > 1e-6 * den) continue;

        const double achieved = std::max(num_err / std::abs(num), den_err / std::abs(den));
        if (!(achieved <= 10.0 * rel_tol) || !std::isfinite(num) || !std::isfinite(den)) {
            std::ostringstream msg;
            msg << "mean phonon energy quadrature did not converge (achieved relative error "
                << achieved << ", requested " << rel_tol << ")";
            throw SolverError(msg.str());
        }
        return num / den;
    }
    throw SolverError("mean phonon energy: could not bound the quadrature tail");
}

}  // namespace chromonet
