#pragma once

#include <complex>

namespace chromonet {

// Drude-Lorentz bath, one independent copy per site.
struct BathSpec {
    double lambda{35.0};        // reorganization energy, cm^-1
    double gamma{50.0};         // cutoff / phonon relaxation rate, cm^-1
    double temperature{298.0};  // K

    void validate() const;
};

// Amplitude c of the high-temperature correlation C(t) = c exp(-gamma |t|):
// c = lambda (2 k_B T - i gamma), in cm^-2.
std::complex<double> correlation_amplitude(const BathSpec& bath);

// J(w) = (2/pi) lambda gamma w / (w^2 + gamma^2), cm^-1. With this normalization
// the integral of J(w)/w over (0, inf) equals lambda.
double spectral_density(const BathSpec& bath, double omega);

// Bose-weighted mean phonon energy
//   int J(w) w n(w) dw / int J(w) n(w) dw,  n(w) = 1 / (exp(w / k_B T) - 1),
// by adaptive Gauss-Kronrod on [1e-6 gamma, w_max], w_max grown until the
// analytic tail bound is below 1e-6 of each integral. Independent of lambda.
// Throws SolverError if the quadrature misses rel_tol.
double mean_phonon_energy(const BathSpec& bath, double rel_tol = 1e-10);

}  // namespace chromonet
