#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "chromonet/errors.hpp"
#include "chromonet/geometry.hpp"
#include "chromonet/liouville.hpp"
#include "chromonet/tc2solver.hpp"
#include "chromonet/units.hpp"
#include "oracles.hpp"

using namespace chromonet;
using cd = std::complex<double>;

namespace {

constexpr cd kI{0.0, 1.0};

Eigen::MatrixXcd random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::MatrixXcd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = cd(g(rng), g(rng));
    return a + a.adjoint();
}

struct Instance {
    Configuration config;
    ExcitonHamiltonian h;
    SinkSpec sinks;
};

Instance instance(std::size_t n, double d, std::uint64_t seed) {
    Instance in;
    in.config = sample_configuration(n, d, 500.0, seed);
    in.h = build_hamiltonian(in.config, CouplingModel{});
    in.sinks = SinkSpec{1e-3, 1.0, in.config.trap_index};
    return in;
}

BathSpec bath_with(double lambda) {
    BathSpec b;
    b.lambda = lambda;
    return b;
}

}  // namespace

TEST_CASE("sinks-only generator is diagonal in the site-pair basis") {
    ExcitonHamiltonian h{Eigen::MatrixXd::Zero(3, 3)};
    const SinkSpec sinks{0.1, 1.0, 2};
    const auto l = build_generator(h, sinks).matrix;
    const double r[3] = {0.1, 0.1, 1.1};
    for (Eigen::Index k = 0; k < 3; ++k)
        for (Eigen::Index j = 0; j < 3; ++j) {
            const Eigen::Index idx = j + 3 * k;  // E_jk, column-major
            CHECK(l(idx, idx).real() == doctest::Approx(-(r[j] + r[k])));
            CHECK(l(idx, idx).imag() == 0.0);
        }
    Eigen::MatrixXcd off = l;
    off.diagonal().setZero();
    CHECK(off.isZero(0.0));
}

TEST_CASE("coherent part is traceless on Hermitian input") {
    const auto in = instance(5, 30.0, 8);
    const auto l = coherent_generator(in.h);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        const Eigen::MatrixXcd rho = random_hermitian(5, rng);
        CHECK(std::abs(l.apply(rho).trace()) < 1e-9);
    }
    CHECK((l.matrix + l.matrix.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("full generator and kernel preserve Hermiticity") {
    const auto in = instance(5, 30.0, 9);
    const auto l = build_generator(in.h, in.sinks);
    const auto k = memory_kernel(in.h, bath_with(35.0), 0.0);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
        const Eigen::MatrixXcd rho = random_hermitian(5, rng);
        const Eigen::MatrixXcd a = l.apply(rho);
        const Eigen::MatrixXcd b = k.apply(rho);
        CHECK((a - a.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((b - b.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(std::abs(b.trace()) < 1e-9);
    }
}

TEST_CASE("single site decays at twice the total rate") {
    ExcitonHamiltonian h{Eigen::MatrixXd::Constant(1, 1, 0.0)};
    const SinkSpec sinks{1e-3, 1.0, 0};
    CHECK(build_generator(h, sinks).matrix(0, 0).real() == doctest::Approx(-2.0 * 1.001));

    TimeDomainOptions opt;
    opt.t_max = 3.0;
    opt.rel_tol = 1e-10;
    opt.output_times = {0.0, 0.5, 1.0, 2.0, 3.0};
    const auto p = propagate_time_domain(h, bath_with(0.0), sinks, 0, opt);
    REQUIRE(p.trajectory.times.size() == 5);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(std::abs(p.trajectory.trace[i] - std::exp(-2.002 * p.trajectory.times[i])) < 1e-9);
}

TEST_CASE("kernel vanishes without a bath") {
    const auto in = instance(4, 30.0, 3);
    CHECK(memory_kernel(in.h, bath_with(0.0), 0.0).matrix.isZero(0.0));
    CHECK_THROWS_AS(memory_kernel(in.h, bath_with(35.0), -1.0), ConfigError);
}

TEST_CASE("K(0) matches direct quadrature of the memory integral") {
    const auto in = instance(3, 20.0, 17);
    const BathSpec bath = bath_with(35.0);
    const cd c = correlation_amplitude(bath) * units::kWavenumberToRadPerPs * units::kWavenumberToRadPerPs;
    const double gamma = units::to_angular(bath.gamma);
    const Eigen::MatrixXcd hw = (in.h.matrix * units::kWavenumberToRadPerPs).cast<cd>();

    std::mt19937_64 rng(5);
    const Eigen::MatrixXcd rho = random_hermitian(3, rng);

    // Phi_j rho = int_0^T c e^{-gamma t} U(t) S_j rho U(t)^dagger dt, U(t) = exp(-i H t),
    // by composite Simpson on a uniform grid with U advanced by a fixed step propagator.
    const int panels = 40000;
    const double t_end = 40.0 / gamma;
    const double dt = t_end / panels;
    const Eigen::MatrixXcd step = (-kI * hw * dt).exp();
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(3, 3);
    std::vector<Eigen::MatrixXcd> phi(3, Eigen::MatrixXcd::Zero(3, 3));
    for (int i = 0; i <= panels; ++i) {
        const double t = i * dt;
        const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        for (int j = 0; j < 3; ++j) {
            Eigen::MatrixXcd sj_rho = Eigen::MatrixXcd::Zero(3, 3);
            sj_rho.row(j) = rho.row(j);
            phi[static_cast<std::size_t>(j)] += (w * dt / 3.0) * c * std::exp(-gamma * t) * (u * sj_rho * u.adjoint());
        }
        u = step * u;
    }
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(3, 3);
    for (int j = 0; j < 3; ++j) {
        const Eigen::MatrixXcd x = phi[static_cast<std::size_t>(j)] - phi[static_cast<std::size_t>(j)].adjoint();
        Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(3, 3);
        s(j, j) = 1.0;
        expected += s * x - x * s;
    }
    const Eigen::MatrixXcd got = memory_kernel(in.h, bath, 0.0).apply(rho);
    CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("closed-form trapping limits") {
    ExcitonHamiltonian single{Eigen::MatrixXd::Zero(1, 1)};
    const auto r = ete_laplace(single, bath_with(0.0), SinkSpec{1e-3, 1.0, 0}, 0);
    CHECK(std::abs(r.eta - 0.999001) < 1e-6);
    CHECK(std::abs(r.eta - 1.0 / 1.001) < 1e-9);

    ExcitonHamiltonian uncoupled{Eigen::Vector3d(-20.0, 30.0, 5.0).asDiagonal()};
    const SinkSpec sinks{1e-3, 1.0, 2};
    CHECK(std::abs(ete_laplace(uncoupled, bath_with(35.0), sinks, 2).eta - 1.0 / 1.001) < 1e-9);
    const auto none = ete_laplace(uncoupled, bath_with(35.0), sinks, 0);
    CHECK(std::abs(none.eta) < 1e-12);
    CHECK(none.eta_loss == doctest::Approx(1.0));
}

TEST_CASE("laplace preconditions") {
    ExcitonHamiltonian single{Eigen::MatrixXd::Zero(1, 1)};
    CHECK_THROWS_AS(ete_laplace(single, bath_with(0.0), SinkSpec{0.0, 1.0, 0}, 0), ConfigError);
    CHECK_THROWS_AS(ete_laplace(single, bath_with(0.0), SinkSpec{1e-3, 1.0, 0}, 1), ConfigError);
    CHECK_THROWS_AS(ete_laplace(single, bath_with(0.0), SinkSpec{1e-3, 0.0, 0}, 0), ConfigError);
}

TEST_CASE("eta and loss add up to one") {
    for (double lambda : {0.0, 35.0, 350.0})
        for (double d : {30.0, 60.0, 100.0})
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                const auto in = instance(7, d, seed);
                const auto r = ete_laplace(in.h, bath_with(lambda), in.sinks, 0);
                CHECK(std::abs(r.eta_raw + r.eta_loss - 1.0) < 1e-6);
                CHECK(r.residual < 1e-8);
                CHECK(r.method == SolverMethod::laplace);
                CHECK(r.positivity_violation == (r.eta_raw < -kPositivitySlack || r.eta_raw > 1.0 + kPositivitySlack));
            }
}

TEST_CASE("without a bath the time domain follows the damped wavefunction") {
    const auto in = instance(6, 40.0, 21);
    TimeDomainOptions opt;
    opt.t_max = 20.0;
    opt.rel_tol = 1e-11;
    opt.abs_tol = 1e-13;
    opt.output_times.clear();
    for (int i = 0; i <= 40; ++i) opt.output_times.push_back(0.5 * i);
    const auto p = propagate_time_domain(in.h, bath_with(0.0), in.sinks, 0, opt);

    Eigen::MatrixXcd heff = (in.h.matrix * units::kWavenumberToRadPerPs).cast<cd>();
    for (Eigen::Index j = 0; j < heff.rows(); ++j) heff(j, j) -= kI * in.sinks.r_loss;
    heff(static_cast<Eigen::Index>(in.sinks.trap_index), static_cast<Eigen::Index>(in.sinks.trap_index)) -= kI * in.sinks.r_trap;

    REQUIRE(p.trajectory.times.size() == opt.output_times.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < p.trajectory.times.size(); ++k) {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(6);
        psi(0) = 1.0;
        psi = (-kI * heff * p.trajectory.times[k]).exp() * psi;
        for (Eigen::Index j = 0; j < 6; ++j)
            worst = std::max(worst, std::abs(p.trajectory.rho[k](j, j).real() - std::norm(psi(j))));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("a vanishing bath on the stiff path reproduces the wavefunction too") {
    const auto in = instance(4, 40.0, 4);
    TimeDomainOptions opt;
    opt.t_max = 4.0;
    opt.rel_tol = 1e-11;
    opt.abs_tol = 1e-13;
    opt.output_times = {1.0, 2.0, 3.0, 4.0};
    const auto p = propagate_time_domain(in.h, bath_with(1e-12), in.sinks, 0, opt);

    Eigen::MatrixXcd heff = (in.h.matrix * units::kWavenumberToRadPerPs).cast<cd>();
    for (Eigen::Index j = 0; j < heff.rows(); ++j) heff(j, j) -= kI * in.sinks.r_loss;
    heff(3, 3) -= kI * in.sinks.r_trap;
    for (std::size_t k = 0; k < p.trajectory.times.size(); ++k) {
        Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
        psi(0) = 1.0;
        psi = (-kI * heff * p.trajectory.times[k]).exp() * psi;
        for (Eigen::Index j = 0; j < 4; ++j) CHECK(std::abs(p.trajectory.rho[k](j, j).real() - std::norm(psi(j))) < 1e-8);
    }
}

TEST_CASE("symmetric dimer shows damped Rabi oscillation") {
    const double j_cm = 100.0;
    ExcitonHamiltonian h{Eigen::Matrix2d()};
    h.matrix << 0.0, j_cm, j_cm, 0.0;
    const double r = 0.5;
    const SinkSpec sinks{0.0, r, 1};
    TimeDomainOptions opt;
    opt.t_max = 10.0;
    opt.rel_tol = 1e-11;
    opt.abs_tol = 1e-13;
    opt.output_times.clear();
    for (int i = 0; i <= 200; ++i) opt.output_times.push_back(0.05 * i);
    const auto p = propagate_time_domain(h, bath_with(0.0), sinks, 0, opt);

    const double jw = units::to_angular(j_cm);
    const double omega = std::sqrt(4.0 * jw * jw - r * r);
    for (std::size_t k = 0; k < p.trajectory.times.size(); ++k) {
        const double t = p.trajectory.times[k];
        const double s = std::sin(0.5 * omega * t);
        const double expected = std::exp(-r * t) * 4.0 * jw * jw / (omega * omega) * s * s;
        CHECK(std::abs(p.trajectory.rho[k](1, 1).real() - expected) < 1e-8);
    }
}

TEST_CASE("trace is non-increasing and rho stays Hermitian at lambda 35, d 100") {
    const BathSpec bath = bath_with(35.0);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto in = instance(7, 100.0, seed);
        const auto p = propagate_time_domain(in.h, bath, in.sinks, 0);
        REQUIRE(p.trajectory.trace.size() >= 2);
        for (std::size_t k = 1; k < p.trajectory.trace.size(); ++k)
            CHECK(p.trajectory.trace[k] <= p.trajectory.trace[k - 1] + 1e-12);
        for (const auto& rho : p.trajectory.rho) CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("laplace and time domain agree at d 60, lambda 35") {
    const BathSpec bath = bath_with(35.0);
    for (std::uint64_t seed : {2u, 3u, 4u, 5u, 6u}) {
        const auto in = instance(7, 60.0, seed);
        const auto l = ete_laplace(in.h, bath, in.sinks, 0);
        const auto t = propagate_time_domain(in.h, bath, in.sinks, 0);
        CHECK(std::abs(l.eta - t.transport.eta) <= 1e-3);
        CHECK(t.transport.method == SolverMethod::time_domain);
        CHECK(std::abs(t.transport.eta_raw + t.transport.eta_loss + t.transport.residual - 1.0) < 1e-6);
    }
}

TEST_CASE("growing TC2 modes surface as divergence") {
    const auto in = instance(7, 30.0, 7);
    CHECK_THROWS_AS(propagate_time_domain(in.h, bath_with(35.0), in.sinks, 0), SolverError);
}

TEST_CASE("eta is invariant under energy shifts and relabeling of intermediates") {
    for (double lambda : {0.0, 35.0, 350.0}) {
        const BathSpec bath = bath_with(lambda);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto in = instance(7, 50.0, seed);
            const double eta = ete_laplace(in.h, bath, in.sinks, 0).eta_raw;

            ExcitonHamiltonian shifted{in.h.matrix + 777.0 * Eigen::MatrixXd::Identity(7, 7)};
            CHECK(std::abs(ete_laplace(shifted, bath, in.sinks, 0).eta_raw - eta) < 1e-9);

            std::vector<int> perm{0, 4, 2, 5, 1, 3, 6};
            Eigen::PermutationMatrix<Eigen::Dynamic> p(Eigen::VectorXi::Map(perm.data(), 7));
            ExcitonHamiltonian relabeled{p * in.h.matrix * p.transpose()};
            CHECK(std::abs(ete_laplace(relabeled, bath, in.sinks, 0).eta_raw - eta) < 1e-9);
        }
    }
}

TEST_CASE("time-domain preconditions and solver names") {
    ExcitonHamiltonian single{Eigen::MatrixXd::Zero(1, 1)};
    TimeDomainOptions opt;
    opt.t_max = 0.0;
    CHECK_THROWS_AS(propagate_time_domain(single, bath_with(0.0), SinkSpec{1e-3, 1.0, 0}, 0, opt), ConfigError);
    CHECK(parse_solver_method("laplace") == SolverMethod::laplace);
    CHECK(parse_solver_method("time") == SolverMethod::time_domain);
    CHECK(to_string(SolverMethod::time_domain) == "time");
    CHECK_THROWS_AS(parse_solver_method("euler"), ConfigError);
}
