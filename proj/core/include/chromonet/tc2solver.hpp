#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "chromonet/bath.hpp"
#include "chromonet/exciton.hpp"

namespace chromonet {

// Anti-commutator sinks: -r_loss sum_j {|j><j|, .} - r_trap {|trap><trap|, .}.
// Rates are in ps^-1; a population decays at twice the listed rate.
struct SinkSpec {
    double r_loss{1e-3};
    double r_trap{1.0};
    std::size_t trap_index{0};

    void validate(std::size_t n_sites) const;
};

// Superoperator on column-vectorized N x N density matrices, in ps^-1.
struct LiouvilleOperator {
    Eigen::MatrixXcd matrix;

    Eigen::Index sites() const;
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;
};

enum class SolverMethod { laplace, time_domain };

std::string_view to_string(SolverMethod m) noexcept;
SolverMethod parse_solver_method(std::string_view name);

struct TransportResult {
    double eta{0.0};       // trapping efficiency, clamped to [0, 1]
    double eta_raw{0.0};   // before clamping
    double eta_loss{0.0};  // probability lost to the per-site sinks
    double residual{0.0};  // linear-system residual (laplace) or final trace (time domain)
    SolverMethod method{SolverMethod::laplace};
    double wall_time{0.0};  // seconds
    // Set when eta_raw falls outside [-1e-6, 1 + 1e-6]; TC2 does not preserve positivity.
    bool positivity_violation{false};
};

inline constexpr double kPositivitySlack = 1e-6;

// Local part L_S + L_e-h of the master equation, with energies converted to rad/ps.
LiouvilleOperator build_generator(const ExcitonHamiltonian& h, const SinkSpec& sinks);

// Coherent part only: X -> -i [H, X].
LiouvilleOperator coherent_generator(const ExcitonHamiltonian& h);

// Laplace transform at real s >= 0 of the TC2 memory term, so that on Hermitian rho
//   K(s) rho = sum_j [S_j, Phi_j rho - (Phi_j rho)^dagger],
//   Phi_j X = c ((s + gamma) - L_S)^-1 (S_j X),
// with S_j = |j><j| and c the bath correlation amplitude in rad^2/ps^2.
// Throws SolverError if the resolvent's condition number exceeds 1e12.
LiouvilleOperator memory_kernel(const ExcitonHamiltonian& h, const BathSpec& bath, double s);

// Efficiency from the time-integrated density matrix Sigma = int_0^inf rho dt,
// obtained from (L_S + L_e-h - K(0)) vec(Sigma) = -vec(rho(0)).
TransportResult ete_laplace(const ExcitonHamiltonian& h, const BathSpec& bath,
                            const SinkSpec& sinks, std::size_t initial_index);

struct TimeDomainOptions {
    double t_max{1.0e4};        // ps
    double rel_tol{1e-8};
    double abs_tol{1e-12};
    double trace_floor{1e-8};   // stop once tr rho drops below this
    double initial_step{1e-3};  // ps
    double min_step{1e-12};     // ps; smaller accepted steps count as underflow
    double divergence_limit{1e3};  // |tr rho| above this is reported as divergence
    // Sample times for the stored trajectory; empty means 50 points on [0, t_max].
    std::vector<double> output_times;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::MatrixXcd> rho;  // site basis
    std::vector<double> trace;
};

struct Propagation {
    Trajectory trajectory;
    TransportResult transport;
    double t_final{0.0};
    std::size_t steps{0};
};

// Direct integration of the TC2 equation. The exponential kernel makes the
// memory term exact through auxiliary operators
//   rho'     = (L_S + L_e-h) rho - sum_j [S_j, sigma_j - sigma_j^dagger]
//   sigma_j' = c S_j rho + (L_S - gamma) sigma_j,    sigma_j(0) = 0,
// integrated with the L-stable 3-stage Radau IIA scheme (order 5) and
// step-doubling error control; dephasing makes the system stiff. The trapped
// and lost yields are carried as extra state components so they share the
// step control. Without a bath the system is oscillatory rather than stiff and
// is integrated with dopri5 in the frame rotating with L_S instead.
// Requires Hermitian rho(0), which a site population is.
Propagation propagate_time_domain(const ExcitonHamiltonian& h, const BathSpec& bath,
                                  const SinkSpec& sinks, std::size_t initial_index,
                                  const TimeDomainOptions& options = {});

}  // namespace chromonet
