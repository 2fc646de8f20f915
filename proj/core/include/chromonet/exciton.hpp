#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "chromonet/geometry.hpp"

namespace chromonet {

// Single-excitation Frenkel Hamiltonian in the site basis (cm^-1).
struct ExcitonHamiltonian {
    Eigen::MatrixXd matrix;

    std::size_t size() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
};

struct SpectralDescriptors {
    Eigen::VectorXd eigenvalues;   // ascending, cm^-1
    Eigen::MatrixXd eigenvectors;  // columns match eigenvalues
    double ground_trap_overlap{0.0};
    double mean_gap{0.0};  // mean adjacent level spacing
    double gap_std{0.0};   // population std of adjacent spacings
    bool ground_degenerate{false};
};

// Ground-state degeneracy tolerance (cm^-1).
inline constexpr double kDegeneracyTolerance = 1e-9;

// Site energies on the diagonal, point-dipole couplings off it.
ExcitonHamiltonian build_hamiltonian(const Configuration& config, const CouplingModel& model);

// Throws ConfigError if h is not square and exactly symmetric.
void check_symmetric(const ExcitonHamiltonian& h);

// Eigen-decomposition plus the level-spacing and trap-overlap statistics. When
// the lowest level is degenerate the overlap is the largest trap weight reachable
// inside that subspace, and ground_degenerate is set.
SpectralDescriptors spectral_descriptors(const ExcitonHamiltonian& h, std::size_t trap_index);

}  // namespace chromonet
