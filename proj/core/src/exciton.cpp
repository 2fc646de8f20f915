#include "chromonet/exciton.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "chromonet/errors.hpp"

namespace chromonet {

ExcitonHamiltonian build_hamiltonian(const Configuration& config, const CouplingModel& model) {
    config.validate();
    ExcitonHamiltonian h{coupling_matrix(config, model)};
    for (std::size_t i = 0; i < config.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        h.matrix(k, k) = config.chromophores[i].site_energy;
    }
    return h;
}

void check_symmetric(const ExcitonHamiltonian& h) {
    if (h.matrix.rows() == 0 || h.matrix.rows() != h.matrix.cols())
        throw ConfigError("Hamiltonian must be a non-empty square matrix");
    if (h.matrix != h.matrix.transpose()) throw ConfigError("Hamiltonian is not symmetric");
}

SpectralDescriptors spectral_descriptors(const ExcitonHamiltonian& h, std::size_t trap_index) {
    check_symmetric(h);
    if (trap_index >= h.size()) throw ConfigError("trap index out of range");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.matrix);
    if (solver.info() != Eigen::Success) throw SolverError("exciton diagonalization failed");

    SpectralDescriptors out;
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();

    const Eigen::Index n = out.eigenvalues.size();
    const auto trap = static_cast<Eigen::Index>(trap_index);

    // Trap weight summed over the (possibly degenerate) lowest level.
    Eigen::Index k = 0;
    double weight = 0.0;
    while (k < n && out.eigenvalues(k) - out.eigenvalues(0) <= kDegeneracyTolerance) {
        const double a = out.eigenvectors(trap, k);
        weight += a * a;
        ++k;
    }
    out.ground_degenerate = k > 1;
    out.ground_trap_overlap = std::min(1.0, weight);

    if (n > 1) {
        const Eigen::VectorXd gaps = out.eigenvalues.tail(n - 1) - out.eigenvalues.head(n - 1);
        out.mean_gap = gaps.mean();
        out.gap_std = std::sqrt((gaps.array() - out.mean_gap).square().mean());
    }
    return out;
}

}  // namespace chromonet
