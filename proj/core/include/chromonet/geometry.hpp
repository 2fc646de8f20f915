#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace chromonet {

using Vec3 = Eigen::Vector3d;

// Nearest-neighbour floor (angstrom); below it the point-dipole model is not trusted.
inline constexpr double kMinSiteDistance = 5.0;

// Consecutive rejected candidates tolerated while placing one interior site.
inline constexpr std::size_t kMaxConsecutiveRejections = 1'000'000;

struct Chromophore {
    Vec3 position{Vec3::Zero()};   // angstrom
    Vec3 dipole_dir{Vec3::UnitZ()};  // unit vector
    double site_energy{0.0};       // cm^-1
};

struct Configuration {
    std::vector<Chromophore> chromophores;
    double diameter{0.0};  // angstrom
    std::size_t initial_index{0};
    std::size_t trap_index{0};
    std::uint64_t seed{0};

    std::size_t size() const noexcept { return chromophores.size(); }
    double radius() const noexcept { return 0.5 * diameter; }

    // Checks every structural invariant; throws ConfigError on the first violation.
    void validate() const;
};

struct CouplingModel {
    // Prefactor C in J = C * kappa / r^3, in cm^-1 * angstrom^3.
    double dipole_strength_constant{134000.0};
};

// Random complex of n sites in a sphere of the given diameter. The initial site
// sits at the north pole (index 0), the trap at the south pole (index n-1), and
// the n-2 interior sites are uniform in the ball subject to the 5 A floor.
// Dipoles are isotropic, site energies uniform in [-window/2, window/2].
Configuration sample_configuration(std::size_t n, double diameter, double energy_window,
                                   std::uint64_t seed);

// Orientation factor mu_a.mu_b - 3 (mu_a.r)(mu_b.r) for unit separation r_hat.
double orientation_factor(const Vec3& dipole_a, const Vec3& dipole_b, const Vec3& r_hat) noexcept;

// Point-dipole coupling in cm^-1. Throws ConfigError when the sites are closer
// than kMinSiteDistance.
double dipole_coupling(const Chromophore& a, const Chromophore& b, const CouplingModel& model);

// Symmetric matrix of pairwise couplings with a zero diagonal.
Eigen::MatrixXd coupling_matrix(const Configuration& config, const CouplingModel& model);

void to_json(nlohmann::json& j, const Configuration& config);
void from_json(const nlohmann::json& j, Configuration& config);

}  // namespace chromonet
