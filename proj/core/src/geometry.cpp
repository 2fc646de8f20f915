#include "chromonet/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "chromonet/errors.hpp"
#include "chromonet/rng.hpp"

namespace chromonet {

namespace {

Vec3 random_unit_vector(Rng& rng) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {rho * std::cos(phi), rho * std::sin(phi), z};
}

bool far_enough(const Vec3& candidate, const std::vector<Chromophore>& placed) {
    for (const auto& c : placed) {
        if ((candidate - c.position).norm() < kMinSiteDistance) return false;
    }
    return true;
}

}  // namespace

void Configuration::validate() const {
    const std::size_t n = chromophores.size();
    if (n < 2) throw ConfigError("configuration needs at least two chromophores");
    if (initial_index >= n || trap_index >= n)
        throw ConfigError("initial/trap index out of range");
    if (initial_index == trap_index) throw ConfigError("initial and trap sites coincide");
    if (!(diameter > 0.0)) throw ConfigError("diameter must be positive");

    const double r_max = radius() * (1.0 + 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = chromophores[i];
        if (std::abs(c.dipole_dir.norm() - 1.0) > 1e-12)
            throw ConfigError("dipole direction of site " + std::to_string(i) + " is not a unit vector");
        if (c.position.norm() > r_max)
            throw ConfigError("site " + std::to_string(i) + " lies outside the bounding sphere");
        for (std::size_t k = i + 1; k < n; ++k) {
            if ((c.position - chromophores[k].position).norm() < kMinSiteDistance)
                throw ConfigError("sites " + std::to_string(i) + " and " + std::to_string(k) +
                                  " violate the minimum distance");
        }
    }
}

Configuration sample_configuration(std::size_t n, double diameter, double energy_window,
                                   std::uint64_t seed) {
    if (n < 2) throw ConfigError("need n >= 2 chromophores");
    if (!(diameter >= 2.0 * kMinSiteDistance))
        throw ConfigError("diameter must be at least 10 A so the poles respect the minimum distance");
    if (!(energy_window >= 0.0)) throw ConfigError("energy window must be non-negative");

    Rng rng(seed);
    const double radius = 0.5 * diameter;

    Configuration config;
    config.diameter = diameter;
    config.seed = seed;
    config.initial_index = 0;
    config.trap_index = n - 1;
    config.chromophores.resize(n);
    config.chromophores.front().position = Vec3(0.0, 0.0, radius);
    config.chromophores.back().position = Vec3(0.0, 0.0, -radius);

    // Poles first, then each interior site is placed against everything already placed.
    std::vector<Chromophore> placed{config.chromophores.front(), config.chromophores.back()};
    placed.reserve(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        std::size_t rejections = 0;
        Vec3 candidate;
        for (;;) {
            candidate = Vec3(rng.uniform(-radius, radius), rng.uniform(-radius, radius),
                             rng.uniform(-radius, radius));
            if (candidate.squaredNorm() <= radius * radius && far_enough(candidate, placed)) break;
            if (++rejections >= kMaxConsecutiveRejections)
                throw PackingInfeasible("packing infeasible: could not place site " + std::to_string(i) +
                                        " of " + std::to_string(n) + " in a " +
                                        std::to_string(diameter) + " A sphere");
        }
        config.chromophores[i].position = candidate;
        placed.push_back(config.chromophores[i]);
    }

    for (auto& c : config.chromophores) {
        c.dipole_dir = random_unit_vector(rng);
        c.site_energy = rng.uniform(-0.5 * energy_window, 0.5 * energy_window);
    }
    return config;
}

double orientation_factor(const Vec3& dipole_a, const Vec3& dipole_b, const Vec3& r_hat) noexcept {
    return dipole_a.dot(dipole_b) - 3.0 * dipole_a.dot(r_hat) * dipole_b.dot(r_hat);
}

double dipole_coupling(const Chromophore& a, const Chromophore& b, const CouplingModel& model) {
    const Vec3 sep = b.position - a.position;
    const double r = sep.norm();
    if (r < kMinSiteDistance)
        throw ConfigError("dipole-dipole coupling requested below the 5 A validity floor (r = " +
                          std::to_string(r) + " A)");
    const Vec3 r_hat = sep / r;
    return model.dipole_strength_constant * orientation_factor(a.dipole_dir, b.dipole_dir, r_hat) /
           (r * r * r);
}

Eigen::MatrixXd coupling_matrix(const Configuration& config, const CouplingModel& model) {
    if (!(model.dipole_strength_constant > 0.0))
        throw ConfigError("dipole strength constant must be positive");
    const auto n = static_cast<Eigen::Index>(config.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = i + 1; k < n; ++k) {
            const double v = dipole_coupling(config.chromophores[i], config.chromophores[k], model);
            J(i, k) = v;
            J(k, i) = v;
        }
    }
    return J;
}

void to_json(nlohmann::json& j, const Configuration& config) {
    nlohmann::json sites = nlohmann::json::array();
    for (const auto& c : config.chromophores) {
        sites.push_back({{"pos", {c.position.x(), c.position.y(), c.position.z()}},
                         {"dipole", {c.dipole_dir.x(), c.dipole_dir.y(), c.dipole_dir.z()}},
                         {"energy", c.site_energy}});
    }
    j = nlohmann::json{{"seed", config.seed},
                       {"diameter", config.diameter},
                       {"sites", std::move(sites)},
                       {"initial", config.initial_index},
                       {"trap", config.trap_index}};
}

void from_json(const nlohmann::json& j, Configuration& config) {
    auto read_vec = [](const nlohmann::json& a) {
        if (!a.is_array() || a.size() != 3) throw ConfigError("expected a 3-vector");
        return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
    };
    try {
        config.seed = j.at("seed").get<std::uint64_t>();
        config.diameter = j.at("diameter").get<double>();
        config.initial_index = j.at("initial").get<std::size_t>();
        config.trap_index = j.at("trap").get<std::size_t>();
        config.chromophores.clear();
        for (const auto& s : j.at("sites")) {
            Chromophore c;
            c.position = read_vec(s.at("pos"));
            c.dipole_dir = read_vec(s.at("dipole"));
            c.site_energy = s.at("energy").get<double>();
            config.chromophores.push_back(c);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed configuration JSON: ") + e.what());
    }
}

}  // namespace chromonet
