#include <doctest.h>

#include <cmath>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "chromonet/errors.hpp"
#include "chromonet/geometry.hpp"

using namespace chromonet;

namespace {

Chromophore at(const Vec3& pos, const Vec3& dipole) {
    Chromophore c;
    c.position = pos;
    c.dipole_dir = dipole.normalized();
    return c;
}

}  // namespace

TEST_CASE("two sites sit on the poles") {
    const auto cfg = sample_configuration(2, 30.0, 500.0, 99);
    REQUIRE(cfg.size() == 2);
    CHECK(cfg.chromophores[cfg.initial_index].position.isApprox(Vec3(0, 0, 15)));
    CHECK(cfg.chromophores[cfg.trap_index].position.isApprox(Vec3(0, 0, -15)));
    CHECK((cfg.chromophores[0].position - cfg.chromophores[1].position).norm() == doctest::Approx(30.0));
}

TEST_CASE("seed 42 packing respects the distance floor and the sphere") {
    const auto cfg = sample_configuration(7, 30.0, 500.0, 42);
    int pairs = 0;
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        CHECK(cfg.chromophores[i].position.norm() <= 15.0 + 1e-12);
        for (std::size_t j = i + 1; j < cfg.size(); ++j) {
            CHECK((cfg.chromophores[i].position - cfg.chromophores[j].position).norm() >= 5.0);
            ++pairs;
        }
    }
    CHECK(pairs == 21);
}

TEST_CASE("invariants hold over 10^4 samples and interior radius matches the uniform ball") {
    double radius_sum = 0.0;
    std::size_t interior = 0;
    double min_distance = 1e9, max_norm = 0.0;
    for (std::uint64_t s = 0; s < 10000; ++s) {
        const auto cfg = sample_configuration(7, 100.0, 500.0, s);
        for (std::size_t i = 0; i < cfg.size(); ++i) {
            const auto& c = cfg.chromophores[i];
            max_norm = std::max(max_norm, c.position.norm());
            CHECK(std::abs(c.dipole_dir.norm() - 1.0) < 1e-12);
            CHECK(std::abs(c.site_energy) <= 250.0);
            for (std::size_t j = i + 1; j < cfg.size(); ++j)
                min_distance = std::min(min_distance, (c.position - cfg.chromophores[j].position).norm());
            if (i != cfg.initial_index && i != cfg.trap_index) {
                radius_sum += c.position.norm();
                ++interior;
            }
        }
    }
    CHECK(min_distance >= 5.0);
    CHECK(max_norm <= 50.0 + 1e-12);
    CHECK(radius_sum / static_cast<double>(interior) == doctest::Approx(37.5).epsilon(0.5 / 37.5));
}

TEST_CASE("sampling is deterministic in the seed") {
    const nlohmann::json a = sample_configuration(9, 40.0, 500.0, 1234);
    const nlohmann::json b = sample_configuration(9, 40.0, 500.0, 1234);
    const nlohmann::json c = sample_configuration(9, 40.0, 500.0, 1235);
    CHECK(a.dump() == b.dump());
    CHECK(a.dump() != c.dump());
}

TEST_CASE("preconditions are enforced") {
    CHECK_THROWS_AS(sample_configuration(1, 30.0, 500.0, 1), ConfigError);
    CHECK_THROWS_AS(sample_configuration(7, 9.0, 500.0, 1), ConfigError);
    CHECK_THROWS_AS(sample_configuration(7, 30.0, -1.0, 1), ConfigError);
    CHECK_THROWS_AS(sample_configuration(60, 12.0, 500.0, 1), PackingInfeasible);
}

TEST_CASE("coupling examples") {
    const CouplingModel model;
    const auto a = at(Vec3::Zero(), Vec3::UnitZ());
    CHECK(dipole_coupling(a, at(Vec3(10, 0, 0), Vec3::UnitZ()), model) == doctest::Approx(134.0));
    CHECK(orientation_factor(Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitX()) == doctest::Approx(-2.0));
    CHECK(dipole_coupling(at(Vec3::Zero(), Vec3::UnitX()), at(Vec3(10, 0, 0), Vec3::UnitY()), model) == 0.0);
    CHECK_THROWS_AS(dipole_coupling(a, at(Vec3(4.9, 0, 0), Vec3::UnitZ()), model), ConfigError);

    const auto b = at(Vec3(3, -2, 7), Vec3(0.3, 0.5, -0.2));
    const auto c = at(Vec3(-4, 6, 1), Vec3(-0.7, 0.1, 0.4));
    CHECK(dipole_coupling(b, c, model) == dipole_coupling(c, b, model));
    // r^-3 scaling at fixed orientation
    const auto c2 = at(b.position + 2.0 * (c.position - b.position), c.dipole_dir);
    CHECK(dipole_coupling(b, c2, model) == doctest::Approx(dipole_coupling(b, c, model) / 8.0).epsilon(1e-12));
}

TEST_CASE("coupling matrix is symmetric and rotation invariant") {
    const CouplingModel model;
    auto cfg = sample_configuration(7, 30.0, 500.0, 7);
    const Eigen::MatrixXd j0 = coupling_matrix(cfg, model);
    CHECK(j0 == j0.transpose());
    CHECK(j0.diagonal().isZero(0.0));

    const Eigen::Matrix3d rot =
        (Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()) * Eigen::AngleAxisd(-1.9, Vec3::UnitX())).toRotationMatrix();
    for (auto& c : cfg.chromophores) {
        c.position = rot * c.position;
        c.dipole_dir = rot * c.dipole_dir;
    }
    const Eigen::MatrixXd j1 = coupling_matrix(cfg, model);
    for (Eigen::Index i = 0; i < j0.rows(); ++i)
        for (Eigen::Index k = 0; k < j0.cols(); ++k)
            CHECK(std::abs(j1(i, k) - j0(i, k)) <= 1e-9 * std::max(1.0, std::abs(j0(i, k))));
}

TEST_CASE("configuration JSON round-trips losslessly") {
    const auto cfg = sample_configuration(7, 50.0, 500.0, 2024);
    const nlohmann::json j = cfg;
    CHECK(j.contains("seed"));
    CHECK(j.contains("sites"));
    const auto back = j.get<Configuration>();
    REQUIRE(back.size() == cfg.size());
    CHECK(back.seed == cfg.seed);
    CHECK(back.initial_index == cfg.initial_index);
    CHECK(back.trap_index == cfg.trap_index);
    for (std::size_t i = 0; i < cfg.size(); ++i) {
        CHECK(back.chromophores[i].position == cfg.chromophores[i].position);
        CHECK(back.chromophores[i].dipole_dir == cfg.chromophores[i].dipole_dir);
        CHECK(back.chromophores[i].site_energy == cfg.chromophores[i].site_energy);
    }
    CHECK(nlohmann::json(back).dump() == j.dump());
}

TEST_CASE("validate rejects broken configurations") {
    auto cfg = sample_configuration(5, 30.0, 500.0, 3);
    cfg.chromophores[2].position = cfg.chromophores[1].position + Vec3(1, 0, 0);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
