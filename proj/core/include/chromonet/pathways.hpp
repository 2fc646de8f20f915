#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "chromonet/exciton.hpp"
#include "chromonet/geometry.hpp"

namespace chromonet {

// Ordered intermediate sites visited between the initial and trap sites.
struct Path {
    std::vector<std::size_t> intermediates;
    double strength{0.0};  // cm^-1; zero until scored
};

// Largest site count whose paths are enumerated by default (109601 paths).
inline constexpr std::size_t kDefaultPathSiteCeiling = 10;

// Sum over k = 0..n-2 of (n-2)! / (n-2-k)!.
std::uint64_t path_count(std::size_t n);

// All ordered selections of k = 0..n-2 distinct intermediates drawn from the
// sites other than initial/trap, shortest first. Results are memoized per
// (n, initial, trap). Throws ConfigError when n exceeds ceiling.
std::shared_ptr<const std::vector<Path>> enumerate_paths(std::size_t n, std::size_t initial,
                                                         std::size_t trap,
                                                         std::size_t ceiling = kDefaultPathSiteCeiling);

// Convenience overload with initial = 0 and trap = n - 1.
std::shared_ptr<const std::vector<Path>> enumerate_paths(std::size_t n,
                                                         std::size_t ceiling = kDefaultPathSiteCeiling);

// 1/h = sum of 1/|H| over consecutive links; the direct path is |H[initial][trap]|.
// A zero coupling anywhere on the path gives strength 0.
double path_strength(const Path& path, const ExcitonHamiltonian& h, std::size_t initial,
                     std::size_t trap);

// Strength of every path, in enumerate_paths order, computed by depth-first
// accumulation of the inverse-coupling sums.
std::vector<double> all_path_strengths(const ExcitonHamiltonian& h, std::size_t initial,
                                       std::size_t trap,
                                       std::size_t ceiling = kDefaultPathSiteCeiling);

inline constexpr double kDominantPathThreshold = 1000.0;  // cm^-1

std::size_t dominant_path_count(const ExcitonHamiltonian& h, std::size_t initial, std::size_t trap,
                                double threshold = kDominantPathThreshold,
                                std::size_t ceiling = kDefaultPathSiteCeiling);

// Mean distance of the intermediate (non-pole) sites from the pole axis.
double z_axis_proximity(const Configuration& config);

struct PathHistogram {
    std::vector<double> edges;          // bins + 1 edges on [0, upper]
    std::vector<std::uint64_t> counts;  // last bin also collects values >= upper
};

struct PathSummary {
    double max_strength{0.0};
    std::size_t count_over_threshold{0};
    PathHistogram histogram;
};

PathSummary summarize_paths(const std::vector<double>& strengths, double threshold,
                            std::size_t bins, double upper);

}  // namespace chromonet
