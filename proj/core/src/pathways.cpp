#include "chromonet/pathways.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "chromonet/errors.hpp"

namespace chromonet {

namespace {

std::vector<std::size_t> interior_sites(std::size_t n, std::size_t initial, std::size_t trap) {
    std::vector<std::size_t> sites;
    for (std::size_t i = 0; i < n; ++i)
        if (i != initial && i != trap) sites.push_back(i);
    return sites;
}

void check_endpoints(std::size_t n, std::size_t initial, std::size_t trap, std::size_t ceiling) {
    if (n < 2) throw ConfigError("path enumeration needs n >= 2");
    if (initial >= n || trap >= n || initial == trap) throw ConfigError("invalid initial/trap sites");
    if (n > ceiling)
        throw ConfigError("path enumeration refused for n = " + std::to_string(n) + " (ceiling " +
                          std::to_string(ceiling) + "; " + std::to_string(path_count(n)) + " paths)");
}

// Visits sequences shortest first, matching enumerate_paths order.
template <typename Visit>
void for_each_sequence(const std::vector<std::size_t>& sites, Visit&& visit) {
    std::vector<std::size_t> seq;
    std::vector<bool> used(sites.size(), false);
    for (std::size_t len = 0; len <= sites.size(); ++len) {
        auto rec = [&](auto&& self) -> void {
            if (seq.size() == len) {
                visit(seq);
                return;
            }
            for (std::size_t i = 0; i < sites.size(); ++i) {
                if (used[i]) continue;
                used[i] = true;
                seq.push_back(sites[i]);
                self(self);
                seq.pop_back();
                used[i] = false;
            }
        };
        rec(rec);
    }
}

}  // namespace

std::uint64_t path_count(std::size_t n) {
    if (n < 2) return 0;
    const std::uint64_t m = n - 2;
    std::uint64_t total = 0, term = 1;  // term = m! / (m-k)!
    for (std::uint64_t k = 0; k <= m; ++k) {
        total += term;
        term *= (m - k);
    }
    return total;
}

std::shared_ptr<const std::vector<Path>> enumerate_paths(std::size_t n, std::size_t initial,
                                                         std::size_t trap, std::size_t ceiling) {
    check_endpoints(n, initial, trap, ceiling);

    using Key = std::tuple<std::size_t, std::size_t, std::size_t>;
    static std::mutex mutex;
    static std::map<Key, std::shared_ptr<const std::vector<Path>>> cache;

    const Key key{n, initial, trap};
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }

    auto paths = std::make_shared<std::vector<Path>>();
    paths->reserve(path_count(n));
    for_each_sequence(interior_sites(n, initial, trap),
                      [&](const std::vector<std::size_t>& seq) { paths->push_back(Path{seq, 0.0}); });

    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(paths)).first->second;
}

std::shared_ptr<const std::vector<Path>> enumerate_paths(std::size_t n, std::size_t ceiling) {
    return enumerate_paths(n, 0, n - 1, ceiling);
}

double path_strength(const Path& path, const ExcitonHamiltonian& h, std::size_t initial,
                     std::size_t trap) {
    const auto& m = h.matrix;
    auto link = [&](std::size_t a, std::size_t b) {
        return std::abs(m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
    };
    double inverse_sum = 0.0;
    std::size_t prev = initial;
    for (std::size_t site : path.intermediates) {
        const double v = link(prev, site);
        if (v == 0.0) return 0.0;
        inverse_sum += 1.0 / v;
        prev = site;
    }
    const double last = link(prev, trap);
    if (last == 0.0) return 0.0;
    if (path.intermediates.empty()) return last;
    inverse_sum += 1.0 / last;
    return 1.0 / inverse_sum;
}

std::vector<double> all_path_strengths(const ExcitonHamiltonian& h, std::size_t initial,
                                       std::size_t trap, std::size_t ceiling) {
    const std::size_t n = h.size();
    check_endpoints(n, initial, trap, ceiling);
    const auto& m = h.matrix;
    auto inv = [&](std::size_t a, std::size_t b) {
        const double v = std::abs(m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
        return v == 0.0 ? INFINITY : 1.0 / v;
    };

    std::vector<double> out;
    out.reserve(path_count(n));
    const auto sites = interior_sites(n, initial, trap);
    std::vector<bool> used(sites.size(), false);
    for (std::size_t len = 0; len <= sites.size(); ++len) {
        // Partial sums of inverse couplings are carried down the recursion.
        auto rec = [&](auto&& self, std::size_t depth, std::size_t prev, double partial) -> void {
            if (depth == len) {
                const double total = partial + inv(prev, trap);
                out.push_back(std::isinf(total) ? 0.0 : 1.0 / total);
                return;
            }
            for (std::size_t i = 0; i < sites.size(); ++i) {
                if (used[i]) continue;
                used[i] = true;
                self(self, depth + 1, sites[i], partial + inv(prev, sites[i]));
                used[i] = false;
            }
        };
        rec(rec, 0, initial, 0.0);
    }
    return out;
}

std::size_t dominant_path_count(const ExcitonHamiltonian& h, std::size_t initial, std::size_t trap,
                                double threshold, std::size_t ceiling) {
    const auto strengths = all_path_strengths(h, initial, trap, ceiling);
    return static_cast<std::size_t>(
        std::count_if(strengths.begin(), strengths.end(), [&](double s) { return s > threshold; }));
}

double z_axis_proximity(const Configuration& config) {
    if (config.size() < 3) throw ConfigError("z-axis proximity needs at least one intermediate site");
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < config.size(); ++i) {
        if (i == config.initial_index || i == config.trap_index) continue;
        const auto& p = config.chromophores[i].position;
        total += std::hypot(p.x(), p.y());
        ++count;
    }
    return total / static_cast<double>(count);
}

PathSummary summarize_paths(const std::vector<double>& strengths, double threshold, std::size_t bins,
                            double upper) {
    if (bins == 0) throw ConfigError("histogram needs at least one bin");
    if (!(upper > 0.0)) throw ConfigError("histogram upper edge must be positive");
    PathSummary s;
    s.histogram.counts.assign(bins, 0);
    for (std::size_t b = 0; b <= bins; ++b)
        s.histogram.edges.push_back(upper * static_cast<double>(b) / static_cast<double>(bins));
    for (double v : strengths) {
        s.max_strength = std::max(s.max_strength, v);
        if (v > threshold) ++s.count_over_threshold;
        auto b = static_cast<std::size_t>(v / upper * static_cast<double>(bins));
        ++s.histogram.counts[std::min(b, bins - 1)];
    }
    return s;
}

}  // namespace chromonet
