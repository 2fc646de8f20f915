#include "chromonet/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "chromonet/errors.hpp"
#include "chromonet/exciton.hpp"
#include "chromonet/rng.hpp"

namespace chromonet {

PlacedConfiguration cell_configuration(const SweepPlan& plan, std::size_t n, double diameter,
                                       std::size_t sample_index) {
    const std::uint64_t base_seed = derive_seed(plan.master_seed, geometry_cell_id(n, diameter), sample_index);
    for (std::size_t attempt = 0;; ++attempt) {
        const std::uint64_t seed = base_seed + attempt * 0x9e3779b97f4a7c15ULL;
        try {
            return {sample_configuration(n, diameter, plan.energy_window, seed), attempt};
        } catch (const PackingInfeasible&) {
            if (attempt >= plan.max_packing_retries) throw;
        }
    }
}

SampleRecord run_cell(const SweepPlan& plan, const Cell& cell, std::size_t sample_index) {
    SampleRecord rec;
    rec.sample_index = sample_index;
    rec.n = cell.n;
    rec.diameter = cell.diameter;
    rec.lambda = cell.lambda;
    rec.solver = plan.solver;

    const auto placed = cell_configuration(plan, cell.n, cell.diameter, sample_index);
    const Configuration& config = placed.config;
    rec.seed = config.seed;
    rec.retries = placed.retries;

    const ExcitonHamiltonian h = build_hamiltonian(config, plan.coupling);
    const SpectralDescriptors desc = spectral_descriptors(h, config.trap_index);
    rec.mean_gap = desc.mean_gap;
    rec.gap_std = desc.gap_std;
    rec.ground_trap_overlap = desc.ground_trap_overlap;
    rec.ground_degenerate = desc.ground_degenerate;

    BathSpec bath = plan.bath;
    bath.lambda = cell.lambda;
    const SinkSpec sinks{plan.r_loss, plan.r_trap, config.trap_index};
    const TransportResult tr =
        plan.solver == SolverMethod::laplace
            ? ete_laplace(h, bath, sinks, config.initial_index)
            : propagate_time_domain(h, bath, sinks, config.initial_index, plan.time_options).transport;
    rec.eta = tr.eta;
    rec.eta_raw = tr.eta_raw;
    rec.eta_loss = tr.eta_loss;
    rec.positivity_flag = tr.positivity_violation;

    if (cell.n >= 3) rec.z_proximity = z_axis_proximity(config);
    if (cell.n <= plan.path_ceiling) {
        const auto strengths =
            all_path_strengths(h, config.initial_index, config.trap_index, plan.path_ceiling);
        rec.max_path_strength = *std::max_element(strengths.begin(), strengths.end());
        rec.dominant_path_count = static_cast<std::size_t>(std::count_if(
            strengths.begin(), strengths.end(), [&](double s) { return s > plan.path_threshold; }));
    }
    return rec;
}

SampleKey key_of(const SampleRecord& r) { return {r.n, r.diameter, r.lambda, r.sample_index}; }

std::vector<SampleRecord> run_plan(const SweepPlan& plan, const RunOptions& options) {
    plan.validate();
    struct Task {
        Cell cell;
        std::size_t index;
    };
    std::vector<Task> tasks;
    for (const Cell& c : plan_cells(plan))
        for (std::size_t i = 0; i < plan.samples_per_cell; ++i)
            if (!options.skip.contains(SampleKey{c.n, c.diameter, c.lambda, i})) tasks.push_back({c, i});

    std::vector<std::optional<SampleRecord>> slots(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex emit_mutex;
    std::size_t emitted = 0;
    std::exception_ptr failure;
    std::atomic<bool> abort{false};

    // Completed records are released to on_record strictly in task order.
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size() || abort.load()) return;
            try {
                SampleRecord r = run_cell(plan, tasks[i].cell, tasks[i].index);
                std::lock_guard lock(emit_mutex);
                slots[i] = std::move(r);
                while (emitted < slots.size() && slots[emitted]) {
                    if (options.on_record) options.on_record(*slots[emitted]);
                    ++emitted;
                }
            } catch (...) {
                std::lock_guard lock(emit_mutex);
                if (!failure) failure = std::current_exception();
                abort = true;
                return;
            }
        }
    };

    std::size_t n_threads = plan.threads ? plan.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, std::max<std::size_t>(1, tasks.size()));
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<SampleRecord> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

double CellStats::standard_error() const {
    return count > 0 ? std_eta / std::sqrt(static_cast<double>(count)) : 0.0;
}

std::vector<CellStats> aggregate(const std::vector<SampleRecord>& records) {
    std::map<std::tuple<double, double, std::size_t>, std::vector<const SampleRecord*>> groups;
    for (const auto& r : records) groups[{r.diameter, r.lambda, r.n}].push_back(&r);

    std::vector<CellStats> out;
    for (const auto& [key, members] : groups) {
        CellStats s;
        std::tie(s.diameter, s.lambda, s.n) = key;
        s.count = members.size();
        double sum = 0.0;
        for (const auto* r : members) {
            sum += r->eta;
            s.positivity_flags += r->positivity_flag ? 1 : 0;
        }
        s.mean_eta = sum / static_cast<double>(s.count);
        double var = 0.0;
        for (const auto* r : members) var += (r->eta - s.mean_eta) * (r->eta - s.mean_eta);
        s.std_eta = std::sqrt(var / static_cast<double>(s.count));
        out.push_back(s);
    }
    return out;
}

std::vector<std::uint64_t> eta_histogram(const std::vector<double>& etas, std::size_t bins) {
    if (bins == 0) throw ConfigError("histogram needs at least one bin");
    std::vector<std::uint64_t> counts(bins, 0);
    for (double e : etas) {
        const double clamped = std::clamp(e, 0.0, 1.0);
        const auto b = static_cast<std::size_t>(clamped * static_cast<double>(bins));
        ++counts[std::min(b, bins - 1)];
    }
    return counts;
}

std::vector<DensityCell> density_table(const std::vector<SampleRecord>& records, std::size_t bins) {
    std::vector<DensityCell> out;
    for (const CellStats& s : aggregate(records)) {
        std::vector<double> etas;
        for (const auto& r : records)
            if (r.n == s.n && r.diameter == s.diameter && r.lambda == s.lambda) etas.push_back(r.eta);
        DensityCell cell{s, {}, eta_histogram(etas, bins)};
        for (std::size_t b = 0; b <= bins; ++b)
            cell.edges.push_back(static_cast<double>(b) / static_cast<double>(bins));
        out.push_back(std::move(cell));
    }
    return out;
}

std::vector<CellStats> sweep_n(const SweepPlan& plan, const RunOptions& options) {
    return aggregate(run_plan(plan, options));
}

std::vector<DensityCell> sweep_density(const SweepPlan& plan, std::size_t bins, const RunOptions& options) {
    return density_table(run_plan(plan, options), bins);
}

SaturationFit saturation_point(const std::vector<CellStats>& rows, double max_gain) {
    if (rows.size() < 3) throw ConfigError("saturation fit needs at least three site counts");
    std::vector<const CellStats*> sorted;
    for (const auto& r : rows) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->n < b->n; });

    // Weighted linear least squares in (a, b) for each tau on a log grid.
    SaturationFit best;
    double best_cost = INFINITY;
    for (double log_tau = std::log(0.25); log_tau <= std::log(100.0); log_tau += 0.005) {
        const double tau = std::exp(log_tau);
        double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto* r : sorted) {
            const double se = std::max(r->standard_error(), 1e-4);
            const double w = 1.0 / (se * se);
            const double x = -std::exp(-static_cast<double>(r->n) / tau);
            sw += w, sx += w * x, sy += w * r->mean_eta, sxx += w * x * x, sxy += w * x * r->mean_eta;
        }
        const double det = sw * sxx - sx * sx;
        if (std::abs(det) < 1e-300) continue;
        const double b = (sw * sxy - sx * sy) / det;
        const double a = (sy - b * sx) / sw;
        double cost = 0;
        for (const auto* r : sorted) {
            const double se = std::max(r->standard_error(), 1e-4);
            const double model = a - b * std::exp(-static_cast<double>(r->n) / tau);
            cost += (model - r->mean_eta) * (model - r->mean_eta) / (se * se);
        }
        if (cost < best_cost) best_cost = cost, best = {a, b, tau, std::nullopt};
    }

    for (const auto* r : sorted) {
        const double n = static_cast<double>(r->n);
        const double gain = best.b * (std::exp(-n / best.tau) - std::exp(-(n + 1.0) / best.tau));
        if (gain <= max_gain) {
            best.saturation_n = r->n;
            break;
        }
    }
    return best;
}

}  // namespace chromonet
