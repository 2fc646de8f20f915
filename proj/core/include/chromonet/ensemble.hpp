#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "chromonet/records.hpp"

namespace chromonet {

struct PlacedConfiguration {
    Configuration config;
    std::size_t retries{0};
};

// Geometry of sample `sample_index` in the (n, diameter) cell; shared by all lambdas.
PlacedConfiguration cell_configuration(const SweepPlan& plan, std::size_t n, double diameter,
                                       std::size_t sample_index);

// One Monte Carlo sample: geometry -> Hamiltonian -> descriptors -> ETE -> paths.
// Deterministic in (plan.master_seed, cell, sample_index). Packing failures are
// retried with deterministically shifted seeds and counted in record.retries.
SampleRecord run_cell(const SweepPlan& plan, const Cell& cell, std::size_t sample_index);

// (n, diameter, lambda, sample_index) of a finished record; used to resume runs.
using SampleKey = std::tuple<std::size_t, double, double, std::size_t>;
SampleKey key_of(const SampleRecord& r);

struct RunOptions {
    std::set<SampleKey> skip;  // samples already on disk
    std::function<void(const SampleRecord&)> on_record;
};

// Runs every sample of the plan on a pool of workers. on_record sees records in
// plan order (cell, then sample index) whatever the completion order.
std::vector<SampleRecord> run_plan(const SweepPlan& plan, const RunOptions& options = {});

struct CellStats {
    std::size_t n{0};
    double diameter{0.0};
    double lambda{0.0};
    std::size_t count{0};
    double mean_eta{0.0};
    double std_eta{0.0};  // population standard deviation
    std::size_t positivity_flags{0};

    double standard_error() const;
};

// Groups records by (n, diameter, lambda), sorted by diameter, lambda, then n.
std::vector<CellStats> aggregate(const std::vector<SampleRecord>& records);

struct DensityCell {
    CellStats stats;
    std::vector<double> edges;
    std::vector<std::uint64_t> counts;
};

// Equal-width ETE histogram on [0, 1]; eta = 1 falls in the last bin.
std::vector<std::uint64_t> eta_histogram(const std::vector<double>& etas, std::size_t bins);

std::vector<CellStats> sweep_n(const SweepPlan& plan, const RunOptions& options = {});
std::vector<DensityCell> sweep_density(const SweepPlan& plan, std::size_t bins = 10,
                                       const RunOptions& options = {});
std::vector<DensityCell> density_table(const std::vector<SampleRecord>& records, std::size_t bins);

// Saturation of mean ETE against chromophore number. A saturating exponential
// a - b exp(-n / tau) is fitted to the per-n means (weighted by their standard
// errors); the saturation point is the smallest n whose fitted gain for one more
// chromophore is <= max_gain.
struct SaturationFit {
    double a{0.0};
    double b{0.0};
    double tau{0.0};
    std::optional<std::size_t> saturation_n;
};

SaturationFit saturation_point(const std::vector<CellStats>& rows_for_one_curve,
                               double max_gain = 0.01);

}  // namespace chromonet
