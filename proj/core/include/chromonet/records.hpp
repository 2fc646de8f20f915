#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chromonet/bath.hpp"
#include "chromonet/geometry.hpp"
#include "chromonet/pathways.hpp"
#include "chromonet/tc2solver.hpp"

namespace chromonet {

struct SweepPlan {
    std::vector<double> diameters{30.0};
    std::vector<std::size_t> site_counts{7};
    std::vector<double> lambdas{35.0};
    std::size_t samples_per_cell{200};
    std::uint64_t master_seed{1};

    BathSpec bath;  // lambda is taken from the cell
    double r_trap{1.0};
    double r_loss{1e-3};
    double energy_window{500.0};
    CouplingModel coupling;
    SolverMethod solver{SolverMethod::laplace};
    TimeDomainOptions time_options;

    std::size_t path_ceiling{kDefaultPathSiteCeiling};
    double path_threshold{kDominantPathThreshold};
    std::size_t max_packing_retries{16};
    std::size_t threads{0};  // 0: hardware concurrency

    void validate() const;
};

struct Cell {
    std::size_t n{0};
    double diameter{0.0};
    double lambda{0.0};
};

// Cells in plan order: diameters, then site counts, then lambdas.
std::vector<Cell> plan_cells(const SweepPlan& plan);

// Geometry seeds depend on (n, diameter) only, so cells that differ just in
// lambda see identical configurations.
std::uint64_t geometry_cell_id(std::size_t n, double diameter) noexcept;

struct SampleRecord {
    std::uint64_t seed{0};
    std::size_t sample_index{0};
    std::size_t n{0};
    double diameter{0.0};
    double lambda{0.0};
    double eta{0.0};
    double eta_raw{0.0};
    double eta_loss{0.0};
    double mean_gap{0.0};
    double gap_std{0.0};
    double ground_trap_overlap{0.0};
    bool ground_degenerate{false};
    std::optional<double> z_proximity;
    std::optional<double> max_path_strength;
    std::optional<std::size_t> dominant_path_count;
    bool positivity_flag{false};
    std::size_t retries{0};
    SolverMethod solver{SolverMethod::laplace};
};

void to_json(nlohmann::json& j, const SampleRecord& r);
void from_json(const nlohmann::json& j, SampleRecord& r);

void to_json(nlohmann::json& j, const SweepPlan& p);
// Keys absent from j keep the values already in p.
void merge_from_json(const nlohmann::json& j, SweepPlan& p);

void write_jsonl(std::ostream& os, const SampleRecord& r);
std::vector<SampleRecord> read_jsonl(std::istream& is);

}  // namespace chromonet
