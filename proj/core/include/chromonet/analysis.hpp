#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "chromonet/ensemble.hpp"
#include "chromonet/records.hpp"

namespace chromonet {

struct Extremes {
    std::vector<SampleRecord> top;     // highest eta first
    std::vector<SampleRecord> bottom;  // lowest eta first
    bool truncated{false};             // m exceeded the population
};

// Stable ordering by eta with ties broken by ascending seed.
Extremes select_extremes(const std::vector<SampleRecord>& records, std::size_t m);

struct TailStats {
    double overlap{0.0};
    double gap_mean{0.0};       // mean over the tail of each sample's mean gap
    double gap_std{0.0};        // spread of the mean gap across the tail
    double level_spread{0.0};   // mean over the tail of each sample's gap std
    double z_proximity{0.0};
    double dominant_paths{0.0};
    std::size_t size{0};
};

struct DominantCurvePoint {
    std::size_t m{0};
    double top_mean{0.0};
    double bottom_mean{0.0};
};

struct CorrelationRow {
    double diameter{0.0};
    double lambda{0.0};
    std::size_t population{0};
    TailStats top;
    TailStats bottom;
    TailStats all;
    double overlap_ratio{0.0};  // top / bottom mean ground-trap overlap
    std::vector<DominantCurvePoint> dominant_curve;
    bool truncated{false};
};

// m values 10..90, 100..900, 1000..5000 clipped to the population.
std::vector<std::size_t> dominant_curve_sizes(std::size_t population);

// Per (diameter, lambda) tail comparison over the m most and least efficient
// samples. Records lacking path or proximity data contribute zero to those means.
std::vector<CorrelationRow> correlation_report(const std::vector<SampleRecord>& records, std::size_t m);

void write_histogram_csv(std::ostream& os, const std::vector<DensityCell>& cells);
void write_cell_stats_csv(std::ostream& os, const std::vector<CellStats>& rows);
void write_tails_csv(std::ostream& os, const std::vector<CorrelationRow>& rows);
void write_dominant_csv(std::ostream& os, const std::vector<CorrelationRow>& rows);
void write_summary(std::ostream& os, const std::vector<SampleRecord>& records,
                   const std::vector<CellStats>& stats, const std::vector<CorrelationRow>& rows);

}  // namespace chromonet
