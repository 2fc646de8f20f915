#include "chromonet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>

namespace chromonet {

Extremes select_extremes(const std::vector<SampleRecord>& records, std::size_t m) {
    Extremes out;
    out.truncated = m > records.size();
    const std::size_t k = std::min(m, records.size());

    std::vector<SampleRecord> ranked = records;
    std::stable_sort(ranked.begin(), ranked.end(), [](const SampleRecord& a, const SampleRecord& b) {
        if (a.eta != b.eta) return a.eta < b.eta;
        return a.seed < b.seed;
    });
    out.bottom.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));

    std::stable_sort(ranked.begin(), ranked.end(), [](const SampleRecord& a, const SampleRecord& b) {
        if (a.eta != b.eta) return a.eta > b.eta;
        return a.seed < b.seed;
    });
    out.top.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k));
    return out;
}

namespace {

TailStats tail_stats(const std::vector<SampleRecord>& tail) {
    TailStats s;
    s.size = tail.size();
    if (tail.empty()) return s;
    const double n = static_cast<double>(tail.size());
    for (const auto& r : tail) {
        s.overlap += r.ground_trap_overlap;
        s.gap_mean += r.mean_gap;
        s.level_spread += r.gap_std;
        s.z_proximity += r.z_proximity.value_or(0.0);
        s.dominant_paths += static_cast<double>(r.dominant_path_count.value_or(0));
    }
    s.overlap /= n;
    s.gap_mean /= n;
    s.level_spread /= n;
    s.z_proximity /= n;
    s.dominant_paths /= n;
    double var = 0.0;
    for (const auto& r : tail) var += (r.mean_gap - s.gap_mean) * (r.mean_gap - s.gap_mean);
    s.gap_std = std::sqrt(var / n);
    return s;
}

double mean_dominant(const std::vector<SampleRecord>& tail, std::size_t m) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += static_cast<double>(tail[i].dominant_path_count.value_or(0));
    return m ? sum / static_cast<double>(m) : 0.0;
}

}  // namespace

std::vector<std::size_t> dominant_curve_sizes(std::size_t population) {
    std::vector<std::size_t> sizes;
    for (std::size_t m = 10; m <= 90; m += 10) sizes.push_back(m);
    for (std::size_t m = 100; m <= 900; m += 100) sizes.push_back(m);
    for (std::size_t m = 1000; m <= 5000; m += 1000) sizes.push_back(m);
    std::erase_if(sizes, [&](std::size_t m) { return m > population; });
    return sizes;
}

std::vector<CorrelationRow> correlation_report(const std::vector<SampleRecord>& records, std::size_t m) {
    std::map<std::pair<double, double>, std::vector<SampleRecord>> groups;
    for (const auto& r : records) groups[{r.diameter, r.lambda}].push_back(r);

    std::vector<CorrelationRow> rows;
    for (const auto& [key, members] : groups) {
        CorrelationRow row;
        row.diameter = key.first;
        row.lambda = key.second;
        row.population = members.size();

        const Extremes ex = select_extremes(members, m);
        row.truncated = ex.truncated;
        row.top = tail_stats(ex.top);
        row.bottom = tail_stats(ex.bottom);
        row.all = tail_stats(members);
        row.overlap_ratio = row.bottom.overlap > 0.0 ? row.top.overlap / row.bottom.overlap : INFINITY;

        const Extremes full = select_extremes(members, members.size());
        for (std::size_t k : dominant_curve_sizes(members.size()))
            row.dominant_curve.push_back({k, mean_dominant(full.top, k), mean_dominant(full.bottom, k)});
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_histogram_csv(std::ostream& os, const std::vector<DensityCell>& cells) {
    os << "n,diameter,lambda,bin_lo,bin_hi,count\n";
    for (const auto& c : cells)
        for (std::size_t b = 0; b < c.counts.size(); ++b)
            os << c.stats.n << ',' << c.stats.diameter << ',' << c.stats.lambda << ',' << c.edges[b] << ','
               << c.edges[b + 1] << ',' << c.counts[b] << '\n';
}

void write_cell_stats_csv(std::ostream& os, const std::vector<CellStats>& rows) {
    os << "n,diameter,lambda,count,mean_eta,std_eta,stderr_eta,positivity_flags\n";
    os << std::setprecision(10);
    for (const auto& r : rows)
        os << r.n << ',' << r.diameter << ',' << r.lambda << ',' << r.count << ',' << r.mean_eta << ','
           << r.std_eta << ',' << r.standard_error() << ',' << r.positivity_flags << '\n';
}

void write_tails_csv(std::ostream& os, const std::vector<CorrelationRow>& rows) {
    os << "diameter,lambda,population,tail_size,overlap_top,overlap_bottom,overlap_ratio,"
          "gap_mean_top,gap_std_top,gap_mean_bottom,gap_std_bottom,level_spread_top,level_spread_bottom,"
          "z_top,z_bottom,z_all,dominant_top,dominant_bottom\n";
    os << std::setprecision(10);
    for (const auto& r : rows)
        os << r.diameter << ',' << r.lambda << ',' << r.population << ',' << r.top.size << ','
           << r.top.overlap << ',' << r.bottom.overlap << ',' << r.overlap_ratio << ',' << r.top.gap_mean
           << ',' << r.top.gap_std << ',' << r.bottom.gap_mean << ',' << r.bottom.gap_std << ','
           << r.top.level_spread << ',' << r.bottom.level_spread << ',' << r.top.z_proximity << ','
           << r.bottom.z_proximity << ',' << r.all.z_proximity << ',' << r.top.dominant_paths << ','
           << r.bottom.dominant_paths << '\n';
}

void write_dominant_csv(std::ostream& os, const std::vector<CorrelationRow>& rows) {
    os << "diameter,lambda,m,dominant_top,dominant_bottom\n";
    for (const auto& r : rows)
        for (const auto& p : r.dominant_curve)
            os << r.diameter << ',' << r.lambda << ',' << p.m << ',' << p.top_mean << ',' << p.bottom_mean
               << '\n';
}

void write_summary(std::ostream& os, const std::vector<SampleRecord>& records,
                   const std::vector<CellStats>& stats, const std::vector<CorrelationRow>& rows) {
    std::size_t flagged = 0, retried = 0;
    for (const auto& r : records) {
        flagged += r.positivity_flag ? 1 : 0;
        retried += r.retries;
    }
    os << "records: " << records.size() << "\n"
       << "positivity-flagged samples: " << flagged << "\n"
       << "packing retries: " << retried << "\n\n";
    os << std::fixed << std::setprecision(4);
    os << "cell means (n, d, lambda): mean eta +- std [count]\n";
    for (const auto& s : stats)
        os << "  " << s.n << ", " << s.diameter << ", " << s.lambda << ": " << s.mean_eta << " +- "
           << s.std_eta << " [" << s.count << "]\n";
    os << "\ntail comparison (d, lambda): overlap ratio, gap top/bottom, z top/all\n";
    for (const auto& r : rows) {
        const double z_ratio = r.all.z_proximity > 0 ? r.top.z_proximity / r.all.z_proximity : 0.0;
        os << "  " << r.diameter << ", " << r.lambda << ": " << r.overlap_ratio << ", " << r.top.gap_mean
           << " / " << r.bottom.gap_mean << ", " << z_ratio << (r.truncated ? "  (tail truncated)" : "")
           << "\n";
    }
}

}  // namespace chromonet
