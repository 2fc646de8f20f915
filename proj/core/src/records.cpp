#include "chromonet/records.hpp"

#include <bit>
#include <string>

#include "chromonet/errors.hpp"
#include "chromonet/rng.hpp"

namespace chromonet {

void SweepPlan::validate() const {
    if (diameters.empty() || site_counts.empty() || lambdas.empty())
        throw ConfigError("sweep plan lists must be non-empty");
    if (samples_per_cell < 1) throw ConfigError("samples_per_cell must be >= 1");
    for (double d : diameters)
        if (!(d >= 2.0 * kMinSiteDistance)) throw ConfigError("diameters must be >= 10 A");
    for (std::size_t n : site_counts)
        if (n < 2) throw ConfigError("site counts must be >= 2");
    for (double l : lambdas)
        if (!(l >= 0.0)) throw ConfigError("lambda values must be >= 0");
    BathSpec b = bath;
    b.lambda = 0.0;
    b.validate();
    if (!(r_trap > 0.0)) throw ConfigError("r_trap must be > 0");
    if (!(r_loss > 0.0)) throw ConfigError("r_loss must be > 0 for a finite ETE");
    if (!(energy_window >= 0.0)) throw ConfigError("energy window must be >= 0");
    if (!(coupling.dipole_strength_constant > 0.0))
        throw ConfigError("dipole strength constant must be > 0");
}

std::vector<Cell> plan_cells(const SweepPlan& plan) {
    std::vector<Cell> cells;
    for (double d : plan.diameters)
        for (std::size_t n : plan.site_counts)
            for (double l : plan.lambdas) cells.push_back({n, d, l});
    return cells;
}

std::uint64_t geometry_cell_id(std::size_t n, double diameter) noexcept {
    return mix64(static_cast<std::uint64_t>(n)) ^ std::bit_cast<std::uint64_t>(diameter);
}

void to_json(nlohmann::json& j, const SampleRecord& r) {
    auto opt = [](const auto& o) { return o ? nlohmann::json(*o) : nlohmann::json(nullptr); };
    j = nlohmann::json{{"seed", r.seed},
                       {"sample_index", r.sample_index},
                       {"n", r.n},
                       {"diameter", r.diameter},
                       {"lambda", r.lambda},
                       {"eta", r.eta},
                       {"eta_raw", r.eta_raw},
                       {"eta_loss", r.eta_loss},
                       {"mean_gap", r.mean_gap},
                       {"gap_std", r.gap_std},
                       {"ground_trap_overlap", r.ground_trap_overlap},
                       {"ground_degenerate", r.ground_degenerate},
                       {"z_proximity", opt(r.z_proximity)},
                       {"max_path_strength", opt(r.max_path_strength)},
                       {"dominant_path_count", opt(r.dominant_path_count)},
                       {"positivity_flag", r.positivity_flag},
                       {"retries", r.retries},
                       {"solver", std::string(to_string(r.solver))}};
}

void from_json(const nlohmann::json& j, SampleRecord& r) {
    auto opt_double = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        return j.at(key).get<double>();
    };
    try {
        r.seed = j.at("seed").get<std::uint64_t>();
        r.sample_index = j.value("sample_index", std::size_t{0});
        r.n = j.at("n").get<std::size_t>();
        r.diameter = j.at("diameter").get<double>();
        r.lambda = j.at("lambda").get<double>();
        r.eta = j.at("eta").get<double>();
        r.eta_raw = j.value("eta_raw", r.eta);
        r.eta_loss = j.at("eta_loss").get<double>();
        r.mean_gap = j.at("mean_gap").get<double>();
        r.gap_std = j.at("gap_std").get<double>();
        r.ground_trap_overlap = j.at("ground_trap_overlap").get<double>();
        r.ground_degenerate = j.value("ground_degenerate", false);
        r.z_proximity = opt_double("z_proximity");
        r.max_path_strength = opt_double("max_path_strength");
        if (j.contains("dominant_path_count") && !j.at("dominant_path_count").is_null())
            r.dominant_path_count = j.at("dominant_path_count").get<std::size_t>();
        else
            r.dominant_path_count.reset();
        r.positivity_flag = j.value("positivity_flag", false);
        r.retries = j.value("retries", std::size_t{0});
        r.solver = parse_solver_method(j.value("solver", std::string("laplace")));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed sample record: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const SweepPlan& p) {
    j = nlohmann::json{{"diameter", p.diameters},
                       {"sites", p.site_counts},
                       {"lambda", p.lambdas},
                       {"samples", p.samples_per_cell},
                       {"seed", p.master_seed},
                       {"gamma", p.bath.gamma},
                       {"temp", p.bath.temperature},
                       {"r_trap", p.r_trap},
                       {"r_loss", p.r_loss},
                       {"energy_window", p.energy_window},
                       {"coupling_const", p.coupling.dipole_strength_constant},
                       {"solver", std::string(to_string(p.solver))},
                       {"threshold", p.path_threshold},
                       {"path_ceiling", p.path_ceiling}};
}

void merge_from_json(const nlohmann::json& j, SweepPlan& p) {
    try {
        auto list_or_scalar = [&](const char* key, auto& target) {
            if (!j.contains(key)) return;
            using T = typename std::decay_t<decltype(target)>::value_type;
            const auto& v = j.at(key);
            target = v.is_array() ? v.get<std::vector<T>>() : std::vector<T>{v.get<T>()};
        };
        list_or_scalar("diameter", p.diameters);
        list_or_scalar("sites", p.site_counts);
        list_or_scalar("lambda", p.lambdas);
        p.samples_per_cell = j.value("samples", p.samples_per_cell);
        p.master_seed = j.value("seed", p.master_seed);
        p.bath.gamma = j.value("gamma", p.bath.gamma);
        p.bath.temperature = j.value("temp", p.bath.temperature);
        p.r_trap = j.value("r_trap", p.r_trap);
        p.r_loss = j.value("r_loss", p.r_loss);
        p.energy_window = j.value("energy_window", p.energy_window);
        p.coupling.dipole_strength_constant = j.value("coupling_const", p.coupling.dipole_strength_constant);
        if (j.contains("solver")) p.solver = parse_solver_method(j.at("solver").get<std::string>());
        p.path_threshold = j.value("threshold", p.path_threshold);
        p.path_ceiling = j.value("path_ceiling", p.path_ceiling);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed sweep plan: ") + e.what());
    }
}

void write_jsonl(std::ostream& os, const SampleRecord& r) {
    os << nlohmann::json(r).dump() << '\n';
}

std::vector<SampleRecord> read_jsonl(std::istream& is) {
    std::vector<SampleRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("record line " + std::to_string(line_no) + " is not valid JSON: " + e.what());
        }
        out.push_back(j.get<SampleRecord>());
    }
    return out;
}

}  // namespace chromonet
