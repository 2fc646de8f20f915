#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "chromonet/analysis.hpp"
#include "chromonet/ensemble.hpp"
#include "chromonet/errors.hpp"
#include "chromonet/exciton.hpp"
#include "chromonet/pathways.hpp"

using namespace chromonet;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

// Flags as parsed; unset values fall back to the config file, then to defaults.
struct Flags {
    std::string config;
    std::vector<std::size_t> sites;
    std::vector<double> diameter;
    std::vector<double> lambda;
    std::optional<double> gamma, temp, r_trap, r_loss, energy_window, coupling_const, threshold, t_max;
    std::optional<std::size_t> samples, bins, threads, tail;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> solver, out, in;
    bool all_strengths{false};
};

struct Job {
    SweepPlan plan;
    std::size_t bins{10};
    std::size_t tail{100};
    std::string out;
    std::string in;
};

void add_shared(CLI::App* app, Flags& f) {
    app->add_option("--config", f.config, "JSON file mirroring the flags; flags take precedence");
    app->add_option("--sites", f.sites, "Site counts (comma separated)")->delimiter(',');
    app->add_option("--diameter", f.diameter, "Sphere diameters in angstrom (comma separated)")->delimiter(',');
    app->add_option("--lambda", f.lambda, "Reorganization energies in cm^-1 (comma separated)")->delimiter(',');
    app->add_option("--gamma", f.gamma, "Bath cutoff in cm^-1 [50]");
    app->add_option("--temp", f.temp, "Temperature in K [298]");
    app->add_option("--r-trap", f.r_trap, "Trapping rate in 1/ps [1.0]");
    app->add_option("--r-loss", f.r_loss, "Per-site loss rate in 1/ps [0.001]");
    app->add_option("--energy-window", f.energy_window, "Site energy window in cm^-1 [500]");
    app->add_option("--coupling-const", f.coupling_const, "Dipole strength constant in cm^-1 A^3 [134000]");
    app->add_option("--samples", f.samples, "Samples per cell [200]");
    app->add_option("--seed", f.seed, "Master seed [1]");
    app->add_option("--solver", f.solver, "laplace or time [laplace]");
    app->add_option("--out", f.out, "Output path (stdout when omitted; a directory for analyze)");
    app->add_option("--bins", f.bins, "Histogram bins [10]");
    app->add_option("--threshold", f.threshold, "Dominant path threshold in cm^-1 [1000]");
    app->add_option("--threads", f.threads, "Worker threads, 0 for all cores [0]");
    app->add_option("--t-max", f.t_max, "Time-domain horizon in ps [10000]");
}

Job resolve(const Flags& f) {
    Job job;
    nlohmann::json file = nlohmann::json::object();
    if (!f.config.empty()) {
        std::ifstream is(f.config);
        if (!is) throw ConfigError("cannot open config file " + f.config);
        try {
            file = nlohmann::json::parse(is);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
        }
        if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
    }
    // Flags are folded into the file object, so both go through one parser.
    auto set = [&](const char* key, const auto& v) {
        if (v) file[key] = *v;
    };
    if (!f.sites.empty()) file["sites"] = f.sites;
    if (!f.diameter.empty()) file["diameter"] = f.diameter;
    if (!f.lambda.empty()) file["lambda"] = f.lambda;
    set("gamma", f.gamma);
    set("temp", f.temp);
    set("r_trap", f.r_trap);
    set("r_loss", f.r_loss);
    set("energy_window", f.energy_window);
    set("coupling_const", f.coupling_const);
    set("samples", f.samples);
    set("seed", f.seed);
    set("solver", f.solver);
    set("threshold", f.threshold);
    set("out", f.out);
    set("in", f.in);
    set("bins", f.bins);
    set("threads", f.threads);
    set("t_max", f.t_max);
    set("tail", f.tail);

    merge_from_json(file, job.plan);
    try {
        job.bins = file.value("bins", job.bins);
        job.tail = file.value("tail", job.tail);
        job.out = file.value("out", job.out);
        job.in = file.value("in", job.in);
        job.plan.threads = file.value("threads", job.plan.threads);
        job.plan.time_options.t_max = file.value("t_max", job.plan.time_options.t_max);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    if (job.bins == 0) throw ConfigError("--bins must be >= 1");
    if (!(job.plan.time_options.t_max > 0.0)) throw ConfigError("--t-max must be > 0");
    job.plan.validate();
    return job;
}

// Output sink: a file (optionally appended) or stdout.
class Output {
public:
    Output(const std::string& path, bool append) {
        if (path.empty() || path == "-") return;
        file_ = std::make_unique<std::ofstream>(path, append ? std::ios::app : std::ios::trunc);
        if (!*file_) throw ConfigError("cannot open output file " + path);
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

// Records already present in the output file are skipped and the file is appended to.
std::vector<SampleRecord> stream_records(const Job& job) {
    RunOptions options;
    std::vector<SampleRecord> existing;
    const bool resume = !job.out.empty() && job.out != "-" && fs::exists(job.out);
    if (resume) {
        std::ifstream is(job.out);
        existing = read_jsonl(is);
        for (const auto& r : existing) options.skip.insert(key_of(r));
    }
    Output out(job.out, resume);
    options.on_record = [&](const SampleRecord& r) {
        write_jsonl(out.stream(), r);
        out.stream().flush();
    };
    auto fresh = run_plan(job.plan, options);
    existing.insert(existing.end(), fresh.begin(), fresh.end());
    return existing;
}

// Cell summaries share stdout only when the records went to a file.
std::ostream& summary_stream(const Job& job) {
    return job.out.empty() || job.out == "-" ? std::cerr : std::cout;
}

int cmd_generate(const Job& job) {
    Output out(job.out, false);
    for (double d : job.plan.diameters)
        for (std::size_t n : job.plan.site_counts)
            for (std::size_t i = 0; i < job.plan.samples_per_cell; ++i) {
                const auto placed = cell_configuration(job.plan, n, d, i);
                const auto h = build_hamiltonian(placed.config, job.plan.coupling);
                nlohmann::json j{{"sample_index", i},
                                 {"retries", placed.retries},
                                 {"configuration", placed.config},
                                 {"hamiltonian", nlohmann::json::array()}};
                for (Eigen::Index r = 0; r < h.matrix.rows(); ++r) {
                    std::vector<double> row;
                    for (Eigen::Index c = 0; c < h.matrix.cols(); ++c) row.push_back(h.matrix(r, c));
                    j["hamiltonian"].push_back(row);
                }
                out.stream() << j.dump() << '\n';
            }
    return kExitOk;
}

int cmd_ete(const Job& job) {
    stream_records(job);
    return kExitOk;
}

void print_stats(std::ostream& os, const std::vector<CellStats>& rows, const SweepPlan& plan) {
    for (const auto& r : rows)
        os << nlohmann::json{{"n", r.n},           {"diameter", r.diameter}, {"lambda", r.lambda},
                                    {"count", r.count},   {"mean_eta", r.mean_eta}, {"std_eta", r.std_eta},
                                    {"stderr", r.standard_error()}}
                         .dump()
                  << '\n';
    if (plan.site_counts.size() < 3) return;
    for (double d : plan.diameters)
        for (double l : plan.lambdas) {
            std::vector<CellStats> curve;
            for (const auto& r : rows)
                if (r.diameter == d && r.lambda == l) curve.push_back(r);
            const auto fit = saturation_point(curve);
            nlohmann::json j{{"diameter", d}, {"lambda", l},     {"fit_a", fit.a},
                             {"fit_b", fit.b}, {"fit_tau", fit.tau}, {"saturation_n", nullptr}};
            if (fit.saturation_n) j["saturation_n"] = *fit.saturation_n;
            os << j.dump() << '\n';
        }
}

int cmd_sweep_n(const Job& job) {
    const auto records = stream_records(job);
    print_stats(summary_stream(job), aggregate(records), job.plan);
    return kExitOk;
}

int cmd_sweep_density(const Job& job) {
    const auto records = stream_records(job);
    for (const auto& c : density_table(records, job.bins))
        summary_stream(job) << nlohmann::json{{"n", c.stats.n},          {"diameter", c.stats.diameter},
                                    {"lambda", c.stats.lambda}, {"count", c.stats.count},
                                    {"mean_eta", c.stats.mean_eta}, {"edges", c.edges},
                                    {"counts", c.counts}}
                         .dump()
                  << '\n';
    return kExitOk;
}

int cmd_analyze(const Job& job) {
    if (job.in.empty()) throw ConfigError("analyze needs --in <records.jsonl>");
    std::ifstream is(job.in);
    if (!is) throw ConfigError("cannot open records file " + job.in);
    const auto records = read_jsonl(is);
    if (records.empty()) throw ConfigError("no records in " + job.in);

    const fs::path dir = job.out.empty() ? fs::path("analysis") : fs::path(job.out);
    fs::create_directories(dir);
    const auto stats = aggregate(records);
    const auto rows = correlation_report(records, job.tail);
    auto write = [&](const char* name, auto&& fn) {
        std::ofstream os(dir / name);
        if (!os) throw ConfigError("cannot write " + (dir / name).string());
        fn(os);
    };
    write("histogram.csv", [&](std::ostream& os) { write_histogram_csv(os, density_table(records, job.bins)); });
    write("cell_stats.csv", [&](std::ostream& os) { write_cell_stats_csv(os, stats); });
    write("tails.csv", [&](std::ostream& os) { write_tails_csv(os, rows); });
    write("dominant_paths.csv", [&](std::ostream& os) { write_dominant_csv(os, rows); });
    write("summary.txt", [&](std::ostream& os) { write_summary(os, records, stats, rows); });
    write_summary(std::cout, records, stats, rows);
    return kExitOk;
}

int cmd_paths(const Job& job, bool all_strengths) {
    Output out(job.out, false);
    for (double d : job.plan.diameters)
        for (std::size_t n : job.plan.site_counts) {
            if (n > job.plan.path_ceiling)
                throw ConfigError("path enumeration is limited to " + std::to_string(job.plan.path_ceiling) + " sites");
            for (std::size_t i = 0; i < job.plan.samples_per_cell; ++i) {
                const auto placed = cell_configuration(job.plan, n, d, i);
                const auto& cfg = placed.config;
                const auto h = build_hamiltonian(cfg, job.plan.coupling);
                const auto strengths = all_path_strengths(h, cfg.initial_index, cfg.trap_index, job.plan.path_ceiling);
                const auto summary = summarize_paths(strengths, job.plan.path_threshold, job.bins,
                                                     std::max(job.plan.path_threshold, 1.0));
                nlohmann::json j{{"seed", cfg.seed},
                                 {"sample_index", i},
                                 {"n", n},
                                 {"diameter", d},
                                 {"path_count", strengths.size()},
                                 {"max_path_strength", summary.max_strength},
                                 {"dominant_path_count", summary.count_over_threshold},
                                 {"histogram_edges", summary.histogram.edges},
                                 {"histogram_counts", summary.histogram.counts}};
                if (n >= 3) j["z_proximity"] = z_axis_proximity(cfg);
                if (all_strengths) j["strengths"] = strengths;
                out.stream() << j.dump() << '\n';
            }
        }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random chromophore networks: geometry, transport efficiency and ensemble statistics"};
    app.require_subcommand(1);
    Flags flags;

    auto* generate = app.add_subcommand("generate", "Sample configurations and their Hamiltonians (JSONL)");
    auto* ete = app.add_subcommand("ete", "Transport efficiency for every sample of the plan (JSONL records)");
    auto* sweep_n = app.add_subcommand("sweep-n", "Records over site counts; cell means and saturation fit to stdout or stderr");
    auto* sweep_density =
        app.add_subcommand("sweep-density", "Records over diameters; efficiency histograms to stdout or stderr");
    auto* analyze = app.add_subcommand("analyze", "CSV tables and a text summary from a records file");
    auto* paths = app.add_subcommand("paths", "Path strength statistics per sample (JSONL)");
    for (auto* sub : {generate, ete, sweep_n, sweep_density, analyze, paths}) add_shared(sub, flags);
    analyze->add_option("--in", flags.in, "Records file (JSONL)");
    analyze->add_option("--tail", flags.tail, "Tail size for top/bottom comparisons [100]");
    paths->add_flag("--all", flags.all_strengths, "Include every path strength");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        const Job job = resolve(flags);
        if (*generate) return cmd_generate(job);
        if (*ete) return cmd_ete(job);
        if (*sweep_n) return cmd_sweep_n(job);
        if (*sweep_density) return cmd_sweep_density(job);
        if (*analyze) return cmd_analyze(job);
        return cmd_paths(job, flags.all_strengths);
    } catch (const ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitConfig;
    } catch (const PackingInfeasible& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kExitSolver;
    }
}
