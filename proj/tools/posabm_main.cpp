// posabm: run single realisations, latency sweeps and CSV summaries.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "posabm/config.hpp"
#include "posabm/engine.hpp"
#include "posabm/metrics.hpp"
#include "posabm/sweep.hpp"
#include "posabm/topology.hpp"

namespace {

struct Flags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> nodes;
    std::optional<double> degree;
    std::optional<double> tau_block;
    std::optional<double> tau_attestation;
    std::optional<double> slot;
    std::optional<double> offset;
    std::optional<std::size_t> epoch_slots;
    std::optional<double> horizon;
    std::optional<std::size_t> realisations;
    std::optional<std::string> sweep_param;
    std::optional<std::string> grid;
    std::optional<std::string> secondary;
    std::optional<std::size_t> jobs;
};

void add_model_flags(CLI::App& app, Flags& f) {
    app.add_option("--config", f.config, "Flat key = value config file; flags override it");
    app.add_option("--seed", f.seed, "Seed (run) or master seed (sweep)");
    app.add_option("--nodes", f.nodes, "Number of validator nodes N");
    app.add_option("--degree", f.degree, "Average ER degree <d>");
    app.add_option("--tau-block", f.tau_block, "Mean block latency per channel, seconds");
    app.add_option("--tau-attestation", f.tau_attestation,
                   "Mean attestation latency per channel, seconds");
    app.add_option("--slot", f.slot, "Slot duration, seconds");
    app.add_option("--offset", f.offset, "Attestation threshold offset into the slot, seconds");
    app.add_option("--epoch-slots", f.epoch_slots, "Slots per epoch m");
    app.add_option("--horizon", f.horizon, "Simulated time, seconds");
}

void add_sweep_flags(CLI::App& app, Flags& f) {
    app.add_option("--realisations", f.realisations, "Realisations per grid point");
    app.add_option("--sweep-param", f.sweep_param, "tau_block or tau_attestation");
    app.add_option("--grid", f.grid, "min:max:points[:log|lin] or a comma list");
    app.add_option("--secondary", f.secondary,
                   "Values of the other latency (same syntax as --grid)");
    app.add_option("--jobs", f.jobs, "Worker threads (0 = all cores)");
}

posabm::SweepSpec resolve(const Flags& f) {
    posabm::SweepSpec spec;
    if (f.config) {
        std::ifstream in(*f.config);
        if (!in) throw std::runtime_error(fmt::format("cannot open config file {}", *f.config));
        for (const auto& [key, value] : posabm::parse_settings(in))
            posabm::apply_setting(spec, key, value);
    }
    auto& c = spec.base;
    if (f.seed) c.seed = spec.master_seed = *f.seed;
    if (f.nodes) c.n_nodes = *f.nodes;
    if (f.degree) c.avg_degree = *f.degree;
    if (f.tau_block) c.tau_block = *f.tau_block;
    if (f.tau_attestation) c.tau_attestation = *f.tau_attestation;
    if (f.slot) c.slot_duration = *f.slot;
    if (f.offset) c.attestation_offset = *f.offset;
    if (f.epoch_slots) c.slots_per_epoch = *f.epoch_slots;
    if (f.horizon) c.horizon = *f.horizon;
    if (f.realisations) spec.realisations = *f.realisations;
    if (f.sweep_param) spec.param = posabm::parse_sweep_param(*f.sweep_param);
    if (f.grid) spec.grid = posabm::parse_grid(*f.grid);
    if (f.secondary) spec.secondary = posabm::parse_grid(*f.secondary);
    if (f.jobs) spec.jobs = *f.jobs;
    return spec;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
    return out;
}

int cmd_run(const Flags& f, const std::string& dump_tree, const std::string& events,
            const std::string& graph_out, const std::string& log_level) {
    auto spec = resolve(f);
    if (log_level == "fixed") spec.base.log_level = posabm::LogLevel::fixed;
    else if (log_level == "all") spec.base.log_level = posabm::LogLevel::all;
    else if (!events.empty()) spec.base.log_level = posabm::LogLevel::fixed;

    const auto trace = posabm::run(spec.base);
    posabm::write_report_text(std::cout, posabm::make_report(trace));
    if (!dump_tree.empty()) {
        auto out = open_out(dump_tree);
        posabm::write_trace(out, trace);
    }
    if (!events.empty()) {
        auto out = open_out(events);
        posabm::write_event_log(out, trace);
    }
    if (!graph_out.empty()) {
        auto out = open_out(graph_out);
        posabm::write_edge_list(out, trace.graph);
    }
    return 0;
}

int cmd_sweep(const Flags& f, const std::string& out_path, bool quiet) {
    const auto spec = resolve(f);
    auto progress = [quiet](std::size_t done, std::size_t total) {
        if (!quiet) std::fprintf(stderr, "\r%zu/%zu realisations", done, total);
    };
    const auto result = posabm::run_sweep(spec, progress);
    if (!quiet) std::fputc('\n', stderr);

    if (out_path.empty() || out_path == "-") {
        posabm::write_sweep_csv(std::cout, spec, result);
    } else {
        auto out = open_out(out_path);
        posabm::write_sweep_csv(out, spec, result);
    }
    for (const auto& row : result.rows)
        if (!row.report)
            std::cerr << fmt::format("point {} realisation {} failed: {}\n", row.point,
                                     row.realisation, row.error);
    return result.any_failed() ? 2 : 0;
}

int cmd_summarize(const std::string& path) {
    if (path == "-") {
        std::cout << posabm::summarize(std::cin);
        return 0;
    }
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open {}", path));
    std::cout << posabm::summarize(in);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agent-based simulator of proof-of-stake (LMD GHOST) consensus"};
    app.require_subcommand(1);

    Flags run_flags, sweep_flags;

    auto* run = app.add_subcommand("run", "Run one realisation and print its consensus report");
    add_model_flags(*run, run_flags);
    std::string dump_tree, events, graph_out, log_level = "none";
    run->add_option("--dump-tree", dump_tree, "Write blocks and attestations to this file");
    run->add_option("--events", events, "Write the event log to this file");
    run->add_option("--graph-out", graph_out, "Write the sampled topology as an edge list");
    run->add_option("--log", log_level, "Event log verbosity")
        ->check(CLI::IsMember({"none", "fixed", "all"}));

    auto* sweep = app.add_subcommand("sweep", "Run a latency sweep and write CSV");
    add_model_flags(*sweep, sweep_flags);
    add_sweep_flags(*sweep, sweep_flags);
    std::string out_path;
    bool quiet = false;
    sweep->add_option("--out", out_path, "CSV output path ('-' for stdout)");
    sweep->add_flag("--quiet", quiet, "No progress on stderr");

    auto* summarize = app.add_subcommand("summarize", "Summarize a sweep CSV");
    std::string csv_path;
    summarize->add_option("csv", csv_path, "Sweep CSV ('-' for stdin)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_flags, dump_tree, events, graph_out, log_level);
        if (*sweep) return cmd_sweep(sweep_flags, out_path, quiet);
        if (*summarize) return cmd_summarize(csv_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
