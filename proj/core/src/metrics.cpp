#include "posabm/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace posabm {

namespace {

BlockTreeView global_view(std::span<const Block> blocks) {
    std::vector<Block> ordered(blocks.begin(), blocks.end());
    std::sort(ordered.begin(), ordered.end(),
              [](const Block& a, const Block& b) { return to_index(a.id) < to_index(b.id); });
    BlockTreeView view;
    for (const Block& b : ordered) view.insert(b);
    return view;
}

}  // namespace

BlockId omniscient_head(std::span<const Block> blocks, std::span<const Attestation> attestations) {
    const BlockTreeView view = global_view(blocks);
    std::vector<Attestation> ordered(attestations.begin(), attestations.end());
    std::sort(ordered.begin(), ordered.end(), [](const Attestation& a, const Attestation& b) {
        return a.slot != b.slot ? a.slot < b.slot : a.seq < b.seq;
    });
    LatestMessageTable table;
    for (const auto& a : ordered) table.update(a);
    return lmd_ghost_head(view, table, kGenesis);
}

BlockId omniscient_head(const SimulationTrace& trace) {
    return omniscient_head(trace.blocks, trace.attestations);
}

MainchainSplit split_mainchain(std::span<const Block> blocks, BlockId head) {
    const BlockTreeView view = global_view(blocks);
    MainchainSplit split;
    split.head = head;
    split.mainchain = canonical_chain(view, head);
    std::vector<bool> on_chain(view.id_bound(), false);
    for (BlockId id : split.mainchain) on_chain[to_index(id)] = true;
    for (const Block& b : view.blocks())
        if (!on_chain[to_index(b.id)]) split.orphans.push_back(b.id);
    return split;
}

MainchainSplit split_mainchain(const SimulationTrace& trace) {
    return split_mainchain(trace.blocks, omniscient_head(trace));
}

double mainchain_rate(const MainchainSplit& split) {
    const auto total = split.mainchain.size() + split.orphans.size();
    return static_cast<double>(split.mainchain.size()) / static_cast<double>(total);
}

double mainchain_rate(const SimulationTrace& trace) {
    return mainchain_rate(split_mainchain(trace));
}

double branching_ratio(std::span<const Block> blocks, const MainchainSplit& split) {
    std::vector<std::optional<BlockId>> parent_of;
    for (const Block& b : blocks) {
        if (to_index(b.id) >= parent_of.size()) parent_of.resize(to_index(b.id) + 1);
        parent_of[to_index(b.id)] = b.parent;
    }
    std::size_t matches = 0;
    for (BlockId m : split.mainchain) {
        const auto& pm = parent_of[to_index(m)];
        if (!pm) continue;
        for (BlockId c : split.orphans)
            if (parent_of[to_index(c)] == pm) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(split.mainchain.size());
}

double branching_ratio(const SimulationTrace& trace) {
    return branching_ratio(trace.blocks, split_mainchain(trace));
}

double threshold_margin(const PeerGraph& graph, double tau_block, double slot_duration) {
    return static_cast<double>(diameter(graph)) * tau_block - slot_duration;
}

double predicted_threshold_margin(std::size_t n, double avg_degree, double tau_block,
                                  double slot_duration) {
    const double p = avg_degree / static_cast<double>(n - 1);
    return predicted_diameter(n, p) * tau_block - slot_duration;
}

ConsensusReport make_report(const SimulationTrace& trace) {
    const auto& c = trace.config;
    const MainchainSplit split = split_mainchain(trace);

    ConsensusReport r;
    r.seed = c.seed;
    r.n = c.n_nodes;
    r.avg_degree = c.avg_degree;
    r.tau_block = c.tau_block;
    r.tau_attestation = c.tau_attestation;
    r.slot_duration = c.slot_duration;
    r.horizon = c.horizon;
    r.total_blocks = trace.blocks.size();
    r.mainchain_blocks = split.mainchain.size();
    r.orphaned_blocks = split.orphans.size();
    r.mu = mainchain_rate(split);
    r.F = branching_ratio(trace.blocks, split);
    r.diameter = c.n_nodes == 1 ? 0 : diameter(trace.graph);
    r.threshold_margin = static_cast<double>(r.diameter) * c.tau_block - c.slot_duration;
    const double np = c.n_nodes >= 2 ? c.avg_degree * static_cast<double>(c.n_nodes) /
                                           static_cast<double>(c.n_nodes - 1)
                                     : 0.0;
    r.predicted_diameter = np > 1.0 ? predicted_diameter(c.n_nodes, np / c.n_nodes)
                                    : std::numeric_limits<double>::quiet_NaN();
    return r;
}

namespace {

constexpr std::array<const char*, 14> kColumns = {
    "seed",    "n",           "avg_degree",       "tau_block",         "tau_attestation",
    "slot_duration", "horizon", "total_blocks",   "mainchain_blocks",  "mu",
    "F",       "diameter",    "predicted_diameter", "threshold_margin"};

}  // namespace

std::span<const char* const> report_columns() { return kColumns; }

void write_report_header(std::ostream& out) {
    for (std::size_t i = 0; i < kColumns.size(); ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
}

void write_report_row(std::ostream& out, const ConsensusReport& r) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.seed, r.n, r.avg_degree,
                       r.tau_block, r.tau_attestation, r.slot_duration, r.horizon,
                       r.total_blocks, r.mainchain_blocks, r.mu, r.F, r.diameter,
                       r.predicted_diameter, r.threshold_margin);
}

void write_report_text(std::ostream& out, const ConsensusReport& r) {
    out << fmt::format(
        "seed {}  N={} <d>={}  tau_block={}s tau_attestation={}s  slot={}s horizon={}s\n"
        "blocks      {} total, {} mainchain, {} orphaned\n"
        "mu          {:.4f}\n"
        "F           {:.4f}\n"
        "diameter    {} (ER estimate {:.3f})\n"
        "margin      {:+.3f}s  ({})\n",
        r.seed, r.n, r.avg_degree, r.tau_block, r.tau_attestation, r.slot_duration, r.horizon,
        r.total_blocks, r.mainchain_blocks, r.orphaned_blocks, r.mu, r.F, r.diameter,
        r.predicted_diameter, r.threshold_margin,
        r.threshold_margin > 0 ? "past the consensus threshold" : "consensus regime");
}

}  // namespace posabm
