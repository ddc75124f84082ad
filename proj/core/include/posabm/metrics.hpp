#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "posabm/blocktree.hpp"
#include "posabm/engine.hpp"
#include "posabm/topology.hpp"

namespace posabm {

/// The blocktree split into mainchain M and orphans Theta, as judged by an
/// observer that has seen every block and every attestation.
struct MainchainSplit {
    BlockId head{kGenesis};
    std::vector<BlockId> mainchain;  // genesis first
    std::vector<BlockId> orphans;    // ascending id
};

/// Omniscient head over an arbitrary global block set; attestations enter the
/// table in (slot, seq) order.
BlockId omniscient_head(std::span<const Block> blocks, std::span<const Attestation> attestations);
BlockId omniscient_head(const SimulationTrace& trace);

MainchainSplit split_mainchain(std::span<const Block> blocks, BlockId head);
MainchainSplit split_mainchain(const SimulationTrace& trace);

/// |M| / |B|. Genesis counts in both.
double mainchain_rate(const MainchainSplit& split);
double mainchain_rate(const SimulationTrace& trace);

/// Orphans that share a parent with a mainchain block, per mainchain block.
/// Genesis has no parent and never matches.
double branching_ratio(std::span<const Block> blocks, const MainchainSplit& split);
double branching_ratio(const SimulationTrace& trace);

/// D(G) tau_block - T_slot with the measured BFS diameter. Positive means the
/// block cannot cross the network within a slot.
double threshold_margin(const PeerGraph& graph, double tau_block, double slot_duration);
/// Same with the ER concentration estimate for D(G).
double predicted_threshold_margin(std::size_t n, double avg_degree, double tau_block,
                                  double slot_duration);

struct ConsensusReport {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    double avg_degree = 0.0;
    double tau_block = 0.0;
    double tau_attestation = 0.0;
    double slot_duration = 0.0;
    double horizon = 0.0;

    std::size_t total_blocks = 0;
    std::size_t mainchain_blocks = 0;
    std::size_t orphaned_blocks = 0;
    double mu = 0.0;
    double F = 0.0;
    std::size_t diameter = 0;
    /// NaN when the ER estimate is out of its regime (n p <= 1).
    double predicted_diameter = 0.0;
    double threshold_margin = 0.0;
};

ConsensusReport make_report(const SimulationTrace& trace);

/// Column names of one realisation row.
std::span<const char* const> report_columns();
void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, const ConsensusReport& r);
void write_report_text(std::ostream& out, const ConsensusReport& r);

}  // namespace posabm
