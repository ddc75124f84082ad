#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "posabm/topology.hpp"
#include "posabm/types.hpp"
#include "posabm/validator.hpp"

namespace posabm {

enum class LogLevel {
    none,   // no event log
    fixed,  // slot, epoch and threshold events only
    all,    // every executed event, gossip included
};

struct SimConfig {
    std::size_t n_nodes = 128;
    double avg_degree = 8.0;
    double tau_block = 1.0;        // seconds; +inf disables block gossip
    double tau_attestation = 1.0;  // seconds; +inf disables attestation gossip
    double slot_duration = 12.0;
    double attestation_offset = 4.0;
    std::size_t slots_per_epoch = 1;
    double horizon = 300.0;
    std::uint64_t seed = 1;

    /// Off only in tests that study the bare stochastic process.
    bool fixed_events = true;
    LogLevel log_level = LogLevel::none;
    /// Re-checks per-node invariants after every event. Slow.
    bool check_invariants = false;

    /// Throws std::invalid_argument naming the first bad field.
    void validate() const;
};

/// Per-channel gossip rates. A rate of zero stands for an infinite latency.
struct EventRates {
    double lambda_block = 0.0;
    double lambda_attestation = 0.0;
    std::size_t channels = 0;

    static EventRates from_latencies(std::size_t channels, double tau_block,
                                     double tau_attestation);

    /// 2E (lambda_block + lambda_attestation).
    double total() const {
        return static_cast<double>(channels) * (lambda_block + lambda_attestation);
    }
};

enum class GossipKind { block, attestation };

/// Waiting time to the next gossip event anywhere in the network, ~ exp(total).
/// Throws std::domain_error if the total rate is not positive.
double next_stochastic_delay(const EventRates& rates, Rng& rng);

/// Attestation gossip with probability lambda_att / (lambda_att + lambda_block).
GossipKind select_event_kind(const EventRates& rates, Rng& rng);

enum class EventKind {
    epoch_boundary,
    slot_boundary,
    attestation_threshold,
    block_gossip,
    attestation_gossip,
};

std::string_view to_string(EventKind kind);

struct FixedEvent {
    double time = 0.0;
    EventKind kind = EventKind::slot_boundary;
    Slot slot = 0;
};

/// Fixed-time events in execution order over [0, horizon). Slot s >= 1 starts
/// at (s - 1) * slot_duration; an epoch boundary shares the timestamp of
/// every m-th slot boundary and comes first.
std::vector<FixedEvent> fixed_schedule(const SimConfig& config);

struct EventRecord {
    double time = 0.0;
    EventKind kind = EventKind::slot_boundary;
    Slot slot = 0;                     // slot in progress when the event ran
    std::optional<Channel> channel;    // gossip events only
    std::optional<std::uint64_t> relayed;  // attestation seq carried, if any
};

struct SimulationTrace {
    SimConfig config;
    PeerGraph graph{0, {}};
    /// Every block ever created, indexed by id (genesis first).
    std::vector<Block> blocks;
    /// Every attestation ever issued, indexed by seq.
    std::vector<Attestation> attestations;
    /// Model time at which each attestation was issued, indexed by seq.
    std::vector<double> attestation_times;
    std::vector<EventRecord> events;
    std::vector<ValidatorState> nodes;
    /// committees[s - 1] and proposers[s - 1] belong to slot s.
    std::vector<std::vector<ValidatorId>> committees;
    std::vector<ValidatorId> proposers;

    std::size_t slot_boundaries = 0;
    std::size_t epoch_boundaries = 0;
    std::size_t thresholds = 0;
    std::size_t block_gossips = 0;
    std::size_t attestation_gossips = 0;
    double end_time = 0.0;
};

/// One realisation of the modified Gillespie loop.
///
/// Random draws come from a single stream in this order: the pending gossip
/// delay, then whatever each executed event needs (committee shuffle,
/// proposer, event kind, channel, attestation pick) as it runs. A pending
/// gossip arrival survives any number of fixed events that preempt it.
/// Fixed events win ties with gossip at the same timestamp.
class Engine {
public:
    Engine(SimConfig config, PeerGraph graph, Rng rng);

    SimulationTrace run() &&;

    void handle_epoch_boundary(Slot first_slot);
    void handle_slot_boundary(Slot slot);
    void handle_attestation_threshold(Slot slot);
    void block_gossip(Channel channel);
    void attestation_gossip(Channel channel);

    const ValidatorState& node(NodeId id) const { return trace_.nodes.at(id); }
    const SimulationTrace& trace() const { return trace_; }
    bool in_committee(ValidatorId v, Slot slot) const;

private:
    SlotDuty duty_for(ValidatorId v) const;
    void record_attestation(const Attestation& a);
    void log(EventKind kind, std::optional<Channel> channel = std::nullopt,
             std::optional<std::uint64_t> relayed = std::nullopt);
    void check(std::initializer_list<NodeId> touched) const;

    Rng rng_;
    IdSource ids_;
    EventRates rates_;
    SimulationTrace trace_;
    double now_ = 0.0;
    Slot current_slot_ = 0;
    Slot epoch_first_slot_ = 0;
    // membership_[k][v]: v attests in slot epoch_first_slot_ + k
    std::vector<std::vector<bool>> membership_;
};

/// Samples the topology from the config's seed, then runs the loop on the
/// same random stream.
SimulationTrace run(const SimConfig& config);
/// Runs on a caller-supplied topology; the stream starts at the loop.
SimulationTrace run(const SimConfig& config, PeerGraph graph);

/// Blocks then attestations ("seq slot validator block"), each under a
/// "# blocks" / "# attestations" header line.
void write_trace(std::ostream& out, const SimulationTrace& trace);
void write_event_log(std::ostream& out, const SimulationTrace& trace);

}  // namespace posabm
