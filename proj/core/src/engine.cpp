#include "posabm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

namespace posabm {

namespace {

constexpr double kNever = std::numeric_limits<double>::infinity();

double rate_of(double tau) { return std::isinf(tau) ? 0.0 : 1.0 / tau; }

}  // namespace

void SimConfig::validate() const {
    auto fail = [](std::string msg) { throw std::invalid_argument(std::move(msg)); };
    if (n_nodes < 1) fail("n_nodes must be positive");
    if (n_nodes >= 2 && (!(avg_degree > 0.0) || avg_degree > static_cast<double>(n_nodes - 1)))
        fail(fmt::format("avg_degree must lie in (0, {}]", n_nodes - 1));
    if (!(tau_block > 0.0)) fail("tau_block must be positive");
    if (!(tau_attestation > 0.0)) fail("tau_attestation must be positive");
    if (!(slot_duration > 0.0) || std::isinf(slot_duration))
        fail("slot_duration must be positive and finite");
    if (!(attestation_offset > 0.0) || !(attestation_offset < slot_duration))
        fail("attestation_offset must lie in (0, slot_duration)");
    if (slots_per_epoch < 1) fail("slots_per_epoch must be at least 1");
    if (!(horizon >= slot_duration) || std::isinf(horizon))
        fail("horizon must be finite and at least one slot long");
}

EventRates EventRates::from_latencies(std::size_t channels, double tau_block,
                                      double tau_attestation) {
    if (!(tau_block > 0.0) || !(tau_attestation > 0.0)) {
        throw std::invalid_argument("gossip latencies must be positive");
    }
    return EventRates{rate_of(tau_block), rate_of(tau_attestation), channels};
}

double next_stochastic_delay(const EventRates& rates, Rng& rng) {
    const double lambda = rates.total();
    if (!(lambda > 0.0) || std::isinf(lambda)) {
        throw std::domain_error("gossip rate must be positive and finite");
    }
    // exponential_distribution may return 0 for a 0 uniform draw; support is (0, inf).
    std::exponential_distribution<double> exp(lambda);
    double dt = exp(rng);
    while (!(dt > 0.0)) dt = exp(rng);
    return dt;
}

GossipKind select_event_kind(const EventRates& rates, Rng& rng) {
    const double sum = rates.lambda_block + rates.lambda_attestation;
    if (rates.lambda_attestation == 0.0) return GossipKind::block;
    if (rates.lambda_block == 0.0) return GossipKind::attestation;
    std::uniform_real_distribution<double> u(0.0, sum);
    return u(rng) < rates.lambda_attestation ? GossipKind::attestation : GossipKind::block;
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::epoch_boundary: return "epoch";
        case EventKind::slot_boundary: return "slot";
        case EventKind::attestation_threshold: return "threshold";
        case EventKind::block_gossip: return "block";
        case EventKind::attestation_gossip: return "attestation";
    }
    return "?";
}

std::vector<FixedEvent> fixed_schedule(const SimConfig& config) {
    std::vector<FixedEvent> events;
    for (Slot slot = 1;; ++slot) {
        const double start = static_cast<double>(slot - 1) * config.slot_duration;
        if (start >= config.horizon) break;
        if ((slot - 1) % config.slots_per_epoch == 0)
            events.push_back({start, EventKind::epoch_boundary, slot});
        events.push_back({start, EventKind::slot_boundary, slot});
        const double threshold = start + config.attestation_offset;
        if (threshold < config.horizon)
            events.push_back({threshold, EventKind::attestation_threshold, slot});
    }
    return events;
}

Engine::Engine(SimConfig config, PeerGraph graph, Rng rng) : rng_(std::move(rng)) {
    config.validate();
    if (graph.node_count() != config.n_nodes) {
        throw std::invalid_argument(fmt::format("topology has {} nodes, config expects {}",
                                                graph.node_count(), config.n_nodes));
    }
    rates_ = EventRates::from_latencies(graph.channel_count(), config.tau_block,
                                        config.tau_attestation);
    trace_.config = config;
    trace_.graph = std::move(graph);
    trace_.blocks.push_back(Block::genesis());
    trace_.nodes.reserve(config.n_nodes);
    for (NodeId v = 0; v < config.n_nodes; ++v)
        trace_.nodes.emplace_back(v, trace_.graph.neighbors(v));
}

bool Engine::in_committee(ValidatorId v, Slot slot) const {
    if (slot < epoch_first_slot_ || epoch_first_slot_ == 0) return false;
    const auto k = slot - epoch_first_slot_;
    return k < membership_.size() && membership_[k][v];
}

SlotDuty Engine::duty_for(ValidatorId v) const {
    if (current_slot_ == 0) return {};
    return {current_slot_, trace_.proposers.back(), in_committee(v, current_slot_)};
}

void Engine::record_attestation(const Attestation& a) {
    if (a.seq != trace_.attestations.size()) {
        throw std::logic_error(fmt::format("attestation seq {} recorded out of order", a.seq));
    }
    trace_.attestations.push_back(a);
    trace_.attestation_times.push_back(now_);
}

void Engine::log(EventKind kind, std::optional<Channel> channel,
                 std::optional<std::uint64_t> relayed) {
    const auto level = trace_.config.log_level;
    const bool gossip = kind == EventKind::block_gossip || kind == EventKind::attestation_gossip;
    if (level == LogLevel::none || (level == LogLevel::fixed && gossip)) return;
    trace_.events.push_back({now_, kind, current_slot_, channel, relayed});
}

void Engine::check(std::initializer_list<NodeId> touched) const {
    if (!trace_.config.check_invariants) return;
    for (NodeId v : touched) trace_.nodes[v].check_invariants();
}

void Engine::handle_epoch_boundary(Slot first_slot) {
    const std::size_t m = trace_.config.slots_per_epoch;
    const std::size_t n = trace_.nodes.size();
    std::vector<ValidatorId> order(n);
    std::iota(order.begin(), order.end(), ValidatorId{0});
    std::shuffle(order.begin(), order.end(), rng_);

    // floor(V/m) each, the V mod m leftovers go to distinct random committees
    std::vector<std::size_t> sizes(m, n / m);
    std::vector<std::size_t> committee_order(m);
    std::iota(committee_order.begin(), committee_order.end(), std::size_t{0});
    std::shuffle(committee_order.begin(), committee_order.end(), rng_);
    for (std::size_t r = 0; r < n % m; ++r) ++sizes[committee_order[r]];

    membership_.assign(m, std::vector<bool>(n, false));
    epoch_first_slot_ = first_slot;
    if (trace_.committees.size() < first_slot - 1 + m) trace_.committees.resize(first_slot - 1 + m);
    std::size_t next = 0;
    for (std::size_t k = 0; k < m; ++k) {
        auto& members = trace_.committees[first_slot - 1 + k];
        members.assign(order.begin() + next, order.begin() + next + sizes[k]);
        std::sort(members.begin(), members.end());
        for (ValidatorId v : members) membership_[k][v] = true;
        next += sizes[k];
    }
    ++trace_.epoch_boundaries;
    log(EventKind::epoch_boundary);
}

void Engine::handle_slot_boundary(Slot slot) {
    if (!(slot >= epoch_first_slot_ && epoch_first_slot_ != 0 &&
          slot - epoch_first_slot_ < membership_.size())) {
        throw std::logic_error(fmt::format("no committee sampled for slot {}", slot));
    }
    current_slot_ = slot;
    std::uniform_int_distribution<ValidatorId> pick(
        0, static_cast<ValidatorId>(trace_.nodes.size() - 1));
    const ValidatorId proposer = pick(rng_);
    auto& node = trace_.nodes[proposer];
    const Block block = node.propose(slot, ids_);
    trace_.blocks.push_back(block);
    trace_.proposers.push_back(proposer);
    ++trace_.slot_boundaries;
    log(EventKind::slot_boundary);
    // The proposer sees its own block at once and votes for it if on duty.
    if (in_committee(proposer, slot)) record_attestation(node.attest(slot, block.id, ids_));
    check({proposer});
}

void Engine::handle_attestation_threshold(Slot slot) {
    for (ValidatorId v : trace_.committees.at(slot - 1)) {
        if (auto a = trace_.nodes[v].attest_at_threshold(slot, ids_)) record_attestation(*a);
    }
    ++trace_.thresholds;
    log(EventKind::attestation_threshold);
}

void Engine::block_gossip(Channel ch) {
    const auto& sender = trace_.nodes.at(ch.sender);
    auto& receiver = trace_.nodes.at(ch.receiver);
    if (auto a = receiver.on_chain_received(sender.canonical_chain(), duty_for(ch.receiver), ids_))
        record_attestation(*a);
    ++trace_.block_gossips;
    log(EventKind::block_gossip, ch);
    check({ch.receiver});
}

void Engine::attestation_gossip(Channel ch) {
    auto relayed = trace_.nodes.at(ch.sender).take_relay(ch.receiver, rng_);
    if (relayed) trace_.nodes.at(ch.receiver).on_attestation_received(*relayed);
    ++trace_.attestation_gossips;
    log(EventKind::attestation_gossip, ch,
        relayed ? std::optional<std::uint64_t>(relayed->seq) : std::nullopt);
    check({ch.receiver});
}

SimulationTrace Engine::run() && {
    const auto& config = trace_.config;
    const std::vector<FixedEvent> schedule =
        config.fixed_events ? fixed_schedule(config) : std::vector<FixedEvent>{};
    const bool gossip = rates_.total() > 0.0;

    double pending = gossip ? now_ + next_stochastic_delay(rates_, rng_) : kNever;
    std::size_t next_fixed = 0;
    while (true) {
        const double fixed_at = next_fixed < schedule.size() ? schedule[next_fixed].time : kNever;
        if (fixed_at <= pending) {
            if (!(fixed_at < config.horizon)) break;
            const FixedEvent& ev = schedule[next_fixed++];
            now_ = ev.time;
            switch (ev.kind) {
                case EventKind::epoch_boundary: handle_epoch_boundary(ev.slot); break;
                case EventKind::slot_boundary: handle_slot_boundary(ev.slot); break;
                case EventKind::attestation_threshold: handle_attestation_threshold(ev.slot); break;
                default: break;
            }
            continue;
        }
        if (!(pending < config.horizon)) break;
        now_ = pending;
        const GossipKind kind = select_event_kind(rates_, rng_);
        const Channel ch = sample_directed_channel(trace_.graph, rng_);
        if (kind == GossipKind::block) block_gossip(ch); else attestation_gossip(ch);
        pending = now_ + next_stochastic_delay(rates_, rng_);
    }
    trace_.end_time = now_;
    return std::move(trace_);
}

SimulationTrace run(const SimConfig& config, PeerGraph graph) {
    return Engine(config, std::move(graph), Rng(config.seed)).run();
}

SimulationTrace run(const SimConfig& config) {
    config.validate();
    Rng rng(config.seed);
    PeerGraph graph = config.n_nodes == 1
                          ? PeerGraph(1, {})
                          : generate_er(config.n_nodes, config.avg_degree, rng);
    return Engine(config, std::move(graph), std::move(rng)).run();
}

void write_trace(std::ostream& out, const SimulationTrace& trace) {
    out << "# blocks\n";
    write_blocktree(out, trace.blocks);
    out << "# attestations\n";
    for (const auto& a : trace.attestations)
        out << a.seq << ' ' << a.slot << ' ' << a.validator << ' ' << to_index(a.block) << '\n';
}

void write_event_log(std::ostream& out, const SimulationTrace& trace) {
    for (const auto& e : trace.events) {
        out << fmt::format("{} {} {}", e.time, to_string(e.kind), e.slot);
        if (e.channel) out << fmt::format(" {}->{}", e.channel->sender, e.channel->receiver);
        if (e.relayed) out << fmt::format(" seq={}", *e.relayed);
        out << '\n';
    }
}

}  // namespace posabm
