#include "posabm/validator.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace posabm {

ValidatorState::ValidatorState(ValidatorId id, std::span<const NodeId> neighbors)
    : id_(id), neighbors_(neighbors.begin(), neighbors.end()), relays_(neighbors.size()) {
    std::sort(neighbors_.begin(), neighbors_.end());
    view_.insert(Block::genesis());
}

BlockId ValidatorState::head() const {
    refresh_head();
    return head_;
}

std::span<const Block> ValidatorState::canonical_chain() const {
    refresh_head();
    return chain_;
}

void ValidatorState::refresh_head() const {
    if (!head_dirty_) return;
    head_dirty_ = false;
    const BlockId fresh = lmd_ghost_head(view_, table_, kGenesis);
    if (fresh == head_ && !chain_.empty()) return;
    head_ = fresh;
    chain_.clear();
    for (BlockId id : posabm::canonical_chain(view_, head_)) chain_.push_back(view_.block(id));
}

bool ValidatorState::attested_in(Slot slot) const {
    return std::binary_search(attested_slots_.begin(), attested_slots_.end(), slot);
}

Block ValidatorState::propose(Slot slot, IdSource& ids) {
    Block b{ids.next_block(), head(), slot, id_};
    insert_known(b);
    return b;
}

Attestation ValidatorState::attest(Slot slot, BlockId target, IdSource& ids) {
    if (attested_in(slot)) {
        throw std::logic_error(
            fmt::format("validator {} already attested in slot {}", id_, slot));
    }
    if (!view_.contains(target)) {
        throw std::logic_error(fmt::format("validator {} cannot attest unknown block {}", id_,
                                           to_index(target)));
    }
    const Attestation a{id_, target, slot, ids.next_attestation()};
    attested_slots_.insert(std::upper_bound(attested_slots_.begin(), attested_slots_.end(), slot),
                           slot);
    issued_.push_back(a);
    const auto own_index = static_cast<std::uint32_t>(issued_.size() - 1);
    for (auto& q : relays_) q.own_pending.push_back(own_index);
    accept(a);
    return a;
}

std::optional<Attestation> ValidatorState::on_chain_received(std::span<const Block> chain,
                                                             const SlotDuty& duty,
                                                             IdSource& ids) {
    if (chain.empty()) return std::nullopt;
    if (!view_.contains(chain.back().id)) {
        for (std::size_t i = 0; i < chain.size(); ++i) {
            const Block& b = chain[i];
            const bool linked = i == 0 ? (b.is_genesis() || view_.contains(*b.parent))
                                       : (b.parent && *b.parent == chain[i - 1].id);
            if (!linked) {
                throw BlockTreeError(
                    fmt::format("chain received by validator {} has a gap at block {}", id_,
                                to_index(b.id)));
            }
        }
        for (const Block& b : chain)
            if (!view_.contains(b.id)) insert_known(b);
    }

    if (!duty.in_committee || attested_in(duty.slot)) return std::nullopt;
    // Slots strictly increase along a chain, so scan back only while they are recent.
    for (auto it = chain.rbegin(); it != chain.rend() && it->slot >= duty.slot; ++it) {
        if (it->slot == duty.slot && it->proposer == duty.proposer) {
            return attest(duty.slot, it->id, ids);
        }
    }
    return std::nullopt;
}

void ValidatorState::on_attestation_received(const Attestation& a) {
    if (view_.contains(a.block)) {
        accept(a);
        return;
    }
    if (cached_seqs_.insert(a.seq).second) cache_[a.block].push_back(a);
}

std::optional<Attestation> ValidatorState::attest_at_threshold(Slot slot, IdSource& ids) {
    if (attested_in(slot)) return std::nullopt;
    return attest(slot, head(), ids);
}

bool ValidatorState::accept(const Attestation& a) {
    if (!table_.update(a)) return false;
    head_dirty_ = true;
    if (a.validator == id_) return true;  // own votes are queued through issued_
    for (auto& q : relays_) {
        if (a.validator >= q.position.size()) q.position.resize(a.validator + 1, -1);
        if (q.position[a.validator] < 0) {
            q.position[a.validator] = static_cast<std::int32_t>(q.table_pending.size());
            q.table_pending.push_back(a.validator);
        }
    }
    return true;
}

void ValidatorState::insert_known(const Block& b) {
    if (view_.insert(b)) {
        head_dirty_ = true;
        flush_cache(b.id);
    }
}

void ValidatorState::flush_cache(BlockId arrived) {
    auto it = cache_.find(arrived);
    if (it == cache_.end()) return;
    auto waiting = std::move(it->second);
    cache_.erase(it);
    // Arrival order, so equal-slot conflicts still resolve to the first arrival.
    for (const auto& a : waiting) {
        cached_seqs_.erase(a.seq);
        accept(a);
    }
}

ValidatorState::RelayQueue& ValidatorState::queue_for(NodeId receiver) {
    auto it = std::lower_bound(neighbors_.begin(), neighbors_.end(), receiver);
    if (it == neighbors_.end() || *it != receiver) {
        throw std::logic_error(
            fmt::format("validator {} has no channel to {}", id_, receiver));
    }
    return relays_[static_cast<std::size_t>(it - neighbors_.begin())];
}

const ValidatorState::RelayQueue* ValidatorState::find_queue(NodeId receiver) const {
    auto it = std::lower_bound(neighbors_.begin(), neighbors_.end(), receiver);
    if (it == neighbors_.end() || *it != receiver) return nullptr;
    return &relays_[static_cast<std::size_t>(it - neighbors_.begin())];
}

std::optional<Attestation> ValidatorState::take_relay(NodeId receiver, Rng& rng) {
    RelayQueue& q = queue_for(receiver);
    const std::size_t total = q.table_pending.size() + q.own_pending.size();
    if (total == 0) return std::nullopt;
    std::size_t k = std::uniform_int_distribution<std::size_t>(0, total - 1)(rng);
    ++q.sent;
    if (k < q.table_pending.size()) {
        const ValidatorId v = q.table_pending[k];
        const ValidatorId moved = q.table_pending.back();
        q.table_pending[k] = moved;
        q.position[moved] = static_cast<std::int32_t>(k);
        q.table_pending.pop_back();
        q.position[v] = -1;
        return *table_.find(v);
    }
    k -= q.table_pending.size();
    const auto own_index = q.own_pending[k];
    q.own_pending[k] = q.own_pending.back();
    q.own_pending.pop_back();
    return issued_[own_index];
}

std::size_t ValidatorState::pending_relays(NodeId receiver) const {
    const RelayQueue* q = find_queue(receiver);
    return q ? q->table_pending.size() + q->own_pending.size() : 0;
}

std::uint64_t ValidatorState::relayed_to(NodeId receiver) const {
    const RelayQueue* q = find_queue(receiver);
    return q ? q->sent : 0;
}

void ValidatorState::check_invariants() const {
    for (const Block& b : view_.blocks()) {
        if (!b.is_genesis() && !view_.contains(*b.parent)) {
            throw std::logic_error(fmt::format("validator {}: block {} has no parent in view",
                                               id_, to_index(b.id)));
        }
    }
    for (const auto& [block, waiting] : cache_) {
        if (view_.contains(block)) {
            throw std::logic_error(fmt::format(
                "validator {}: cached attestation for known block {}", id_, to_index(block)));
        }
    }
    if (std::adjacent_find(attested_slots_.begin(), attested_slots_.end()) !=
        attested_slots_.end()) {
        throw std::logic_error(fmt::format("validator {} attested twice in a slot", id_));
    }
}

}  // namespace posabm
