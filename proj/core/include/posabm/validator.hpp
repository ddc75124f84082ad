#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "posabm/blocktree.hpp"
#include "posabm/types.hpp"

namespace posabm {

/// What a validator knows about the slot in progress.
struct SlotDuty {
    Slot slot = 0;
    ValidatorId proposer = 0;
    bool in_committee = false;
};

/// Local state and honest behaviour of one validator node.
///
/// The node starts out knowing only genesis. Attestations for blocks it has
/// not seen yet wait in a cache until the block arrives.
///
/// Relaying: every attestation the node holds (its latest-message entries and
/// everything it issued itself) is sent at most once to each neighbor. The
/// ledger is kept as its complement, a per-neighbor set of attestations not
/// yet sent, which lets a gossip event pick one uniformly in O(1).
class ValidatorState {
public:
    ValidatorState(ValidatorId id, std::span<const NodeId> neighbors);

    ValidatorId id() const { return id_; }
    const BlockTreeView& view() const { return view_; }
    const LatestMessageTable& table() const { return table_; }
    std::span<const NodeId> neighbors() const { return neighbors_; }

    /// LMD GHOST head of the local view, rooted at genesis.
    BlockId head() const;
    /// Blocks of the local canonical chain, genesis first.
    std::span<const Block> canonical_chain() const;

    bool attested_in(Slot slot) const;
    std::span<const Attestation> issued() const { return issued_; }

    std::size_t cache_size() const { return cached_seqs_.size(); }
    bool is_cached(const Attestation& a) const { return cached_seqs_.contains(a.seq); }

    /// Builds on the local head and adds the block to the local view.
    Block propose(Slot slot, IdSource& ids);

    /// Issues this slot's vote and applies it to the local table.
    /// Throws std::logic_error on a second vote in the same slot.
    Attestation attest(Slot slot, BlockId target, IdSource& ids);

    /// Merges a parent-first chain. Returns the early attestation if the chain
    /// carried the current slot's block from its expected proposer and this
    /// node still owes a vote for the slot. Throws BlockTreeError on gaps.
    std::optional<Attestation> on_chain_received(std::span<const Block> chain,
                                                 const SlotDuty& duty, IdSource& ids);

    void on_attestation_received(const Attestation& a);

    /// Votes for the local head unless a vote was already cast this slot.
    std::optional<Attestation> attest_at_threshold(Slot slot, IdSource& ids);

    /// Picks a uniformly random attestation not yet sent to `receiver` and
    /// marks it as sent. Empty when nothing is left to relay.
    std::optional<Attestation> take_relay(NodeId receiver, Rng& rng);
    std::size_t pending_relays(NodeId receiver) const;
    std::uint64_t relayed_to(NodeId receiver) const;

    /// Throws std::logic_error if the view is not parent-closed or a cached
    /// attestation refers to a known block.
    void check_invariants() const;

private:
    struct RelayQueue {
        std::vector<ValidatorId> table_pending;  // validators whose current entry is unsent
        std::vector<std::int32_t> position;      // index into table_pending, -1 if absent
        std::vector<std::uint32_t> own_pending;  // indices into issued_
        std::uint64_t sent = 0;
    };

    bool accept(const Attestation& a);
    void flush_cache(BlockId arrived);
    void insert_known(const Block& b);
    RelayQueue& queue_for(NodeId receiver);
    const RelayQueue* find_queue(NodeId receiver) const;
    void refresh_head() const;

    ValidatorId id_;
    std::vector<NodeId> neighbors_;
    BlockTreeView view_;
    LatestMessageTable table_;
    std::unordered_map<BlockId, std::vector<Attestation>> cache_;
    std::unordered_set<std::uint64_t> cached_seqs_;
    std::vector<Slot> attested_slots_;
    std::vector<Attestation> issued_;
    std::vector<RelayQueue> relays_;

    mutable bool head_dirty_ = true;
    mutable BlockId head_{kGenesis};
    mutable std::vector<Block> chain_;
};

}  // namespace posabm
