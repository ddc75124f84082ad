#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "posabm/types.hpp"

namespace posabm {

class BlockTreeError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Latest vote per validator, as seen by one observer.
///
/// An entry is replaced only by a vote from a strictly later slot. On equal
/// slots the entry that arrived first stays, which settles equivocation.
class LatestMessageTable {
public:
    /// Returns true when `a` replaced the stored entry (or filled an empty one).
    bool update(const Attestation& a);

    const Attestation* find(ValidatorId v) const {
        return v < entries_.size() && entries_[v] ? &*entries_[v] : nullptr;
    }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }

    /// Calls f(const Attestation&) for every entry in validator order.
    template <typename F>
    void for_each(F&& f) const {
        for (const auto& e : entries_)
            if (e) f(*e);
    }

private:
    std::vector<std::optional<Attestation>> entries_;
    std::size_t count_ = 0;
};

/// Parent-closed set of blocks known to one observer.
///
/// Block ids are creation counters, so a parent always has a smaller id than
/// its children. Children lists are kept sorted by id.
class BlockTreeView {
public:
    /// Idempotent. Throws BlockTreeError if the parent is unknown, if a
    /// non-genesis block has no parent, or if slot/id ordering is violated.
    bool insert(const Block& b);

    bool contains(BlockId id) const {
        return to_index(id) < blocks_.size() && blocks_[to_index(id)].has_value();
    }
    const Block& block(BlockId id) const;
    std::span<const BlockId> children(BlockId id) const;

    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }
    /// One past the largest known id; sizing bound for per-block arrays.
    std::size_t id_bound() const { return blocks_.size(); }

    std::vector<Block> blocks() const;

private:
    std::vector<std::optional<Block>> blocks_;
    std::vector<std::vector<BlockId>> children_;
    std::size_t count_ = 0;
};

/// Number of table entries attesting `b` or one of its descendants. Entries
/// whose block is outside the view count for nothing.
std::uint32_t subtree_weight(const BlockTreeView& view, const LatestMessageTable& table,
                             BlockId b);

/// Subtree weight for every known block, indexed by block id.
std::vector<std::uint32_t> subtree_weights(const BlockTreeView& view,
                                           const LatestMessageTable& table);

/// LMD GHOST: from `root`, repeatedly step into the heaviest child (ties go
/// to the smallest id) until a leaf is reached.
BlockId lmd_ghost_head(const BlockTreeView& view, const LatestMessageTable& table,
                       BlockId root = kGenesis);

/// Genesis-to-head path, parent first.
std::vector<BlockId> canonical_chain(const BlockTreeView& view, BlockId head);

/// "id parent slot proposer" per line; '-' stands for a missing parent or proposer.
void write_blocktree(std::ostream& out, std::span<const Block> blocks);

}  // namespace posabm
