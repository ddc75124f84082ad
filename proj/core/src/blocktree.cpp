#include "posabm/blocktree.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

namespace posabm {

bool LatestMessageTable::update(const Attestation& a) {
    if (a.validator >= entries_.size()) entries_.resize(a.validator + 1);
    auto& entry = entries_[a.validator];
    if (entry && a.slot <= entry->slot) return false;
    if (!entry) ++count_;
    entry = a;
    return true;
}

bool BlockTreeView::insert(const Block& b) {
    const auto idx = to_index(b.id);
    if (contains(b.id)) {
        if (*blocks_[idx] != b) {
            throw BlockTreeError(fmt::format("conflicting definitions of block {}", idx));
        }
        return false;
    }
    if (b.is_genesis()) {
        if (b.id != kGenesis || b.slot != 0) {
            throw BlockTreeError(fmt::format("block {} has no parent but is not genesis", idx));
        }
    } else {
        const BlockId parent = *b.parent;
        if (!contains(parent)) {
            throw BlockTreeError(fmt::format("block {} arrived before its parent {}", idx,
                                             to_index(parent)));
        }
        if (to_index(parent) >= idx) {
            throw BlockTreeError(fmt::format("block {} is older than its parent {}", idx,
                                             to_index(parent)));
        }
        if (b.slot <= block(parent).slot) {
            throw BlockTreeError(
                fmt::format("block {} (slot {}) does not follow its parent's slot {}", idx,
                            b.slot, block(parent).slot));
        }
    }
    if (idx >= blocks_.size()) {
        blocks_.resize(idx + 1);
        children_.resize(idx + 1);
    }
    blocks_[idx] = b;
    ++count_;
    if (b.parent) {
        auto& siblings = children_[to_index(*b.parent)];
        siblings.insert(std::upper_bound(siblings.begin(), siblings.end(), b.id), b.id);
    }
    return true;
}

const Block& BlockTreeView::block(BlockId id) const {
    if (!contains(id)) throw BlockTreeError(fmt::format("unknown block {}", to_index(id)));
    return *blocks_[to_index(id)];
}

std::span<const BlockId> BlockTreeView::children(BlockId id) const {
    if (!contains(id)) throw BlockTreeError(fmt::format("unknown block {}", to_index(id)));
    return children_[to_index(id)];
}

std::vector<Block> BlockTreeView::blocks() const {
    std::vector<Block> out;
    out.reserve(count_);
    for (const auto& b : blocks_)
        if (b) out.push_back(*b);
    return out;
}

std::vector<std::uint32_t> subtree_weights(const BlockTreeView& view,
                                           const LatestMessageTable& table) {
    std::vector<std::uint32_t> weight(view.id_bound(), 0);
    table.for_each([&](const Attestation& a) {
        if (view.contains(a.block)) ++weight[to_index(a.block)];
    });
    // Parents precede children in id order, so one reverse sweep accumulates.
    for (std::size_t i = weight.size(); i-- > 1;) {
        const BlockId id{static_cast<std::uint32_t>(i)};
        if (!view.contains(id)) continue;
        const auto& b = view.block(id);
        if (b.parent) weight[to_index(*b.parent)] += weight[i];
    }
    return weight;
}

std::uint32_t subtree_weight(const BlockTreeView& view, const LatestMessageTable& table,
                             BlockId b) {
    if (!view.contains(b)) throw BlockTreeError(fmt::format("unknown block {}", to_index(b)));
    return subtree_weights(view, table)[to_index(b)];
}

BlockId lmd_ghost_head(const BlockTreeView& view, const LatestMessageTable& table,
                       BlockId root) {
    if (!view.contains(root)) {
        throw BlockTreeError(fmt::format("fork-choice root {} is unknown", to_index(root)));
    }
    auto kids = view.children(root);
    if (kids.empty()) return root;

    const auto weight = subtree_weights(view, table);
    BlockId head = root;
    while (!kids.empty()) {
        BlockId best = kids.front();
        for (BlockId c : kids.subspan(1))
            if (weight[to_index(c)] > weight[to_index(best)]) best = c;
        head = best;
        kids = view.children(head);
    }
    return head;
}

std::vector<BlockId> canonical_chain(const BlockTreeView& view, BlockId head) {
    std::vector<BlockId> chain;
    for (const Block* b = &view.block(head);; b = &view.block(*b->parent)) {
        chain.push_back(b->id);
        if (b->is_genesis()) break;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

void write_blocktree(std::ostream& out, std::span<const Block> blocks) {
    for (const auto& b : blocks) {
        out << to_index(b.id) << ' ';
        if (b.parent) out << to_index(*b.parent); else out << '-';
        out << ' ' << b.slot << ' ';
        if (b.proposer) out << *b.proposer; else out << '-';
        out << '\n';
    }
}

}  // namespace posabm
