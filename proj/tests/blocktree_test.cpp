#include "posabm/blocktree.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "support/fork_choice_oracle.hpp"

namespace posabm {
namespace {

Block make(std::uint32_t id, std::uint32_t parent, Slot slot, ValidatorId proposer = 0) {
    return Block{BlockId{id}, BlockId{parent}, slot, proposer};
}

Attestation vote(ValidatorId v, std::uint32_t block, Slot slot, std::uint64_t seq = 0) {
    return Attestation{v, BlockId{block}, slot, seq};
}

BlockTreeView view_of(const std::vector<Block>& blocks) {
    BlockTreeView view;
    for (const auto& b : blocks) view.insert(b);
    return view;
}

// g <- a(1), g <- b(2); v1, v2 vote a; v3 votes b
struct ForkFixture : ::testing::Test {
    BlockTreeView view = view_of({Block::genesis(), make(1, 0, 1), make(2, 0, 2)});
    LatestMessageTable table;

    void SetUp() override {
        table.update(vote(1, 1, 1));
        table.update(vote(2, 1, 1));
        table.update(vote(3, 2, 2));
    }
};

TEST(BlockTreeView, InsertIsIdempotent) {
    BlockTreeView view;
    EXPECT_TRUE(view.insert(Block::genesis()));
    EXPECT_TRUE(view.insert(make(1, 0, 1)));
    EXPECT_FALSE(view.insert(make(1, 0, 1)));
    EXPECT_EQ(view.size(), 2u);
}

TEST(BlockTreeView, ChildBeforeParentFails) {
    BlockTreeView view;
    view.insert(Block::genesis());
    EXPECT_THROW(view.insert(make(2, 1, 2)), BlockTreeError);
    EXPECT_EQ(view.size(), 1u);
}

TEST(BlockTreeView, RejectsSlotAndIdOrderViolations) {
    BlockTreeView view = view_of({Block::genesis(), make(1, 0, 3)});
    EXPECT_THROW(view.insert(make(2, 1, 3)), BlockTreeError);  // same slot as parent
    EXPECT_THROW(view.insert(Block{BlockId{5}, std::nullopt, 0, std::nullopt}), BlockTreeError);
    EXPECT_THROW(view.insert(make(1, 0, 4)), BlockTreeError);  // conflicting redefinition
}

TEST(BlockTreeView, ChildrenSortedById) {
    BlockTreeView view;
    view.insert(Block::genesis());
    view.insert(make(3, 0, 3));
    view.insert(make(1, 0, 1));
    view.insert(make(2, 0, 2));
    const auto kids = view.children(kGenesis);
    ASSERT_EQ(kids.size(), 3u);
    EXPECT_EQ(kids[0], BlockId{1});
    EXPECT_EQ(kids[1], BlockId{2});
    EXPECT_EQ(kids[2], BlockId{3});
}

TEST(LatestMessageTable, UpdateRule) {
    LatestMessageTable table;
    EXPECT_TRUE(table.update(vote(3, 1, 2)));
    // equal slot, different block: the first arrival stays
    EXPECT_FALSE(table.update(vote(3, 2, 2)));
    EXPECT_EQ(table.find(3)->block, BlockId{1});
    EXPECT_FALSE(table.update(vote(3, 2, 1)));
    EXPECT_TRUE(table.update(vote(3, 2, 5)));
    EXPECT_EQ(table.find(3)->slot, 5u);
    EXPECT_EQ(table.size(), 1u);
    EXPECT_EQ(table.find(7), nullptr);
}

TEST_F(ForkFixture, SubtreeWeights) {
    EXPECT_EQ(subtree_weight(view, table, BlockId{1}), 2u);
    EXPECT_EQ(subtree_weight(view, table, BlockId{2}), 1u);
    EXPECT_EQ(subtree_weight(view, table, kGenesis), 3u);
    EXPECT_THROW(subtree_weight(view, table, BlockId{9}), BlockTreeError);
}

TEST_F(ForkFixture, HeadFollowsMajority) {
    EXPECT_EQ(lmd_ghost_head(view, table), BlockId{1});
    std::vector<test::Vote> votes{{1, BlockId{1}}, {2, BlockId{1}}, {3, BlockId{2}}};
    EXPECT_EQ(test::brute_head(view.blocks(), votes), BlockId{1});
}

TEST_F(ForkFixture, EquivocationKeepsFirstVote) {
    // v3 switching to a in the same slot must not tip anything
    EXPECT_FALSE(table.update(vote(3, 1, 2)));
    EXPECT_EQ(subtree_weight(view, table, BlockId{2}), 1u);
    // two late equivocations in slot 3 from v1: first one (b) wins
    EXPECT_TRUE(table.update(vote(1, 2, 3)));
    EXPECT_FALSE(table.update(vote(1, 1, 3)));
    EXPECT_EQ(lmd_ghost_head(view, table), BlockId{2});
}

TEST(SubtreeWeight, LeafWithoutVotesIsZero) {
    const auto view = view_of({Block::genesis(), make(1, 0, 1)});
    LatestMessageTable table;
    EXPECT_EQ(subtree_weight(view, table, BlockId{1}), 0u);
}

TEST(SubtreeWeight, VotesOutsideViewCountZero) {
    const auto view = view_of({Block::genesis(), make(1, 0, 1)});
    LatestMessageTable table;
    table.update(vote(0, 1, 1));
    table.update(vote(1, 7, 4));  // block 7 unknown here
    EXPECT_EQ(subtree_weight(view, table, kGenesis), 1u);
}

TEST(LmdGhostHead, TrivialViews) {
    LatestMessageTable empty;
    EXPECT_EQ(lmd_ghost_head(view_of({Block::genesis()}), empty), kGenesis);
    EXPECT_EQ(lmd_ghost_head(view_of({Block::genesis(), make(1, 0, 1), make(2, 1, 2)}), empty),
              BlockId{2});
}

TEST(LmdGhostHead, TiesGoToSmallestId) {
    const auto view = view_of({Block::genesis(), make(1, 0, 1), make(2, 0, 2)});
    LatestMessageTable table;
    table.update(vote(0, 2, 2));
    table.update(vote(1, 1, 1));
    EXPECT_EQ(lmd_ghost_head(view, table), BlockId{1});
}

TEST(LmdGhostHead, UnknownRootThrows) {
    LatestMessageTable table;
    EXPECT_THROW(lmd_ghost_head(view_of({Block::genesis()}), table, BlockId{3}), BlockTreeError);
}

TEST(CanonicalChain, Paths) {
    const auto view = view_of({Block::genesis(), make(1, 0, 1), make(2, 0, 2), make(3, 1, 3)});
    EXPECT_EQ(canonical_chain(view, kGenesis), std::vector<BlockId>{kGenesis});
    EXPECT_EQ(canonical_chain(view, BlockId{3}),
              (std::vector<BlockId>{kGenesis, BlockId{1}, BlockId{3}}));
    EXPECT_EQ(canonical_chain(view, BlockId{2}), (std::vector<BlockId>{kGenesis, BlockId{2}}));
}

class RandomTrees : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(RandomTrees, MatchesBruteForceOracleAndProperties) {
    std::mt19937_64 rng(GetParam());
    for (int trial = 0; trial < 200; ++trial) {
        const auto blocks = test::random_tree(rng, 12);
        const auto votes = test::random_votes(rng, 8, blocks.size());
        const auto view = view_of(blocks);
        LatestMessageTable table;
        Slot slot = 1;
        for (const auto& v : votes) table.update(vote(v.validator, to_index(v.block), slot++));

        const BlockId head = lmd_ghost_head(view, table);
        ASSERT_EQ(head, test::brute_head(blocks, votes)) << "trial " << trial;
        EXPECT_EQ(lmd_ghost_head(view, table), head);
        EXPECT_TRUE(view.children(head).empty());
        EXPECT_GE(view.block(head).slot, 0u);

        const auto weights = subtree_weights(view, table);
        for (const auto& b : blocks) {
            ASSERT_EQ(weights[to_index(b.id)], test::brute_weight(blocks, votes, b.id));
            std::uint32_t below = 0;
            for (BlockId c : view.children(b.id)) below += weights[to_index(c)];
            std::uint32_t own = 0;
            for (const auto& v : votes) own += v.block == b.id;
            EXPECT_EQ(weights[to_index(b.id)], below + own);
        }

        // From any root, the head never lies in an earlier slot than the root.
        for (const auto& b : blocks) {
            const BlockId sub = lmd_ghost_head(view, table, b.id);
            EXPECT_GE(view.block(sub).slot, b.slot);
            EXPECT_EQ(sub, test::brute_head(blocks, votes, b.id));
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomTrees, ::testing::Values(1u, 2u, 3u, 4u, 5u));

TEST(WriteBlocktree, Format) {
    std::ostringstream out;
    const std::vector<Block> blocks{Block::genesis(), make(1, 0, 1, 42), make(2, 1, 3, 7)};
    write_blocktree(out, blocks);
    EXPECT_EQ(out.str(), "0 - 0 -\n1 0 1 42\n2 1 3 7\n");
}

}  // namespace
}  // namespace posabm
