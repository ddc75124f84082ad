#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

namespace posabm {

using Rng = std::mt19937_64;

/// Node of the peer graph. Every node is a validator, so the two share ids.
using NodeId = std::uint32_t;
using ValidatorId = NodeId;

using Slot = std::uint64_t;

/// Blocks are numbered by a creation counter; genesis is always 0.
enum class BlockId : std::uint32_t {};

constexpr BlockId kGenesis{0};

constexpr std::uint32_t to_index(BlockId id) { return static_cast<std::uint32_t>(id); }

struct Block {
    BlockId id{kGenesis};
    std::optional<BlockId> parent;
    Slot slot = 0;
    std::optional<ValidatorId> proposer;

    bool is_genesis() const { return !parent.has_value(); }

    static Block genesis() { return Block{}; }

    friend bool operator==(const Block&, const Block&) = default;
};

/// A vote naming the block its issuer deems the head. `seq` is the global
/// issuance counter and doubles as the attestation's identity.
struct Attestation {
    ValidatorId validator = 0;
    BlockId block{kGenesis};
    Slot slot = 0;
    std::uint64_t seq = 0;

    friend bool operator==(const Attestation&, const Attestation&) = default;
};

/// Hands out block ids and attestation sequence numbers for one realisation.
class IdSource {
public:
    /// Genesis consumes id 0, so the first proposed block is 1.
    BlockId next_block() { return BlockId{next_block_++}; }
    std::uint64_t next_attestation() { return next_seq_++; }

    std::uint32_t blocks_issued() const { return next_block_; }
    std::uint64_t attestations_issued() const { return next_seq_; }

private:
    std::uint32_t next_block_ = 1;
    std::uint64_t next_seq_ = 0;
};

}  // namespace posabm

template <>
struct std::hash<posabm::BlockId> {
    std::size_t operator()(posabm::BlockId id) const noexcept {
        return std::hash<std::uint32_t>{}(posabm::to_index(id));
    }
};
