#pragma once

// Ledger unit: a header binding the previous block hash, the Merkle root
// of the transaction digests, the electing leader and the consensus round
// (carried in the nonce field), plus the ordered transaction list and the
// leader's signature over the block hash. The canonical header layout is
// fixed at 124 bytes so hashes reproduce bit-for-bit everywhere.

#include "bbc/merkle.hpp"
#include "bbc/message.hpp"

namespace bbc {

constexpr uint32_t kProtocolVersion = 1;

struct BlockHeader {
    uint32_t version = kProtocolVersion;
    Digest32 prev_hash;
    Digest32 merkle_root;
    uint64_t timestamp = 0;  // round number in simulation time
    uint64_t height = 0;
    Digest32 leader_id;  // BiometricID digest of the electing leader
    uint64_t nonce = 0;  // consensus round counter

    bool operator==(const BlockHeader&) const = default;
};

/// version(4) || prev_hash(32) || merkle_root(32) || timestamp(8) ||
/// height(8) || leader_id(32) || nonce(8), all big-endian: 124 bytes.
inline Bytes canonical_header_bytes(const BlockHeader& h) {
    Bytes buf;
    buf.reserve(124);
    put_u32_be(buf, h.version);
    append(buf, h.prev_hash.bytes);
    append(buf, h.merkle_root.bytes);
    put_u64_be(buf, h.timestamp);
    put_u64_be(buf, h.height);
    append(buf, h.leader_id.bytes);
    put_u64_be(buf, h.nonce);
    return buf;
}

inline BlockHeader parse_header_bytes(std::span<const uint8_t> buf) {
    if (buf.size() != 124) throw Error("header must be exactly 124 bytes");
    BlockHeader h;
    h.version = read_u32_be(buf, 0);
    std::copy(buf.begin() + 4, buf.begin() + 36, h.prev_hash.bytes.begin());
    std::copy(buf.begin() + 36, buf.begin() + 68, h.merkle_root.bytes.begin());
    h.timestamp = read_u64_be(buf, 68);
    h.height = read_u64_be(buf, 76);
    std::copy(buf.begin() + 84, buf.begin() + 116, h.leader_id.bytes.begin());
    h.nonce = read_u64_be(buf, 116);
    return h;
}

inline Digest32 block_hash(const BlockHeader& h) {
    return double_sha256(canonical_header_bytes(h));
}

struct Block {
    BlockHeader header;
    std::vector<V2XMessage> transactions;
    Signature leader_signature{};  // over block_hash(header); genesis is unsigned

    bool operator==(const Block&) const = default;

    Digest32 hash() const { return block_hash(header); }
};

inline std::vector<Digest32> transaction_digests(const Block& b) {
    std::vector<Digest32> out;
    out.reserve(b.transactions.size());
    for (const auto& tx : b.transactions) out.push_back(message_digest(tx));
    return out;
}

/// Merkle root over the transaction digests; the reserved all-zero digest
/// for an empty (genesis) transaction list.
inline Digest32 compute_tx_root(const Block& b) {
    if (b.transactions.empty()) return Digest32::zero();
    return merkle_root(transaction_digests(b));
}

/// The genesis block is a fixed constant: all digest fields zero, height,
/// timestamp and nonce zero, no transactions, no signature.
inline Block genesis_block() {
    Block g;
    g.header.version = kProtocolVersion;
    g.header.prev_hash = Digest32::zero();
    g.header.merkle_root = Digest32::zero();
    g.header.timestamp = 0;
    g.header.height = 0;
    g.header.leader_id = Digest32::zero();
    g.header.nonce = 0;
    return g;
}

using Chain = std::vector<Block>;

inline Digest32 chain_head(const Chain& chain) {
    if (chain.empty()) throw Error("empty chain has no head");
    return chain.back().hash();
}

}  // namespace bbc
