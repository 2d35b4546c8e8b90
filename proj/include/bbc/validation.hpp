#pragma once

// Message legality, block validation and fork choice.
//
// Message legality at receive time: sender enrolled, signature verifies,
// (sender, seq) not replayed, credit claim equal to the replayed ledger
// value, timestamp within the freshness window. Checks run in that order
// and the first failure names the rejection, so a verbatim re-send always
// reports Replay even when the sender's credit moved since the original.
//
// Block validation re-derives everything a validator can check from chain
// state alone; the leader-election cross-check is supplied by the caller
// when it has one (live consensus has, offline re-validation has not).

#include <optional>
#include <set>

#include "bbc/chain_store.hpp"
#include "bbc/credit.hpp"

namespace bbc {

constexpr uint64_t kFreshnessWindow = 2;  // rounds

enum class MsgReject : uint8_t {
    None = 0,
    NotEnrolled,
    BadSignature,
    Replay,
    ClaimMismatch,
    Stale,
};

inline const char* to_string(MsgReject r) {
    switch (r) {
        case MsgReject::None: return "None";
        case MsgReject::NotEnrolled: return "NotEnrolled";
        case MsgReject::BadSignature: return "BadSignature";
        case MsgReject::Replay: return "Replay";
        case MsgReject::ClaimMismatch: return "ClaimMismatch";
        case MsgReject::Stale: return "Stale";
    }
    return "?";
}

using SeqIndex = std::map<BiometricID, uint64_t>;  // sender -> highest seq seen

/// Receive-time legality. last_seq is the receiver's highest accepted seq
/// per sender; callers record the new seq themselves after accepting.
inline MsgReject validate_message(const V2XMessage& m, const CreditLedger& ledger,
                                  const Registry& registry, uint64_t current_round,
                                  const SeqIndex& last_seq) {
    const EnrollmentRecord* record = registry.find(m.sender_id);
    if (record == nullptr) return MsgReject::NotEnrolled;
    if (!verify_message_signature(m, record->public_key)) return MsgReject::BadSignature;
    auto seen = last_seq.find(m.sender_id);
    if (seen != last_seq.end() && m.seq <= seen->second) return MsgReject::Replay;
    if (m.credit_claim != ledger.credit_of(m.sender_id)) return MsgReject::ClaimMismatch;
    if (m.timestamp > current_round || current_round - m.timestamp > kFreshnessWindow)
        return MsgReject::Stale;
    return MsgReject::None;
}

enum class BlockReject : uint8_t {
    None = 0,
    BadHeight,
    BadRoot,
    BadSignature,
    WrongLeader,
    IllegalTx,
    BadTimestamp,
};

inline const char* to_string(BlockReject r) {
    switch (r) {
        case BlockReject::None: return "None";
        case BlockReject::BadHeight: return "BadHeight";
        case BlockReject::BadRoot: return "BadRoot";
        case BlockReject::BadSignature: return "BadSignature";
        case BlockReject::WrongLeader: return "WrongLeader";
        case BlockReject::IllegalTx: return "IllegalTx";
        case BlockReject::BadTimestamp: return "BadTimestamp";
    }
    return "?";
}

struct BlockCheck {
    BlockReject code = BlockReject::None;
    std::string detail;

    bool ok() const { return code == BlockReject::None; }
};

/// Transaction legality inside a block is chain-deterministic: claims are
/// checked against the parent-state ledger, freshness against the block's
/// round (nonce), and replay against the seqs committed by prior blocks.
/// Seqs of one sender inside a block only need to be distinct and above
/// the committed maximum; block order is by digest, not by seq.
inline MsgReject validate_block_tx(const V2XMessage& m, const CreditLedger& parent_ledger,
                                   const Registry& registry, uint64_t block_round,
                                   const SeqIndex& committed_seq) {
    return validate_message(m, parent_ledger, registry, block_round, committed_seq);
}

inline BlockCheck validate_block(const Block& b, const Block& parent,
                                 const CreditLedger& parent_ledger, const Registry& registry,
                                 const SeqIndex& committed_seq,
                                 std::optional<BiometricID> expected_leader = std::nullopt) {
    if (b.header.height != parent.header.height + 1)
        return {BlockReject::BadHeight, "height not consecutive with parent"};
    if (b.header.prev_hash != parent.hash())
        return {BlockReject::BadHeight, "prev_hash does not match parent"};
    if (b.header.merkle_root != compute_tx_root(b))
        return {BlockReject::BadRoot, "merkle root does not recompute"};

    BiometricID leader_id{b.header.leader_id};
    const EnrollmentRecord* leader_record = registry.find(leader_id);
    if (leader_record == nullptr)
        return {BlockReject::BadSignature, "leader id is not enrolled"};
    Digest32 hash = b.hash();
    if (!verify_cached(leader_record->public_key, hash.bytes, b.leader_signature))
        return {BlockReject::BadSignature, "leader signature does not verify"};
    if (expected_leader && leader_id != *expected_leader)
        return {BlockReject::WrongLeader, "leader is not the election result"};

    if (b.transactions.empty())
        return {BlockReject::IllegalTx, "non-genesis block without transactions"};
    std::map<BiometricID, std::set<uint64_t>> seqs_in_block;
    for (size_t i = 0; i < b.transactions.size(); ++i) {
        const V2XMessage& tx = b.transactions[i];
        MsgReject r = validate_block_tx(tx, parent_ledger, registry, b.header.nonce,
                                        committed_seq);
        if (r != MsgReject::None)
            return {BlockReject::IllegalTx,
                    "transaction " + std::to_string(i) + ": " + to_string(r)};
        if (!seqs_in_block[tx.sender_id].insert(tx.seq).second)
            return {BlockReject::IllegalTx,
                    "transaction " + std::to_string(i) + ": duplicate seq within block"};
    }

    if (b.header.timestamp < parent.header.timestamp)
        return {BlockReject::BadTimestamp, "timestamp precedes parent"};
    return {};
}

inline void record_block_seqs(SeqIndex& committed_seq, const Block& b) {
    for (const auto& tx : b.transactions) {
        uint64_t& slot = committed_seq[tx.sender_id];
        slot = std::max(slot, tx.seq);
    }
}

struct ChainCheck {
    bool ok = true;
    uint64_t height = 0;     // offending height when !ok
    std::string code;        // rejection code or structural reason
    std::string detail;
};

/// Full structural and cryptographic validation of a stored chain,
/// replaying ledger state and committed seqs from genesis.
inline ChainCheck validate_chain(const Chain& chain, const Registry& registry) {
    if (chain.empty()) return {false, 0, "NoGenesis", "chain has no blocks"};
    if (!(chain[0] == genesis_block()))
        return {false, 0, "BadGenesis", "genesis block is not canonical"};
    CreditLedger ledger = apply_block(initial_ledger(registry), chain[0]);
    SeqIndex committed_seq;
    for (size_t i = 1; i < chain.size(); ++i) {
        BlockCheck check =
            validate_block(chain[i], chain[i - 1], ledger, registry, committed_seq);
        if (!check.ok())
            return {false, chain[i].header.height, to_string(check.code), check.detail};
        record_block_seqs(committed_seq, chain[i]);
        ledger = apply_block(ledger, chain[i]);
    }
    return {};
}

/// Fork choice over validated candidates sharing genesis: greatest height,
/// then greatest sum of each block leader's credit at election time, then
/// smallest head digest. Total, deterministic, permutation-independent.
inline const Chain& select_head(std::span<const Chain> candidates, const Registry& registry) {
    if (candidates.empty()) throw Error("select_head: no candidates");
    auto credit_weight = [&](const Chain& chain) {
        uint64_t sum = 0;
        CreditLedger ledger = initial_ledger(registry);
        for (const Block& b : chain) {
            if (b.header.height > 0) sum += ledger.credit_of(BiometricID{b.header.leader_id});
            ledger = apply_block(ledger, b);
        }
        return sum;
    };
    const Chain* best = nullptr;
    uint64_t best_height = 0, best_weight = 0;
    Digest32 best_head;
    for (const Chain& c : candidates) {
        uint64_t height = c.back().header.height;
        uint64_t weight = credit_weight(c);
        Digest32 head = chain_head(c);
        bool better = best == nullptr || height > best_height ||
                      (height == best_height && weight > best_weight) ||
                      (height == best_height && weight == best_weight && head < best_head);
        if (better) {
            best = &c;
            best_height = height;
            best_weight = weight;
            best_head = head;
        }
    }
    return *best;
}

}  // namespace bbc
