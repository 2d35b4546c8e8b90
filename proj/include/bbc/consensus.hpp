#pragma once

// Proof-of-Driving rounds. A node qualifies as a leader candidate by
// presenting a signed list of digests of its own recent delivered (and
// legality-passing) messages; each validator re-checks the list against
// what it actually received from that sender. The credit-maximal
// candidate becomes leader, proposes a block over the mempool, and the
// block commits once accept votes arrive from strictly more than half of
// the online enrolled validators before the round deadline.

#include <optional>
#include <set>

#include "bbc/validation.hpp"

namespace bbc {

constexpr uint64_t kDefaultActivityWindow = 5;  // rounds

/// Per-receiver index of accepted traffic: round -> digest -> sender.
struct DeliveryIndex {
    std::map<uint64_t, std::map<Digest32, BiometricID>> by_round;

    void add(uint64_t round, const Digest32& digest, const BiometricID& sender) {
        by_round[round].emplace(digest, sender);
    }

    /// True when `digest` was accepted from `sender` in [lo, hi].
    bool has(uint64_t lo, uint64_t hi, const Digest32& digest, const BiometricID& sender) const {
        for (auto it = by_round.lower_bound(lo); it != by_round.end() && it->first <= hi; ++it) {
            auto hit = it->second.find(digest);
            if (hit != it->second.end() && hit->second == sender) return true;
        }
        return false;
    }

    void prune_before(uint64_t round) {
        while (!by_round.empty() && by_round.begin()->first < round)
            by_round.erase(by_round.begin());
    }
};

struct DrivingProof {
    BiometricID subject;
    uint64_t round = 0;
    std::vector<Digest32> activity_digests;  // ascending
    Signature signature{};
};

inline Bytes proof_canonical_bytes(const DrivingProof& p) {
    Bytes buf;
    append(buf, p.subject.id.bytes);
    put_u64_be(buf, p.round);
    put_u32_be(buf, static_cast<uint32_t>(p.activity_digests.size()));
    for (const Digest32& d : p.activity_digests) append(buf, d.bytes);
    return buf;
}

/// Activity window for round r: the W rounds before r, i.e. [r-W, r-1].
inline std::pair<uint64_t, uint64_t> activity_window(uint64_t round, uint64_t window) {
    uint64_t lo = round > window ? round - window : 0;
    uint64_t hi = round > 0 ? round - 1 : 0;
    return {lo, hi};
}

/// Builds the node's driving proof from its own sent-message history, or
/// nothing if it sent no traffic inside the window (it was not driving).
inline std::optional<DrivingProof> make_driving_proof(
    const BiometricID& subject, const SigningKey& key, uint64_t round,
    const std::vector<std::pair<uint64_t, Digest32>>& sent_history, uint64_t window) {
    auto [lo, hi] = activity_window(round, window);
    DrivingProof proof;
    proof.subject = subject;
    proof.round = round;
    for (const auto& [sent_round, digest] : sent_history)
        if (sent_round >= lo && sent_round <= hi) proof.activity_digests.push_back(digest);
    if (proof.activity_digests.empty()) return std::nullopt;
    std::sort(proof.activity_digests.begin(), proof.activity_digests.end());
    proof.signature = sign(key, proof_canonical_bytes(proof));
    return proof;
}

struct ProofDrop {
    BiometricID subject;
    std::string reason;
};

/// Filters proofs to the qualifying candidate set. A proof qualifies iff
/// its signature verifies under the subject's enrolled key, its round
/// matches, and every cited digest was accepted from that subject inside
/// the window. Bad proofs are dropped with a reason, never an error.
inline std::set<BiometricID> qualify(std::span<const DrivingProof> proofs, uint64_t round,
                                     const DeliveryIndex& delivered, const Registry& registry,
                                     uint64_t window, std::vector<ProofDrop>* drops = nullptr) {
    auto drop = [&](const BiometricID& subject, const char* reason) {
        if (drops) drops->push_back({subject, reason});
    };
    auto [lo, hi] = activity_window(round, window);
    std::set<BiometricID> candidates;
    for (const DrivingProof& p : proofs) {
        if (p.round != round) {
            drop(p.subject, "wrong_round");
            continue;
        }
        if (p.activity_digests.empty()) {
            drop(p.subject, "empty_activity");
            continue;
        }
        const EnrollmentRecord* record = registry.find(p.subject);
        if (record == nullptr) {
            drop(p.subject, "not_enrolled");
            continue;
        }
        if (!verify_cached(record->public_key, proof_canonical_bytes(p), p.signature)) {
            drop(p.subject, "bad_signature");
            continue;
        }
        bool all_delivered = true;
        for (const Digest32& d : p.activity_digests) {
            if (!delivered.has(lo, hi, d, p.subject)) {
                all_delivered = false;
                break;
            }
        }
        if (!all_delivered) {
            drop(p.subject, "undelivered_activity");
            continue;
        }
        candidates.insert(p.subject);
    }
    return candidates;
}

/// Election result for a round; empty candidate set means a skipped round,
/// not an error.
inline std::optional<BiometricID> elect(const std::set<BiometricID>& candidates,
                                        const CreditLedger& ledger) {
    if (candidates.empty()) return std::nullopt;
    return leader(candidates, ledger);
}

enum class VoteDecision : uint8_t { Reject = 0, Accept = 1 };

struct Vote {
    BiometricID voter;
    uint64_t round = 0;
    Digest32 block_hash;
    VoteDecision decision = VoteDecision::Reject;
    Signature signature{};
};

inline Bytes vote_canonical_bytes(const Vote& v) {
    Bytes buf;
    append(buf, v.voter.id.bytes);
    put_u64_be(buf, v.round);
    append(buf, v.block_hash.bytes);
    buf.push_back(static_cast<uint8_t>(v.decision));
    return buf;
}

inline Vote make_vote(const BiometricID& voter, const SigningKey& key, uint64_t round,
                      const Digest32& block_hash, VoteDecision decision) {
    Vote v{voter, round, block_hash, decision, {}};
    v.signature = sign(key, vote_canonical_bytes(v));
    return v;
}

inline bool verify_vote(const Vote& v, const Registry& registry) {
    const EnrollmentRecord* record = registry.find(v.voter);
    if (record == nullptr) return false;
    return verify_cached(record->public_key, vote_canonical_bytes(v), v.signature);
}

enum class RoundPhase : uint8_t { Collecting, Proposed, Committed, Skipped };

inline const char* to_string(RoundPhase p) {
    switch (p) {
        case RoundPhase::Collecting: return "Collecting";
        case RoundPhase::Proposed: return "Proposed";
        case RoundPhase::Committed: return "Committed";
        case RoundPhase::Skipped: return "Skipped";
    }
    return "?";
}

struct RoundState {
    uint64_t round = 0;
    std::set<BiometricID> candidates;
    std::optional<BiometricID> leader;
    std::optional<Block> proposal;
    std::map<BiometricID, VoteDecision> votes;  // one slot per voter
    RoundPhase phase = RoundPhase::Collecting;

    size_t accept_count() const {
        size_t n = 0;
        for (const auto& [voter, d] : votes)
            if (d == VoteDecision::Accept) ++n;
        return n;
    }
};

/// Commit rule: strictly more than half of the online enrolled validators.
inline bool commit_threshold_met(size_t accepts, size_t online) { return 2 * accepts > online; }

/// Deadline resolution. A proposed block with a majority of accepts
/// commits; anything else skips. Committed and Skipped are final.
inline RoundState try_commit(RoundState state, size_t online) {
    if (state.phase == RoundPhase::Committed || state.phase == RoundPhase::Skipped) return state;
    if (state.phase == RoundPhase::Proposed && state.proposal &&
        commit_threshold_met(state.accept_count(), online))
        state.phase = RoundPhase::Committed;
    else
        state.phase = RoundPhase::Skipped;
    return state;
}

struct ProposalResult {
    Block block;
    bool used_heartbeat = false;
};

/// Builds the leader's block: every legality-passing mempool message in
/// ascending digest order, or a single self-signed heartbeat when the
/// mempool yields nothing. heartbeat_seq must be the leader's next unused
/// seq; the flag in the result says whether it was consumed.
inline ProposalResult propose(const BiometricID& leader_id, const SigningKey& key, uint64_t round,
                              const Block& parent, const CreditLedger& ledger,
                              const Registry& registry, const SeqIndex& committed_seq,
                              std::vector<V2XMessage> mempool, uint64_t heartbeat_seq) {
    ProposalResult result;
    // deterministic order before filtering so per-sender seq dedup is stable
    std::sort(mempool.begin(), mempool.end(), [](const V2XMessage& a, const V2XMessage& b) {
        return message_digest(a) < message_digest(b);
    });
    std::vector<V2XMessage> included;
    std::map<BiometricID, std::set<uint64_t>> seqs_in_block;
    std::set<Digest32> digests_in_block;
    for (V2XMessage& m : mempool) {
        if (validate_block_tx(m, ledger, registry, round, committed_seq) != MsgReject::None)
            continue;
        if (!digests_in_block.insert(message_digest(m)).second) continue;
        if (!seqs_in_block[m.sender_id].insert(m.seq).second) continue;
        included.push_back(std::move(m));
    }
    if (included.empty()) {
        V2XMessage heartbeat;
        heartbeat.kind = MsgKind::V2V;
        heartbeat.msg_type = MsgType::Heartbeat;
        heartbeat.sender_id = leader_id;
        heartbeat.credit_claim = ledger.credit_of(leader_id);
        heartbeat.seq = heartbeat_seq;
        heartbeat.timestamp = round;
        sign_message(heartbeat, key);
        included.push_back(std::move(heartbeat));
        result.used_heartbeat = true;
    }

    Block& b = result.block;
    b.transactions = std::move(included);
    b.header.version = kProtocolVersion;
    b.header.prev_hash = parent.hash();
    b.header.merkle_root = compute_tx_root(b);
    b.header.timestamp = round;
    b.header.height = parent.header.height + 1;
    b.header.leader_id = leader_id.id;
    b.header.nonce = round;
    b.leader_signature = sign(key, b.hash().bytes);
    return result;
}

}  // namespace bbc
