#pragma once

// Per-node protocol state for the simulation: committed chain and ledger,
// receive-time replay defense, the delivered-traffic index that backs
// Proof-of-Driving qualification, the mempool, and per-round consensus
// state. Handlers run strictly sequentially; nodes never share state.

#include "bbc/scenario.hpp"

namespace bbc {

struct NodeState {
    NodeState(uint32_t id, uint64_t stream_seed) : node_id(id), rng(stream_seed) {}

    uint32_t node_id;
    bool is_vehicle = true;
    AdversaryMode behavior = AdversaryMode::Honest;
    EnrollmentRecord record;
    SigningKey key;
    SeededRng rng;
    double position = 0.0;
    double speed = 0.0;
    ScrambledTemplate login_probe;

    Chain chain;
    CreditLedger ledger;
    SeqIndex committed_seq;   // per-sender max seq committed in the chain
    SeqIndex last_seq_seen;   // receive-time replay defense, includes own traffic
    DeliveryIndex delivered;  // accepted traffic, backs PoD qualification
    std::map<Digest32, V2XMessage> mempool;
    std::vector<std::pair<uint64_t, Digest32>> sent_history;  // (round, digest)
    uint64_t next_seq = 1;

    std::vector<V2XMessage> capture_prev;  // legal traffic seen last round
    std::vector<V2XMessage> capture_cur;

    RoundState round_state;
    std::vector<DrivingProof> round_proofs;
    std::map<BiometricID, Vote> votes_received;  // dedup by voter, first wins

    BiometricID id() const { return record.biometric_id; }

    void begin_round(uint64_t round, uint64_t window = kDefaultActivityWindow) {
        round_state = RoundState{};
        round_state.round = round;
        round_proofs.clear();
        votes_received.clear();
        capture_prev = std::move(capture_cur);
        capture_cur.clear();

        uint64_t keep_from = round > window ? round - window : 0;
        delivered.prune_before(keep_from);
        std::erase_if(sent_history, [&](const auto& e) { return e.first < keep_from; });
        // messages too old to be fresh in any future block can leave the pool
        std::erase_if(mempool, [&](const auto& e) {
            return e.second.timestamp + kFreshnessWindow < round;
        });
    }

    /// Bookkeeping for the node's own broadcast: it counts as delivered
    /// activity, sits in the local mempool, and bumps the replay floor so
    /// a copy bounced back at us is recognized.
    void note_own_message(uint64_t round, const V2XMessage& m) {
        Digest32 digest = message_digest(m);
        sent_history.emplace_back(round, digest);
        delivered.add(round, digest, m.sender_id);
        mempool.emplace(digest, m);
        uint64_t& floor = last_seq_seen[m.sender_id];
        floor = std::max(floor, m.seq);
    }

    void accept_traffic(uint64_t round, const V2XMessage& m) {
        Digest32 digest = message_digest(m);
        last_seq_seen[m.sender_id] = m.seq;
        delivered.add(round, digest, m.sender_id);
        mempool.emplace(digest, m);
        capture_cur.push_back(m);
    }

    void commit_block(const Block& block) {
        chain.push_back(block);
        record_block_seqs(committed_seq, block);
        ledger = apply_block(ledger, block);
        for (const auto& tx : block.transactions) mempool.erase(message_digest(tx));
    }
};

}  // namespace bbc
