#pragma once

// The credit ledger: one non-negative integer per enrolled identity,
// derived purely by replaying the chain. Enrollment grants 1 credit,
// winning a consensus round grants 1 more. Nothing ever decreases a
// credit, and a message's credit claim is only ever checked against the
// replayed value, never taken at face value.

#include <map>

#include "bbc/block.hpp"
#include "bbc/enrollment.hpp"

namespace bbc {

struct CreditLedger {
    std::map<BiometricID, uint64_t> credits;
    int64_t as_of_height = -1;  // -1 = pre-genesis

    uint64_t credit_of(const BiometricID& id) const {
        auto it = credits.find(id);
        if (it == credits.end()) throw Error("credit_of: identity not in ledger");
        return it->second;
    }

    uint64_t total() const {
        uint64_t t = 0;
        for (const auto& [id, c] : credits) t += c;
        return t;
    }

    bool operator==(const CreditLedger&) const = default;
};

struct CreditEvent {
    enum class Kind : uint8_t { Enroll = 0, LeaderReward = 1 };

    Kind kind = Kind::Enroll;
    BiometricID subject;
    int64_t delta = 1;
    int64_t height = -1;  // Enroll events are pre-genesis

    bool operator==(const CreditEvent&) const = default;
};

inline const char* to_string(CreditEvent::Kind k) {
    return k == CreditEvent::Kind::Enroll ? "Enroll" : "LeaderReward";
}

/// Every enrolled identity starts at credit 1, pre-genesis.
inline CreditLedger initial_ledger(const Registry& registry) {
    if (registry.empty()) throw Error("initial_ledger: empty registry");
    CreditLedger ledger;
    for (const auto& [id, record] : registry.records()) ledger.credits[id] = 1;
    ledger.as_of_height = -1;
    return ledger;
}

/// Returns the ledger advanced by one block. Genesis advances the height
/// without a reward; any other block rewards its leader with +1.
inline CreditLedger apply_block(const CreditLedger& ledger, const Block& block) {
    if (ledger.as_of_height != static_cast<int64_t>(block.header.height) - 1)
        throw Error("apply_block: ledger height " + std::to_string(ledger.as_of_height) +
                    " does not precede block height " + std::to_string(block.header.height));
    CreditLedger next = ledger;
    next.as_of_height = static_cast<int64_t>(block.header.height);
    if (block.header.height == 0) return next;  // genesis carries no reward
    BiometricID leader{block.header.leader_id};
    auto it = next.credits.find(leader);
    if (it == next.credits.end()) throw Error("apply_block: leader id is not enrolled");
    it->second += 1;
    return next;
}

/// Credit-maximal candidate; ties broken by smallest id bytes. Order of
/// the candidate container never affects the result.
template <typename CandidateSet>
BiometricID leader(const CandidateSet& candidates, const CreditLedger& ledger) {
    if (candidates.empty()) throw Error("leader: empty candidate set");
    const BiometricID* best = nullptr;
    uint64_t best_credit = 0;
    for (const BiometricID& c : candidates) {
        uint64_t credit = ledger.credit_of(c);  // throws if a candidate is unknown
        if (best == nullptr || credit > best_credit || (credit == best_credit && c < *best)) {
            best = &c;
            best_credit = credit;
        }
    }
    return *best;
}

struct AuditResult {
    CreditLedger ledger;
    std::vector<CreditEvent> events;  // ordered by (height, kind, subject)
};

/// Replays a chain from the initial ledger, emitting the full event log.
/// The chain is assumed validated; structural errors still throw with the
/// offending height.
inline AuditResult audit_chain(const Chain& chain, const Registry& registry) {
    AuditResult result;
    result.ledger = initial_ledger(registry);
    for (const auto& [id, record] : registry.records())
        result.events.push_back({CreditEvent::Kind::Enroll, id, 1, -1});
    for (const Block& block : chain) {
        result.ledger = apply_block(result.ledger, block);
        if (block.header.height > 0)
            result.events.push_back({CreditEvent::Kind::LeaderReward,
                                     BiometricID{block.header.leader_id}, 1,
                                     static_cast<int64_t>(block.header.height)});
    }
    return result;
}

}  // namespace bbc
