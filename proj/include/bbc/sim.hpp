#pragma once

// Deterministic discrete-event simulation of a fleet on a ring road.
// Every source of randomness is a named stream derived from the scenario
// seed, events are processed in strict (round, tick, insertion) order, and
// nothing reads the wall clock, so a scenario replays byte-identically.
//
// One round runs in fixed tick bands (B = latency_max + 2):
//   tick 0      RoundStart: traffic and driving proofs broadcast
//   tick 2B     proposal deadline: qualify, elect, leader proposes
//   tick 4B     commit deadline: tally votes, commit or skip, trace
//   tick 4B+1   Move: vehicles advance, next round starts
// Every broadcast delivery lands at emission tick + 1 + latency, which
// keeps each phase inside its band.

#include <cstdio>
#include <functional>
#include <queue>
#include <variant>

#include "bbc/scenario.hpp"
#include "bbc/sim_node.hpp"

namespace bbc {

struct SimTime {
    uint64_t round = 0;
    uint64_t tick = 0;
    uint64_t seq = 0;  // insertion sequence, breaks ties

    auto operator<=>(const SimTime&) const = default;
};

enum class TimeoutStage : uint8_t { Proposal = 0, Commit = 1 };

struct SimEvent {
    struct RoundStart {};
    struct Move {};
    struct Timeout {
        TimeoutStage stage;
    };
    struct Deliver {
        uint32_t to;
        std::variant<V2XMessage, DrivingProof, Block, Vote> payload;
    };

    SimTime time;
    std::variant<RoundStart, Timeout, Move, Deliver> body;
};

class EventQueue {
public:
    void push(SimTime when, decltype(SimEvent::body) body) {
        when.seq = next_seq_++;
        heap_.push_back({when, std::move(body)});
        std::push_heap(heap_.begin(), heap_.end(), later);
    }

    bool empty() const { return heap_.empty(); }

    SimEvent pop() {
        std::pop_heap(heap_.begin(), heap_.end(), later);
        SimEvent e = std::move(heap_.back());
        heap_.pop_back();
        return e;
    }

private:
    static bool later(const SimEvent& a, const SimEvent& b) { return b.time < a.time; }
    std::vector<SimEvent> heap_;
    uint64_t next_seq_ = 0;
};

struct RunResult {
    Scenario scenario;
    Registry registry;
    std::vector<Chain> chains;          // per node, node id order
    std::vector<CreditLedger> ledgers;  // per node
    std::string run_log;
    std::map<std::string, std::string> metrics;
    bool converged = false;
};

inline double ring_distance(double a, double b, double road_length) {
    double d = std::fabs(a - b);
    return std::min(d, road_length - d);
}

inline std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

class World {
public:
    explicit World(const Scenario& scenario)
        : scenario_(scenario),
          scramble_key_(generate_key(derive_stream_seed(scenario.seed, "scramble-key", 0))),
          authority_(derive_authority_seed(scenario.seed)) {
        scenario_.validate();
        build_nodes();
    }

    const Scenario& scenario() const { return scenario_; }
    const Registry& registry() const { return registry_; }
    const std::vector<NodeState>& nodes() const { return nodes_; }
    std::vector<NodeState>& nodes() { return nodes_; }
    size_t online_validators() const { return nodes_.size(); }

    static KeySeed derive_authority_seed(uint64_t seed) {
        SeededRng rng(derive_stream_seed(seed, "authority", 0));
        KeySeed s{};
        rng.fill_bytes(s);
        return s;
    }

    /// In-range recipients of a broadcast, with per-recipient latency drawn
    /// from the sender's stream in node id order. The sender never delivers
    /// to itself.
    struct Delivery {
        uint32_t to;
        uint64_t latency;
    };
    std::vector<Delivery> broadcast_plan(uint32_t sender) {
        NodeState& s = nodes_[sender];
        std::vector<Delivery> plan;
        for (uint32_t j = 0; j < nodes_.size(); ++j) {
            if (j == sender) continue;
            double d = ring_distance(s.position, nodes_[j].position, scenario_.road_length);
            if (d > scenario_.radio_range) continue;
            uint64_t latency = s.rng.uniform_int(scenario_.latency_min, scenario_.latency_max);
            if (scenario_.drop_probability > 0.0 &&
                s.rng.unit_double() < scenario_.drop_probability)
                continue;
            plan.push_back({j, latency});
        }
        return plan;
    }

    RunResult run() {
        log_logins();
        queue_.push({1, 0, 0}, SimEvent::RoundStart{});
        while (!queue_.empty()) {
            SimEvent e = queue_.pop();
            std::visit(
                [&](auto&& body) {
                    using T = std::decay_t<decltype(body)>;
                    if constexpr (std::is_same_v<T, SimEvent::RoundStart>)
                        on_round_start(e.time.round);
                    else if constexpr (std::is_same_v<T, SimEvent::Timeout>)
                        on_timeout(e.time.round, body.stage);
                    else if constexpr (std::is_same_v<T, SimEvent::Move>)
                        on_move(e.time.round);
                    else if constexpr (std::is_same_v<T, SimEvent::Deliver>)
                        on_deliver(e.time, body);
                },
                e.body);
        }
        return finish();
    }

private:
    uint64_t band() const { return scenario_.latency_max + 2; }

    void build_nodes() {
        std::vector<AdversaryMode> modes(scenario_.n_vehicles, AdversaryMode::Honest);
        uint32_t next_slot = scenario_.n_vehicles;  // assign from the top id down
        for (const auto& assignment : scenario_.adversaries)
            for (uint32_t i = 0; i < assignment.count; ++i) modes[--next_slot] = assignment.mode;

        uint32_t total = scenario_.n_vehicles + scenario_.n_infra;
        nodes_.reserve(total);
        for (uint32_t id = 0; id < total; ++id) {
            NodeState node(id, derive_stream_seed(scenario_.seed, "node", id));
            node.is_vehicle = id < scenario_.n_vehicles;
            node.behavior = node.is_vehicle ? modes[id] : AdversaryMode::Honest;

            FeatureVector fv = random_unit_vector(node.rng);
            KeySeed key_seed{};
            node.rng.fill_bytes(key_seed);
            auto [record, key] = authority_.enroll(fv, scramble_key_, key_seed, registry_);
            node.record = record;
            node.key = key;

            if (node.is_vehicle) {
                node.position = scenario_.road_length * node.rng.unit_double();
                node.speed = 10.0 + 20.0 * node.rng.unit_double();  // m/s, constant
            } else {
                uint32_t slot = id - scenario_.n_vehicles;
                node.position = scenario_.road_length * slot / scenario_.n_infra;
                node.speed = 0.0;
            }
            node.login_probe = scramble(perturbed_probe(fv, node.rng), scramble_key_);
            nodes_.push_back(std::move(node));
        }
        // ledgers only exist once the whole fleet is enrolled
        for (NodeState& node : nodes_) {
            node.chain.push_back(genesis_block());
            node.ledger = apply_block(initial_ledger(registry_), node.chain.front());
        }
    }

    void log_logins() {
        for (NodeState& node : nodes_) {
            MatchResult m =
                match_encrypted(node.login_probe, node.record.scrambled, scenario_.match_threshold);
            if (m.accepted) ++logins_accepted_;
            log_ += "login node=" + std::to_string(node.node_id) +
                    " id=" + node.id().hex() + " score=" + format_fixed(m.score, 9) +
                    " accepted=" + (m.accepted ? "1" : "0") + "\n";
        }
    }

    void deliver_all(uint32_t sender, uint64_t round, uint64_t emit_tick,
                     std::variant<V2XMessage, DrivingProof, Block, Vote> payload) {
        for (const Delivery& d : broadcast_plan(sender))
            queue_.push({round, emit_tick + 1 + d.latency, 0},
                        SimEvent::Deliver{d.to, payload});
    }

    // --- round phases ----------------------------------------------------

    void on_round_start(uint64_t round) {
        for (NodeState& node : nodes_) {
            node.begin_round(round, scenario_.activity_window);
            if (!node.is_vehicle) continue;
            switch (node.behavior) {
                case AdversaryMode::Honest: emit_honest_traffic(node, round); break;
                case AdversaryMode::ForgeSignature:
                case AdversaryMode::InflateClaim: emit_tampered_traffic(node, round); break;
                case AdversaryMode::Replay: emit_replayed_traffic(node, round); break;
                case AdversaryMode::Drop: break;  // silent by definition
            }
            if (node.behavior != AdversaryMode::Drop) {
                auto proof = make_driving_proof(node.id(), node.key, round, node.sent_history,
                                                scenario_.activity_window);
                if (proof) {
                    node.round_proofs.push_back(*proof);  // own proof, no self-delivery
                    deliver_all(node.node_id, round, 0, *proof);
                }
            }
        }
        queue_.push({round, 2 * band(), 0}, SimEvent::Timeout{TimeoutStage::Proposal});
        queue_.push({round, 4 * band(), 0}, SimEvent::Timeout{TimeoutStage::Commit});
        queue_.push({round, 4 * band() + 1, 0}, SimEvent::Move{});
    }

    V2XMessage build_traffic(NodeState& node, uint64_t round) {
        V2XMessage m;
        uint64_t pick = node.rng.uniform_below(3);
        m.msg_type = pick == 0   ? MsgType::SafetyAlert
                     : pick == 1 ? MsgType::TrafficInfo
                                 : MsgType::ServiceRequest;
        m.kind = m.msg_type == MsgType::ServiceRequest ? MsgKind::V2I : MsgKind::V2V;
        m.payload.resize(16);
        node.rng.fill_bytes(m.payload);
        m.sender_id = node.id();
        m.credit_claim = node.ledger.credit_of(node.id());
        m.seq = node.next_seq++;
        m.timestamp = round;
        return m;
    }

    void emit_honest_traffic(NodeState& node, uint64_t round) {
        V2XMessage m = build_traffic(node, round);
        sign_message(m, node.key);
        node.note_own_message(round, m);
        deliver_all(node.node_id, round, 0, std::move(m));
    }

    void emit_tampered_traffic(NodeState& node, uint64_t round) {
        V2XMessage m = build_traffic(node, round);
        if (node.behavior == AdversaryMode::InflateClaim) {
            m.credit_claim += 1 + node.rng.uniform_below(3);
            sign_message(m, node.key);
        } else {  // ForgeSignature: shape is honest, signature is noise
            sign_message(m, node.key);
            node.rng.fill_bytes(m.signature);
        }
        node.note_own_message(round, m);
        deliver_all(node.node_id, round, 0, std::move(m));
    }

    void emit_replayed_traffic(NodeState& node, uint64_t round) {
        if (node.capture_prev.empty()) return;
        const V2XMessage& captured =
            node.capture_prev[node.rng.uniform_below(node.capture_prev.size())];
        // verbatim re-send under the original sender's identity; the
        // adversary still cites it as own activity, which qualify() rejects
        node.sent_history.emplace_back(round, message_digest(captured));
        deliver_all(node.node_id, round, 0, captured);
    }

    void on_deliver(const SimTime& when, SimEvent::Deliver& d) {
        NodeState& node = nodes_[d.to];
        std::visit(
            [&](auto&& payload) {
                using T = std::decay_t<decltype(payload)>;
                if constexpr (std::is_same_v<T, V2XMessage>)
                    receive_traffic(node, when.round, payload);
                else if constexpr (std::is_same_v<T, DrivingProof>)
                    node.round_proofs.push_back(payload);
                else if constexpr (std::is_same_v<T, Block>) receive_proposal(node, when, payload);
                else if constexpr (std::is_same_v<T, Vote>) receive_vote(node, when.round, payload);
            },
            d.payload);
    }

    void receive_traffic(NodeState& node, uint64_t round, const V2XMessage& m) {
        MsgReject r = validate_message(m, node.ledger, registry_, round, node.last_seq_seen);
        if (r != MsgReject::None) {
            ++rejections_[r];
            log_ += "reject round=" + std::to_string(round) +
                    " node=" + std::to_string(node.node_id) + " sender=" + m.sender_id.hex() +
                    " seq=" + std::to_string(m.seq) + " code=" + to_string(r) + "\n";
            return;
        }
        node.accept_traffic(round, m);
    }

    void on_timeout(uint64_t round, TimeoutStage stage) {
        if (stage == TimeoutStage::Proposal) {
            for (NodeState& node : nodes_) run_election(node, round);
        } else {
            for (NodeState& node : nodes_) resolve_round(node);
            trace_round(round);
        }
    }

    void run_election(NodeState& node, uint64_t round) {
        std::vector<ProofDrop> drops;
        node.round_state.candidates =
            qualify(node.round_proofs, round, node.delivered, registry_,
                    scenario_.activity_window, &drops);
        if (node.node_id == 0) {
            for (const ProofDrop& d : drops) {
                ++proof_drops_;
                log_ += "proofdrop round=" + std::to_string(round) + " subject=" + d.subject.hex() +
                        " reason=" + d.reason + "\n";
            }
        }
        node.round_state.leader = elect(node.round_state.candidates, node.ledger);
        if (!node.round_state.leader) {
            node.round_state.phase = RoundPhase::Skipped;
            return;
        }
        if (*node.round_state.leader != node.id()) return;

        // this node leads: build and broadcast the proposal, vote for it
        std::vector<V2XMessage> pool;
        pool.reserve(node.mempool.size());
        for (const auto& [digest, msg] : node.mempool) pool.push_back(msg);
        ProposalResult p = propose(node.id(), node.key, round, node.chain.back(), node.ledger,
                                   registry_, node.committed_seq, std::move(pool), node.next_seq);
        if (p.used_heartbeat) {
            ++heartbeats_;
            node.next_seq++;
        }
        node.round_state.proposal = p.block;
        node.round_state.phase = RoundPhase::Proposed;
        deliver_all(node.node_id, round, 2 * band(), p.block);
        cast_vote(node, round, 2 * band(), p.block.hash(), VoteDecision::Accept);
    }

    void cast_vote(NodeState& node, uint64_t round, uint64_t tick, const Digest32& hash,
                   VoteDecision decision) {
        if (node.behavior == AdversaryMode::Drop) return;  // withholds votes
        Vote v = make_vote(node.id(), node.key, round, hash, decision);
        node.votes_received.emplace(v.voter, v);  // own vote counts too
        deliver_all(node.node_id, round, tick, v);
    }

    void receive_proposal(NodeState& node, const SimTime& when, const Block& block) {
        if (node.round_state.round != when.round || node.round_state.proposal) return;
        if (node.round_state.phase == RoundPhase::Skipped) return;  // no candidates seen here
        BlockCheck check = validate_block(block, node.chain.back(), node.ledger, registry_,
                                          node.committed_seq, node.round_state.leader);
        if (check.ok()) {
            node.round_state.proposal = block;
            node.round_state.phase = RoundPhase::Proposed;
        } else if (node.node_id == 0) {
            log_ += "badproposal round=" + std::to_string(when.round) + " code=" +
                    to_string(check.code) + "\n";
        }
        cast_vote(node, when.round, when.tick, block.hash(),
                  check.ok() ? VoteDecision::Accept : VoteDecision::Reject);
    }

    void receive_vote(NodeState& node, uint64_t round, const Vote& v) {
        if (v.round != round) return;
        if (!verify_vote(v, registry_)) {
            if (node.node_id == 0)
                log_ += "badvote round=" + std::to_string(round) + " voter=" + v.voter.hex() + "\n";
            return;
        }
        node.votes_received.emplace(v.voter, v);  // duplicates keep the first
    }

    void resolve_round(NodeState& node) {
        if (node.round_state.proposal) {
            Digest32 expect = node.round_state.proposal->hash();
            for (const auto& [voter, vote] : node.votes_received)
                if (vote.block_hash == expect) node.round_state.votes[voter] = vote.decision;
        }
        node.round_state = try_commit(std::move(node.round_state), online_validators());
        if (node.round_state.phase == RoundPhase::Committed)
            node.commit_block(*node.round_state.proposal);
    }

    void trace_round(uint64_t round) {
        const NodeState& node = nodes_[0];  // observer view
        const RoundState& rs = node.round_state;
        std::string candidates;
        for (const BiometricID& c : rs.candidates) {
            if (!candidates.empty()) candidates += ",";
            candidates += c.hex();
        }
        size_t rejects = rs.votes.size() - rs.accept_count();
        log_ += "round=" + std::to_string(round) + " candidates=" +
                (candidates.empty() ? "-" : candidates) +
                " leader=" + (rs.leader ? rs.leader->hex() : "-") +
                " proposal=" + (rs.proposal ? rs.proposal->hash().hex() : "-") +
                " accepts=" + std::to_string(rs.accept_count()) +
                " rejects=" + std::to_string(rejects) +
                " online=" + std::to_string(online_validators()) +
                " outcome=" + to_string(rs.phase) + "\n";
        if (!rs.candidates.empty()) ++candidate_rounds_;
        if (rs.phase == RoundPhase::Committed) {
            ++committed_rounds_;
            ++rounds_led_[*rs.leader];
        }
    }

    void on_move(uint64_t round) {
        for (NodeState& node : nodes_) {
            if (!node.is_vehicle) continue;
            node.position = std::fmod(node.position + node.speed, scenario_.road_length);
        }
        if (round < scenario_.rounds) queue_.push({round + 1, 0, 0}, SimEvent::RoundStart{});
    }

    // --- results ----------------------------------------------------------

    RunResult finish() {
        RunResult result;
        result.scenario = scenario_;
        result.registry = registry_;
        result.run_log = std::move(log_);
        Digest32 head0 = chain_head(nodes_[0].chain);
        result.converged = true;
        for (const NodeState& node : nodes_) {
            result.chains.push_back(node.chain);
            result.ledgers.push_back(node.ledger);
            if (chain_head(node.chain) != head0) result.converged = false;
        }

        auto& m = result.metrics;
        m["v"] = "1";
        m["seed"] = std::to_string(scenario_.seed);
        m["rounds"] = std::to_string(scenario_.rounds);
        m["enrolled"] = std::to_string(registry_.size());
        m["online"] = std::to_string(online_validators());
        m["candidate_rounds"] = std::to_string(candidate_rounds_);
        m["committed_blocks"] = std::to_string(committed_rounds_);
        m["final_height"] = std::to_string(nodes_[0].chain.back().header.height);
        double rate = candidate_rounds_ == 0
                          ? 1.0
                          : static_cast<double>(committed_rounds_) / candidate_rounds_;
        m["commit_rate"] = format_fixed(rate, 6);
        uint64_t max_led = 0;
        for (const auto& [id, n] : rounds_led_) max_led = std::max(max_led, n);
        double concentration =
            committed_rounds_ == 0 ? 0.0 : static_cast<double>(max_led) / committed_rounds_;
        m["leader_concentration"] = format_fixed(concentration, 6);
        m["converged"] = result.converged ? "1" : "0";
        m["heartbeats"] = std::to_string(heartbeats_);
        m["proof_drops"] = std::to_string(proof_drops_);
        m["logins_accepted"] = std::to_string(logins_accepted_);
        uint64_t total_rejections = 0;
        for (MsgReject code : {MsgReject::NotEnrolled, MsgReject::BadSignature, MsgReject::Replay,
                               MsgReject::ClaimMismatch, MsgReject::Stale}) {
            uint64_t n = rejections_.count(code) ? rejections_.at(code) : 0;
            m[std::string("reject_") + to_string(code)] = std::to_string(n);
            total_rejections += n;
        }
        m["rejections_total"] = std::to_string(total_rejections);
        m["total_credit"] = std::to_string(nodes_[0].ledger.total());
        for (const auto& [id, credit] : nodes_[0].ledger.credits)
            m["credit_" + id.hex()] = std::to_string(credit);
        return result;
    }

    Scenario scenario_;
    ScramblingKey scramble_key_;
    EnrollmentAuthority authority_;
    Registry registry_;
    std::vector<NodeState> nodes_;
    EventQueue queue_;
    std::string log_;

    std::map<MsgReject, uint64_t> rejections_;
    std::map<BiometricID, uint64_t> rounds_led_;
    uint64_t candidate_rounds_ = 0;
    uint64_t committed_rounds_ = 0;
    uint64_t heartbeats_ = 0;
    uint64_t proof_drops_ = 0;
    uint64_t logins_accepted_ = 0;
};

inline RunResult run_scenario(const Scenario& scenario) { return World(scenario).run(); }

inline std::string metrics_to_text(const std::map<std::string, std::string>& metrics) {
    std::string out;
    for (const auto& [k, v] : metrics) out += k + "=" + v + "\n";
    return out;
}

}  // namespace bbc
