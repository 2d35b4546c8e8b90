#pragma once

// V2V/V2I message format. Canonical bytes are the signed portion: every
// field in fixed order, each prefixed with a big-endian 32-bit length.
// Wire bytes append the length-prefixed signature; the message digest is
// double_sha256 of the wire bytes, so any byte of a committed message is
// covered either by the Merkle root or by the signature check.

#include "bbc/biometric.hpp"
#include "bbc/signature.hpp"

namespace bbc {

constexpr size_t kMaxPayloadBytes = 1024;

enum class MsgKind : uint8_t { V2V = 0, V2I = 1 };
enum class MsgType : uint8_t { SafetyAlert = 0, TrafficInfo = 1, ServiceRequest = 2, Heartbeat = 3 };

inline const char* to_string(MsgType t) {
    switch (t) {
        case MsgType::SafetyAlert: return "SafetyAlert";
        case MsgType::TrafficInfo: return "TrafficInfo";
        case MsgType::ServiceRequest: return "ServiceRequest";
        case MsgType::Heartbeat: return "Heartbeat";
    }
    return "?";
}

struct V2XMessage {
    MsgKind kind = MsgKind::V2V;
    MsgType msg_type = MsgType::TrafficInfo;
    BiometricID sender_id;
    uint64_t credit_claim = 0;
    uint64_t seq = 0;        // per-sender counter, starts at 1
    uint64_t timestamp = 0;  // round number
    Bytes payload;
    Signature signature{};

    bool operator==(const V2XMessage&) const = default;
};

namespace detail {
inline void put_field(Bytes& buf, std::span<const uint8_t> field) {
    put_u32_be(buf, static_cast<uint32_t>(field.size()));
    append(buf, field);
}

inline void put_field_u8(Bytes& buf, uint8_t v) { put_field(buf, std::span<const uint8_t>(&v, 1)); }

inline void put_field_u64(Bytes& buf, uint64_t v) {
    Bytes tmp;
    put_u64_be(tmp, v);
    put_field(buf, tmp);
}
}  // namespace detail

inline Bytes canonical_message_bytes(const V2XMessage& m) {
    if (m.payload.size() > kMaxPayloadBytes) throw Error("message payload exceeds 1 KiB");
    Bytes buf;
    detail::put_field_u8(buf, static_cast<uint8_t>(m.kind));
    detail::put_field_u8(buf, static_cast<uint8_t>(m.msg_type));
    detail::put_field(buf, m.sender_id.id.bytes);
    detail::put_field_u64(buf, m.credit_claim);
    detail::put_field_u64(buf, m.seq);
    detail::put_field_u64(buf, m.timestamp);
    detail::put_field(buf, m.payload);
    return buf;
}

inline Bytes message_wire_bytes(const V2XMessage& m) {
    Bytes buf = canonical_message_bytes(m);
    detail::put_field(buf, m.signature);
    return buf;
}

inline Digest32 message_digest(const V2XMessage& m) { return double_sha256(message_wire_bytes(m)); }

inline void sign_message(V2XMessage& m, const SigningKey& key) {
    m.signature = sign(key, canonical_message_bytes(m));
}

inline bool verify_message_signature(const V2XMessage& m, const PublicKey& pk) {
    Bytes canonical = canonical_message_bytes(m);
    return verify_cached(pk, canonical, m.signature);
}

/// Strict inverse of message_wire_bytes.
inline V2XMessage parse_message_wire(std::span<const uint8_t> wire) {
    V2XMessage m;
    size_t at = 0;
    auto next_field = [&](size_t expected_len, bool variable = false) {
        uint32_t len = read_u32_be(wire, at);
        at += 4;
        if (!variable && len != expected_len) throw Error("message field has wrong length");
        if (variable && len > expected_len) throw Error("message field too long");
        if (at + len > wire.size()) throw Error("truncated message");
        std::span<const uint8_t> field = wire.subspan(at, len);
        at += len;
        return field;
    };
    auto kind = next_field(1);
    if (kind[0] > 1) throw Error("bad message kind");
    m.kind = static_cast<MsgKind>(kind[0]);
    auto mt = next_field(1);
    if (mt[0] > 3) throw Error("bad message type");
    m.msg_type = static_cast<MsgType>(mt[0]);
    auto sid = next_field(32);
    std::copy(sid.begin(), sid.end(), m.sender_id.id.bytes.begin());
    m.credit_claim = read_u64_be(next_field(8), 0);
    m.seq = read_u64_be(next_field(8), 0);
    m.timestamp = read_u64_be(next_field(8), 0);
    auto payload = next_field(kMaxPayloadBytes, true);
    m.payload.assign(payload.begin(), payload.end());
    auto sig = next_field(64);
    std::copy(sig.begin(), sig.end(), m.signature.begin());
    if (at != wire.size()) throw Error("trailing bytes after message");
    return m;
}

}  // namespace bbc
