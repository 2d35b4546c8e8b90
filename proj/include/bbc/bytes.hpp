#pragma once

// Byte-level plumbing shared by every module: the fixed 32-byte digest
// value, strict lowercase hex codecs, and big-endian integer packing.
// All hashing and signing inputs in this library are defined bit-exactly
// in terms of these helpers.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bbc {

using Bytes = std::vector<uint8_t>;

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline constexpr char kHexDigits[] = "0123456789abcdef";

inline int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;  // uppercase is rejected on purpose: renderings are lowercase
}
}  // namespace detail

inline std::string to_hex(std::span<const uint8_t> data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out.push_back(detail::kHexDigits[b >> 4]);
        out.push_back(detail::kHexDigits[b & 0x0f]);
    }
    return out;
}

inline Bytes from_hex(std::string_view s) {
    if (s.size() % 2 != 0) throw Error("hex string has odd length");
    Bytes out(s.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        int hi = detail::hex_nibble(s[2 * i]);
        int lo = detail::hex_nibble(s[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error("invalid hex character");
        out[i] = static_cast<uint8_t>(hi << 4 | lo);
    }
    return out;
}

/// 32-byte opaque value. Renders as exactly 64 lowercase hex characters.
struct Digest32 {
    std::array<uint8_t, 32> bytes{};

    auto operator<=>(const Digest32&) const = default;

    static Digest32 zero() { return Digest32{}; }

    bool is_zero() const {
        for (uint8_t b : bytes)
            if (b != 0) return false;
        return true;
    }

    std::string hex() const { return to_hex(bytes); }

    static Digest32 from_hex(std::string_view s) {
        if (s.size() != 64) throw Error("digest hex must be 64 characters");
        Bytes raw = bbc::from_hex(s);
        Digest32 d;
        std::copy(raw.begin(), raw.end(), d.bytes.begin());
        return d;
    }
};

inline void append(Bytes& buf, std::span<const uint8_t> data) {
    buf.insert(buf.end(), data.begin(), data.end());
}

inline void put_u32_be(Bytes& buf, uint32_t v) {
    buf.push_back(static_cast<uint8_t>(v >> 24));
    buf.push_back(static_cast<uint8_t>(v >> 16));
    buf.push_back(static_cast<uint8_t>(v >> 8));
    buf.push_back(static_cast<uint8_t>(v));
}

inline void put_u64_be(Bytes& buf, uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        buf.push_back(static_cast<uint8_t>(v >> shift));
}

inline uint32_t read_u32_be(std::span<const uint8_t> buf, size_t at) {
    if (at + 4 > buf.size()) throw Error("u32 read past end of buffer");
    return static_cast<uint32_t>(buf[at]) << 24 | static_cast<uint32_t>(buf[at + 1]) << 16 |
           static_cast<uint32_t>(buf[at + 2]) << 8 | static_cast<uint32_t>(buf[at + 3]);
}

inline uint64_t read_u64_be(std::span<const uint8_t> buf, size_t at) {
    if (at + 8 > buf.size()) throw Error("u64 read past end of buffer");
    uint64_t v = 0;
    for (size_t i = 0; i < 8; ++i) v = v << 8 | buf[at + i];
    return v;
}

/// Strict decimal parse for text records: digits only, no sign, no leading
/// zeros (other than "0" itself), overflow rejected.
inline uint64_t parse_u64(std::string_view s) {
    if (s.empty()) throw Error("empty integer field");
    if (s.size() > 1 && s[0] == '0') throw Error("leading zero in integer field");
    uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw Error("invalid digit in integer field");
        uint64_t digit = static_cast<uint64_t>(c - '0');
        if (v > (UINT64_MAX - digit) / 10) throw Error("integer field out of range");
        v = v * 10 + digit;
    }
    return v;
}

}  // namespace bbc
