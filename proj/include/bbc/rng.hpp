#pragma once

// Seeded random streams. std::mt19937_64 output is pinned by the standard,
// but the standard distributions are not, so the draw algorithms here are
// spelled out explicitly: every stream replays bit-identically for a given
// seed regardless of the standard library in use.

#include <cmath>
#include <random>

#include "bbc/sha256.hpp"

namespace bbc {

class SeededRng {
public:
    explicit SeededRng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, bound) by rejection; bound must be positive.
    uint64_t uniform_below(uint64_t bound) {
        if (bound == 0) throw Error("uniform_below: zero bound");
        uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % bound;
    }

    /// Uniform integer in [lo, hi] inclusive.
    uint64_t uniform_int(uint64_t lo, uint64_t hi) {
        if (lo > hi) throw Error("uniform_int: empty range");
        return lo + uniform_below(hi - lo + 1);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Standard normal draw, Marsaglia polar method.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * unit_double() - 1.0;
            v = 2.0 * unit_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        have_spare_ = true;
        return u * scale;
    }

    void fill_bytes(std::span<uint8_t> out) {
        size_t i = 0;
        while (i < out.size()) {
            uint64_t v = eng_();
            for (int shift = 56; shift >= 0 && i < out.size(); shift -= 8)
                out[i++] = static_cast<uint8_t>(v >> shift);
        }
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Derives a named substream seed from a root seed. Hash-based so streams
/// for different (tag, index) pairs never overlap.
inline uint64_t derive_stream_seed(uint64_t root_seed, std::string_view tag, uint64_t index) {
    Bytes buf;
    put_u64_be(buf, root_seed);
    append(buf, std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(tag.data()), tag.size()));
    put_u64_be(buf, index);
    Digest32 d = double_sha256(buf);
    return read_u64_be(d.bytes, 0);
}

}  // namespace bbc
