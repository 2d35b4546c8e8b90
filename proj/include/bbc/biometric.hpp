#pragma once

// Biometric templates and their privacy transform. A template is a unit
// feature vector; scrambling multiplies it by a secret orthonormal matrix
// derived from a seed. Orthonormality preserves inner products, so cosine
// matching runs directly on scrambled templates and reaches the same
// decision as matching on the plain vectors, which never have to leave the
// enrollment step. The stable identity (BiometricID) is the double SHA-256
// of the quantized scrambled template, prefixed with the key id.

#include <cmath>
#include <cstdint>

#include "bbc/rng.hpp"
#include "bbc/sha256.hpp"

namespace bbc {

constexpr size_t kFeatureDim = 128;
constexpr double kQuantScale = 32767.0;  // signed 16-bit fixed point, 2^15 - 1

/// Unit-norm feature vector (the plain-domain biometric template).
struct FeatureVector {
    std::vector<double> values;

    size_t dim() const { return values.size(); }
};

struct ScramblingKey {
    uint64_t seed = 0;
    size_t dim = 0;
    std::vector<double> matrix;  // row-major dim x dim, orthonormal

    Digest32 key_id() const {
        Bytes buf;
        put_u64_be(buf, seed);
        return double_sha256(buf);
    }
};

struct ScrambledTemplate {
    std::vector<double> values;
    Digest32 key_id;

    size_t dim() const { return values.size(); }
};

struct BiometricID {
    Digest32 id;

    auto operator<=>(const BiometricID&) const = default;

    std::string hex() const { return id.hex(); }
    static BiometricID from_hex(std::string_view s) { return BiometricID{Digest32::from_hex(s)}; }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw Error("dot: dimension mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline void normalize(std::vector<double>& v) {
    double n = norm(v);
    if (n == 0.0) throw Error("cannot normalize a zero vector");
    for (double& x : v) x /= n;
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw Error("cosine of zero vector");
    return dot(a, b) / (na * nb);
}

/// Random unit vector of dimension d, for synthetic identities.
inline FeatureVector random_unit_vector(SeededRng& rng, size_t d = kFeatureDim) {
    FeatureVector v;
    v.values.resize(d);
    for (double& x : v.values) x = rng.gaussian();
    normalize(v.values);
    return v;
}

/// Genuine probe: the enrolled vector plus per-coordinate Gaussian noise,
/// renormalized.
inline FeatureVector perturbed_probe(const FeatureVector& enrolled, SeededRng& rng,
                                     double sigma = 0.05) {
    FeatureVector probe = enrolled;
    for (double& x : probe.values) x += sigma * rng.gaussian();
    normalize(probe.values);
    return probe;
}

/// Builds the scrambling key for a seed: d x d of seeded Gaussian draws,
/// orthonormalized by modified Gram-Schmidt. Same seed, same matrix.
inline ScramblingKey generate_key(uint64_t seed, size_t d = kFeatureDim) {
    if (d == 0) throw Error("generate_key: zero dimension");
    ScramblingKey key;
    key.seed = seed;
    key.dim = d;
    key.matrix.resize(d * d);
    SeededRng rng(derive_stream_seed(seed, "scramble-matrix", 0));
    for (double& x : key.matrix) x = rng.gaussian();

    // Modified Gram-Schmidt over the rows. A d x d Gaussian matrix is
    // singular with probability zero; regenerate a row from the stream in
    // the measure-zero degenerate case.
    auto row = [&](size_t r) { return std::span<double>(key.matrix.data() + r * d, d); };
    for (size_t r = 0; r < d; ++r) {
        for (size_t p = 0; p < r; ++p) {
            double proj = dot(row(r), row(p));
            for (size_t i = 0; i < d; ++i) row(r)[i] -= proj * row(p)[i];
        }
        double n = norm(row(r));
        while (n < 1e-12) {
            for (size_t i = 0; i < d; ++i) row(r)[i] = rng.gaussian();
            for (size_t p = 0; p < r; ++p) {
                double proj = dot(row(r), row(p));
                for (size_t i = 0; i < d; ++i) row(r)[i] -= proj * row(p)[i];
            }
            n = norm(row(r));
        }
        for (size_t i = 0; i < d; ++i) row(r)[i] /= n;
    }
    return key;
}

inline ScrambledTemplate scramble(const FeatureVector& v, const ScramblingKey& key) {
    if (v.dim() != key.dim) throw Error("scramble: dimension mismatch");
    ScrambledTemplate out;
    out.key_id = key.key_id();
    out.values.resize(key.dim);
    for (size_t r = 0; r < key.dim; ++r)
        out.values[r] =
            dot(std::span<const double>(key.matrix.data() + r * key.dim, key.dim), v.values);
    return out;
}

struct MatchResult {
    double score = 0.0;
    bool accepted = false;
};

/// Cosine match in the scrambled domain. Cross-key comparison is undefined
/// and rejected.
inline MatchResult match_encrypted(const ScrambledTemplate& probe,
                                   const ScrambledTemplate& enrolled, double threshold) {
    if (probe.key_id != enrolled.key_id) throw Error("match_encrypted: key_id mismatch");
    if (probe.dim() != enrolled.dim()) throw Error("match_encrypted: dimension mismatch");
    MatchResult r;
    r.score = cosine_similarity(probe.values, enrolled.values);
    r.accepted = r.score >= threshold;
    return r;
}

/// Round half away from zero to signed 16-bit fixed point.
inline int16_t quantize_value(double x) {
    double scaled = x * kQuantScale;
    double rounded = std::round(scaled);  // std::round is half-away-from-zero
    if (rounded > 32767.0) rounded = 32767.0;
    if (rounded < -32768.0) rounded = -32768.0;
    return static_cast<int16_t>(rounded);
}

inline Bytes quantize_template(const ScrambledTemplate& t) {
    Bytes out;
    out.reserve(t.dim() * 2);
    for (double x : t.values) {
        uint16_t q = static_cast<uint16_t>(quantize_value(x));
        out.push_back(static_cast<uint8_t>(q >> 8));
        out.push_back(static_cast<uint8_t>(q));
    }
    return out;
}

inline ScrambledTemplate dequantize_template(std::span<const uint8_t> quantized,
                                             const Digest32& key_id) {
    if (quantized.size() % 2 != 0) throw Error("quantized template has odd byte count");
    ScrambledTemplate t;
    t.key_id = key_id;
    t.values.resize(quantized.size() / 2);
    for (size_t i = 0; i < t.values.size(); ++i) {
        auto q = static_cast<int16_t>(static_cast<uint16_t>(quantized[2 * i]) << 8 |
                                      quantized[2 * i + 1]);
        t.values[i] = static_cast<double>(q) / kQuantScale;
    }
    return t;
}

/// BiometricID = double_sha256(key_id || big-endian int16 quantization of
/// the scrambled template).
inline BiometricID derive_biometric_id(const ScrambledTemplate& t) {
    Bytes buf;
    append(buf, t.key_id.bytes);
    Bytes q = quantize_template(t);
    append(buf, q);
    return BiometricID{double_sha256(buf)};
}

}  // namespace bbc
