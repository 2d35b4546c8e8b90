#pragma once

// Ed25519 signatures (via libsodium): deterministic signatures, 32-byte
// public keys, 64-byte detached signatures. Key pairs derive from 32-byte
// seeds so enrollment is reproducible. verify_cached memoizes verification
// results; broadcast traffic hands the same signed bytes to every receiver
// and the check is pure, so the memo is sound.

#include <sodium.h>

#include <map>
#include <mutex>
#include <optional>

#include "bbc/sha256.hpp"

namespace bbc {

using PublicKey = std::array<uint8_t, 32>;
using Signature = std::array<uint8_t, 64>;
using KeySeed = std::array<uint8_t, 32>;

namespace detail {
inline void ensure_sodium() {
    static const int rc = sodium_init();
    if (rc < 0) throw Error("libsodium failed to initialize");
}
}  // namespace detail

struct SigningKey {
    PublicKey public_key{};
    std::array<uint8_t, 64> secret_key{};
};

inline SigningKey keypair_from_seed(const KeySeed& seed) {
    detail::ensure_sodium();
    SigningKey key;
    crypto_sign_seed_keypair(key.public_key.data(), key.secret_key.data(), seed.data());
    return key;
}

inline Signature sign(const SigningKey& key, std::span<const uint8_t> message) {
    detail::ensure_sodium();
    Signature sig{};
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                         key.secret_key.data());
    return sig;
}

inline bool verify(const PublicKey& pk, std::span<const uint8_t> message, const Signature& sig) {
    detail::ensure_sodium();
    return crypto_sign_verify_detached(sig.data(), message.data(), message.size(), pk.data()) == 0;
}

/// Memoized verify keyed by a digest of (pk, message, sig).
inline bool verify_cached(const PublicKey& pk, std::span<const uint8_t> message,
                          const Signature& sig) {
    Bytes key_input;
    key_input.reserve(32 + message.size() + 64);
    append(key_input, pk);
    append(key_input, message);
    append(key_input, sig);
    Digest32 key = double_sha256(key_input);

    static std::mutex mu;
    static std::map<Digest32, bool> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    bool ok = verify(pk, message, sig);
    {
        std::lock_guard<std::mutex> lock(mu);
        cache.emplace(key, ok);
    }
    return ok;
}

}  // namespace bbc
