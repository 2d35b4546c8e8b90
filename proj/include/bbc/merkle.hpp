#pragma once

// Merkle tree over transaction digests. Levels with an odd node count
// duplicate their last node; a single leaf is its own root. Parent nodes
// are double_sha256(left || right).

#include <cmath>
#include <utility>

#include "bbc/sha256.hpp"

namespace bbc {

inline Digest32 merkle_parent(const Digest32& left, const Digest32& right) {
    Bytes buf;
    buf.reserve(64);
    append(buf, left.bytes);
    append(buf, right.bytes);
    return double_sha256(buf);
}

inline Digest32 merkle_root(std::span<const Digest32> leaves) {
    if (leaves.empty()) throw Error("merkle_root: empty leaf list");
    std::vector<Digest32> level(leaves.begin(), leaves.end());
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(level.back());
        std::vector<Digest32> next;
        next.reserve(level.size() / 2);
        for (size_t i = 0; i < level.size(); i += 2)
            next.push_back(merkle_parent(level[i], level[i + 1]));
        level = std::move(next);
    }
    return level[0];
}

inline Digest32 merkle_root(const std::vector<Digest32>& leaves) {
    return merkle_root(std::span<const Digest32>(leaves.data(), leaves.size()));
}

struct MerkleProof {
    enum class Side : uint8_t { Left = 0, Right = 1 };  // where the sibling sits

    size_t leaf_index = 0;
    std::vector<std::pair<Digest32, Side>> siblings;
};

inline MerkleProof merkle_prove(std::span<const Digest32> leaves, size_t index) {
    if (leaves.empty()) throw Error("merkle_prove: empty leaf list");
    if (index >= leaves.size()) throw Error("merkle_prove: index out of range");
    MerkleProof proof;
    proof.leaf_index = index;
    std::vector<Digest32> level(leaves.begin(), leaves.end());
    size_t pos = index;
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(level.back());
        size_t sibling = pos ^ 1;
        proof.siblings.emplace_back(level[sibling], sibling > pos ? MerkleProof::Side::Right
                                                                  : MerkleProof::Side::Left);
        std::vector<Digest32> next;
        next.reserve(level.size() / 2);
        for (size_t i = 0; i < level.size(); i += 2)
            next.push_back(merkle_parent(level[i], level[i + 1]));
        level = std::move(next);
        pos /= 2;
    }
    return proof;
}

inline bool merkle_verify(const Digest32& root, const Digest32& leaf, const MerkleProof& proof) {
    Digest32 cur = leaf;
    for (const auto& [sibling, side] : proof.siblings)
        cur = side == MerkleProof::Side::Right ? merkle_parent(cur, sibling)
                                               : merkle_parent(sibling, cur);
    return cur == root;
}

}  // namespace bbc
