#pragma once

// Chain persistence: one block per line of self-describing key=value
// tokens in canonical order, every digest and signature lowercase hex,
// and a per-record format version. The parser is deliberately strict --
// field order, token counts, hex case and integer ranges are all enforced
// -- so a reloaded chain is bit-identical to what was written and any
// stray edit surfaces as a parse or validation failure.

#include <sstream>

#include "bbc/block.hpp"
#include "bbc/enrollment.hpp"

namespace bbc {

constexpr uint32_t kChainStoreVersion = 1;

inline std::string block_to_line(const Block& b) {
    std::string line = "v=" + std::to_string(kChainStoreVersion);
    line += " ver=" + std::to_string(b.header.version);
    line += " prev=" + b.header.prev_hash.hex();
    line += " merkle=" + b.header.merkle_root.hex();
    line += " time=" + std::to_string(b.header.timestamp);
    line += " height=" + std::to_string(b.header.height);
    line += " leader=" + b.header.leader_id.hex();
    line += " nonce=" + std::to_string(b.header.nonce);
    line += " ntx=" + std::to_string(b.transactions.size());
    for (const auto& tx : b.transactions) line += " tx=" + to_hex(message_wire_bytes(tx));
    bool unsigned_genesis = b.header.height == 0;
    line += " sig=";
    line += unsigned_genesis ? "-" : to_hex(b.leader_signature);
    return line;
}

inline Block block_from_line(std::string_view line) {
    auto tokens = detail::split_tokens(line);
    if (tokens.size() < 10) throw Error("block record: too few fields");
    if (parse_u64(detail::expect_field(tokens[0], "v")) != kChainStoreVersion)
        throw Error("block record: unsupported format version");
    Block b;
    uint64_t ver = parse_u64(detail::expect_field(tokens[1], "ver"));
    if (ver > UINT32_MAX) throw Error("block record: version out of range");
    b.header.version = static_cast<uint32_t>(ver);
    b.header.prev_hash = Digest32::from_hex(detail::expect_field(tokens[2], "prev"));
    b.header.merkle_root = Digest32::from_hex(detail::expect_field(tokens[3], "merkle"));
    b.header.timestamp = parse_u64(detail::expect_field(tokens[4], "time"));
    b.header.height = parse_u64(detail::expect_field(tokens[5], "height"));
    b.header.leader_id = Digest32::from_hex(detail::expect_field(tokens[6], "leader"));
    b.header.nonce = parse_u64(detail::expect_field(tokens[7], "nonce"));
    uint64_t ntx = parse_u64(detail::expect_field(tokens[8], "ntx"));
    if (tokens.size() != 10 + ntx) throw Error("block record: transaction count mismatch");
    for (uint64_t i = 0; i < ntx; ++i) {
        Bytes wire = from_hex(detail::expect_field(tokens[9 + i], "tx"));
        b.transactions.push_back(parse_message_wire(wire));
    }
    std::string_view sig = detail::expect_field(tokens.back(), "sig");
    if (sig == "-") {
        if (b.header.height != 0) throw Error("block record: only genesis may be unsigned");
    } else {
        b.leader_signature = detail::fixed_hex<64>(sig);
    }
    return b;
}

inline std::string chain_to_text(const Chain& chain) {
    std::string out;
    for (const Block& b : chain) {
        out += block_to_line(b);
        out += '\n';
    }
    return out;
}

struct ChainParseError : Error {
    size_t line_no;
    ChainParseError(size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_no(line) {}
};

inline Chain chain_from_text(const std::string& text) {
    Chain chain;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        try {
            chain.push_back(block_from_line(line));
        } catch (const Error& e) {
            throw ChainParseError(line_no, e.what());
        }
    }
    return chain;
}

}  // namespace bbc
