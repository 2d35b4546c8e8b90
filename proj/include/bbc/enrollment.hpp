#pragma once

// Enrollment: binds a scrambled biometric template to a signing key pair.
// The enrollment authority is a single in-process service holding one key
// pair; it signs (biometric_id || public_key) and the registry keeps one
// record per identity. Only scrambled templates and derived ids are stored
// anywhere; the plain feature vector stays with the caller.

#include <map>
#include <sstream>

#include "bbc/biometric.hpp"
#include "bbc/signature.hpp"

namespace bbc {

struct EnrollmentRecord {
    BiometricID biometric_id;
    ScrambledTemplate scrambled;
    PublicKey public_key{};
    Signature authority_signature{};
};

inline Bytes enrollment_binding_bytes(const BiometricID& id, const PublicKey& pk) {
    Bytes buf;
    append(buf, id.id.bytes);
    append(buf, pk);
    return buf;
}

class Registry {
public:
    bool contains(const BiometricID& id) const { return records_.count(id) != 0; }

    const EnrollmentRecord* find(const BiometricID& id) const {
        auto it = records_.find(id);
        return it == records_.end() ? nullptr : &it->second;
    }

    void add(const EnrollmentRecord& record) {
        auto [it, inserted] = records_.emplace(record.biometric_id, record);
        if (!inserted) throw Error("DuplicateIdentity: biometric id already enrolled");
    }

    size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    // ordered by id bytes
    const std::map<BiometricID, EnrollmentRecord>& records() const { return records_; }

    PublicKey authority_key{};

private:
    std::map<BiometricID, EnrollmentRecord> records_;
};

/// Stand-in for the cloud enrollment service: verifies that the probe is a
/// plausible template, derives the id, issues the binding signature.
class EnrollmentAuthority {
public:
    explicit EnrollmentAuthority(const KeySeed& seed) : key_(keypair_from_seed(seed)) {}

    const PublicKey& public_key() const { return key_.public_key; }

    /// Enrolls a plain template under the deployment scrambling key. The
    /// fresh signing key pair is derived from key_seed; the secret half is
    /// returned to the caller and never retained here.
    std::pair<EnrollmentRecord, SigningKey> enroll(const FeatureVector& v,
                                                   const ScramblingKey& scramble_key,
                                                   const KeySeed& key_seed,
                                                   Registry& registry) const {
        ScrambledTemplate t = scramble(v, scramble_key);
        EnrollmentRecord record;
        record.biometric_id = derive_biometric_id(t);
        record.scrambled = std::move(t);
        SigningKey node_key = keypair_from_seed(key_seed);
        record.public_key = node_key.public_key;
        Bytes binding = enrollment_binding_bytes(record.biometric_id, record.public_key);
        record.authority_signature = sign(key_, binding);
        registry.add(record);  // throws DuplicateIdentity on collision
        registry.authority_key = key_.public_key;
        return {record, node_key};
    }

    bool verify_binding(const EnrollmentRecord& record) const {
        return verify(key_.public_key,
                      enrollment_binding_bytes(record.biometric_id, record.public_key),
                      record.authority_signature);
    }

private:
    SigningKey key_;
};

inline bool verify_binding(const PublicKey& authority_key, const EnrollmentRecord& record) {
    return verify(authority_key, enrollment_binding_bytes(record.biometric_id, record.public_key),
                  record.authority_signature);
}

// --- registry text format ------------------------------------------------
//
//   v=1 authority=<64 hex>
//   id=<64 hex> key=<64 hex> tpl=<hex> pk=<64 hex> asig=<128 hex>
//
// One record per line, fields in fixed order, lowercase hex only.

inline std::string export_registry(const Registry& registry) {
    std::string out = "v=1 authority=" + to_hex(registry.authority_key) + "\n";
    for (const auto& [id, record] : registry.records()) {
        out += "id=" + id.hex();
        out += " key=" + record.scrambled.key_id.hex();
        out += " tpl=" + to_hex(quantize_template(record.scrambled));
        out += " pk=" + to_hex(record.public_key);
        out += " asig=" + to_hex(record.authority_signature);
        out += "\n";
    }
    return out;
}

namespace detail {
/// Consumes "name=" from the front of a field token.
inline std::string_view expect_field(std::string_view token, std::string_view name) {
    if (token.size() < name.size() + 1 || token.substr(0, name.size()) != name ||
        token[name.size()] != '=')
        throw Error("expected field '" + std::string(name) + "'");
    return token.substr(name.size() + 1);
}

inline std::vector<std::string_view> split_tokens(std::string_view line) {
    std::vector<std::string_view> tokens;
    size_t pos = 0;
    while (pos < line.size()) {
        size_t next = line.find(' ', pos);
        if (next == std::string_view::npos) next = line.size();
        if (next == pos) throw Error("malformed record: empty token");
        tokens.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    if (!line.empty() && line.back() == ' ') throw Error("malformed record: trailing space");
    return tokens;
}

template <size_t N>
std::array<uint8_t, N> fixed_hex(std::string_view s) {
    if (s.size() != 2 * N) throw Error("hex field has wrong length");
    Bytes raw = from_hex(s);
    std::array<uint8_t, N> out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}
}  // namespace detail

/// Parses a registry export. Every record is structurally checked and the
/// id is re-derived from the stored template; any inconsistency throws.
inline Registry import_registry(const std::string& text) {
    Registry registry;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) throw Error("registry line " + std::to_string(line_no) + ": empty line");
        auto tokens = detail::split_tokens(line);
        if (!have_header) {
            if (tokens.size() != 2 || tokens[0] != "v=1")
                throw Error("registry header: expected 'v=1 authority=<hex>'");
            registry.authority_key =
                detail::fixed_hex<32>(detail::expect_field(tokens[1], "authority"));
            have_header = true;
            continue;
        }
        if (tokens.size() != 5)
            throw Error("registry line " + std::to_string(line_no) + ": wrong field count");
        EnrollmentRecord record;
        record.biometric_id =
            BiometricID{Digest32::from_hex(detail::expect_field(tokens[0], "id"))};
        Digest32 key_id = Digest32::from_hex(detail::expect_field(tokens[1], "key"));
        Bytes quantized = from_hex(detail::expect_field(tokens[2], "tpl"));
        record.scrambled = dequantize_template(quantized, key_id);
        record.public_key = detail::fixed_hex<32>(detail::expect_field(tokens[3], "pk"));
        record.authority_signature = detail::fixed_hex<64>(detail::expect_field(tokens[4], "asig"));
        if (derive_biometric_id(record.scrambled) != record.biometric_id)
            throw Error("registry line " + std::to_string(line_no) +
                        ": id does not match template");
        if (!verify_binding(registry.authority_key, record))
            throw Error("registry line " + std::to_string(line_no) +
                        ": authority binding does not verify");
        registry.add(record);
    }
    if (!have_header) throw Error("registry file is empty");
    return registry;
}

}  // namespace bbc
