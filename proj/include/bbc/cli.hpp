#pragma once

// Command implementations behind the scenario CLI: run a scenario and
// persist its outputs, validate a stored chain, audit credits, generate a
// fleet registry. Kept out of main() so the test suites drive the exact
// same code paths in-process.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 validation
// failure, 3 audit or golden mismatch, 4 internal error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "bbc/cli_io.hpp"
#include "bbc/sim.hpp"

namespace bbc::cli {

constexpr int kOk = 0;
constexpr int kUsageError = 1;
constexpr int kValidationFailure = 2;
constexpr int kMismatch = 3;
constexpr int kInternalError = 4;

struct EnrolledFleet {
    Registry registry;
    std::vector<SigningKey> keys;  // node id order; callers that only need
                                   // the registry ignore these
};

/// Deterministic fleet enrollment shared by `enroll` and scenario runs:
/// node identities depend only on (seed, node_id).
inline EnrolledFleet build_fleet(uint64_t seed, uint32_t size) {
    EnrolledFleet fleet;
    ScramblingKey scramble_key = generate_key(derive_stream_seed(seed, "scramble-key", 0));
    EnrollmentAuthority authority(World::derive_authority_seed(seed));
    for (uint32_t id = 0; id < size; ++id) {
        SeededRng rng(derive_stream_seed(seed, "node", id));
        FeatureVector fv = random_unit_vector(rng);
        KeySeed key_seed{};
        rng.fill_bytes(key_seed);
        auto [record, key] = authority.enroll(fv, scramble_key, key_seed, fleet.registry);
        fleet.keys.push_back(key);
    }
    return fleet;
}

inline void write_run_result(const RunResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir / "chains");
    write_file(out_dir / "registry.txt", export_registry(result.registry));
    write_file(out_dir / "run.log", result.run_log);
    write_file(out_dir / "metrics.txt", metrics_to_text(result.metrics));
    for (size_t i = 0; i < result.chains.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "node_%03zu.chain", i);
        write_file(out_dir / "chains" / name, chain_to_text(result.chains[i]));
    }
}

/// Byte-compares every regular file under `golden` against its counterpart
/// under `out_dir`. Returns the first differing relative path, if any.
inline std::optional<std::string> compare_golden(const std::filesystem::path& golden,
                                                 const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(golden))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& p : files) {
        fs::path rel = fs::relative(p, golden);
        fs::path mine = out_dir / rel;
        if (!fs::exists(mine)) return rel.string() + " (missing)";
        if (read_file(p) != read_file(mine)) return rel.string();
    }
    return std::nullopt;
}

struct RunOptions {
    std::string config_path;
    std::string out_dir;    // overrides config when set
    std::string golden;     // overrides config when set
    std::string registry;   // optional pre-built fleet registry to check against
};

inline int cmd_run(const RunOptions& options, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    RunConfig config;
    try {
        config = parse_config(read_file(options.config_path));
    } catch (const Error& e) {
        err << "config error: " << e.what() << "\n";
        return kUsageError;
    }
    if (!options.out_dir.empty()) config.out_dir = options.out_dir;
    if (!options.golden.empty()) config.golden = options.golden;
    if (config.out_dir.empty()) {
        err << "config error: no output directory (set out_dir or pass --out)\n";
        return kUsageError;
    }

    RunResult result = run_scenario(config.scenario);

    if (!options.registry.empty()) {
        Registry provided;
        try {
            provided = import_registry(read_file(options.registry));
        } catch (const Error& e) {
            err << "registry error: " << e.what() << "\n";
            return kUsageError;
        }
        if (provided.authority_key != result.registry.authority_key) {
            err << "registry error: authority key does not match scenario seed\n";
            return kUsageError;
        }
        for (const auto& [id, record] : result.registry.records()) {
            const EnrollmentRecord* theirs = provided.find(id);
            if (theirs == nullptr || theirs->public_key != record.public_key ||
                quantize_template(theirs->scrambled) != quantize_template(record.scrambled)) {
                err << "registry error: fleet record " << id.hex()
                    << " missing or inconsistent with scenario seed\n";
                return kUsageError;
            }
        }
    }

    write_run_result(result, config.out_dir);

    if (!config.golden.empty()) {
        auto diff = compare_golden(config.golden, config.out_dir);
        if (diff) {
            err << "golden mismatch: " << *diff << "\n";
            return kMismatch;
        }
    }
    if (config.verbosity >= 1) out << metrics_to_text(result.metrics);
    return kOk;
}

inline int cmd_validate(const std::string& store_path, const std::string& registry_path,
                        std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    Registry registry;
    try {
        registry = import_registry(read_file(registry_path));
    } catch (const Error& e) {
        err << "registry error: " << e.what() << "\n";
        return kValidationFailure;
    }
    Chain chain;
    try {
        chain = chain_from_text(read_file(store_path));
    } catch (const ChainParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kValidationFailure;
    }
    if (chain.empty()) {
        err << "validation failed: no genesis\n";
        return kValidationFailure;
    }
    ChainCheck check = validate_chain(chain, registry);
    if (!check.ok) {
        err << "validation failed: height=" << check.height << " code=" << check.code << " ("
            << check.detail << ")\n";
        return kValidationFailure;
    }
    out << "chain ok: blocks=" << chain.size() << " height=" << chain.back().header.height
        << " head=" << chain_head(chain).hex() << "\n";
    return kOk;
}

inline int cmd_audit(const std::string& store_path, const std::string& registry_path,
                     const std::string& metrics_path = {}, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    Registry registry;
    Chain chain;
    try {
        registry = import_registry(read_file(registry_path));
        chain = chain_from_text(read_file(store_path));
    } catch (const Error& e) {
        err << "audit input error: " << e.what() << "\n";
        return kValidationFailure;
    }
    ChainCheck check = validate_chain(chain, registry);
    if (!check.ok) {
        err << "audit refused, chain invalid: height=" << check.height
            << " code=" << check.code << "\n";
        return kValidationFailure;
    }

    AuditResult audit = audit_chain(chain, registry);
    for (const CreditEvent& e : audit.events)
        out << "event kind=" << to_string(e.kind) << " subject=" << e.subject.hex()
            << " delta=" << e.delta << " height=" << e.height << "\n";
    for (const auto& [id, credit] : audit.ledger.credits)
        out << "credit " << id.hex() << " " << credit << "\n";
    out << "total_credit " << audit.ledger.total() << "\n";
    out << "events " << audit.events.size() << "\n";

    if (!metrics_path.empty()) {
        std::map<std::string, std::string> recorded;
        try {
            std::istringstream in(read_file(metrics_path));
            std::string line;
            while (std::getline(in, line)) {
                size_t eq = line.find('=');
                if (eq == std::string::npos) continue;
                recorded[line.substr(0, eq)] = line.substr(eq + 1);
            }
        } catch (const Error& e) {
            err << "metrics error: " << e.what() << "\n";
            return kUsageError;
        }
        for (const auto& [id, credit] : audit.ledger.credits) {
            auto it = recorded.find("credit_" + id.hex());
            if (it == recorded.end() || it->second != std::to_string(credit)) {
                err << "audit mismatch: credit_" << id.hex() << " replay=" << credit
                    << " recorded=" << (it == recorded.end() ? "<absent>" : it->second) << "\n";
                return kMismatch;
            }
        }
        auto total = recorded.find("total_credit");
        if (total == recorded.end() || total->second != std::to_string(audit.ledger.total())) {
            err << "audit mismatch: total_credit\n";
            return kMismatch;
        }
        out << "metrics snapshot matches\n";
    }
    return kOk;
}

inline int cmd_enroll(uint64_t size, uint64_t seed, const std::string& out_path,
                      std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    if (size == 0) {
        err << "enroll error: fleet size must be at least 1\n";
        return kUsageError;
    }
    if (out_path.empty()) {
        err << "enroll error: output path required (--out)\n";
        return kUsageError;
    }
    EnrolledFleet fleet = build_fleet(seed, static_cast<uint32_t>(size));
    std::filesystem::path p(out_path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    write_file(p, export_registry(fleet.registry));
    out << "enrolled " << fleet.registry.size() << " identities\n";
    return kOk;
}

}  // namespace bbc::cli
