// Scenario CLI for the biometric-blockchain vehicle network simulator.
//
//   bbc run      --config PATH [--out DIR] [--golden PATH] [--registry PATH]
//   bbc validate STORE --registry PATH
//   bbc audit    STORE --registry PATH [--metrics PATH]
//   bbc enroll   --size N --seed N --out FILE

#include <CLI11.hpp>

#include "bbc/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"biometric blockchain vehicle-network simulator"};
    app.require_subcommand(1);

    bbc::cli::RunOptions run_options;
    CLI::App* run = app.add_subcommand("run", "execute a scenario and write its output tree");
    run->add_option("--config", run_options.config_path, "scenario config file")->required();
    run->add_option("--out", run_options.out_dir, "output directory (overrides config out_dir)");
    run->add_option("--golden", run_options.golden, "directory of expected outputs to compare");
    run->add_option("--registry", run_options.registry, "pre-built fleet registry to check");

    std::string store_path, registry_path, metrics_path;
    CLI::App* validate = app.add_subcommand("validate", "validate a stored chain");
    validate->add_option("store", store_path, "chain store file")->required();
    validate->add_option("--registry", registry_path, "registry file")->required();

    std::string audit_store, audit_registry;
    CLI::App* audit = app.add_subcommand("audit", "replay credits and print the event log");
    audit->add_option("store", audit_store, "chain store file")->required();
    audit->add_option("--registry", audit_registry, "registry file")->required();
    audit->add_option("--metrics", metrics_path, "metrics file with a recorded credit snapshot");

    uint64_t size = 0, seed = 1;
    std::string enroll_out;
    CLI::App* enroll = app.add_subcommand("enroll", "generate a synthetic fleet registry");
    enroll->add_option("--size", size, "fleet size")->required();
    enroll->add_option("--seed", seed, "fleet seed")->required();
    enroll->add_option("--out", enroll_out, "registry output file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : bbc::cli::kUsageError;
    }

    try {
        if (run->parsed()) return bbc::cli::cmd_run(run_options);
        if (validate->parsed()) return bbc::cli::cmd_validate(store_path, registry_path);
        if (audit->parsed()) return bbc::cli::cmd_audit(audit_store, audit_registry, metrics_path);
        if (enroll->parsed()) return bbc::cli::cmd_enroll(size, seed, enroll_out);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return bbc::cli::kInternalError;
    }
    return bbc::cli::kUsageError;
}
