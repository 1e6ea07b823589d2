#pragma once

// Command-line front end: `run` executes a configured experiment and writes
// manifest + CSV (+ SVG), `grad-check` runs the finite-difference suites,
// `replay` re-emits outputs from a saved log.
// Exit codes: 0 ok, 1 validation error, 2 numeric abort, 3 I/O error.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hyperlearn/common.hpp"
#include "hyperlearn/config.hpp"
#include "hyperlearn/csv.hpp"
#include "hyperlearn/grad_check.hpp"
#include "hyperlearn/loop.hpp"
#include "hyperlearn/svg.hpp"

namespace hyperlearn::cli {

// Relative output paths live under $HYPERLEARN_OUT when it is set.
inline std::filesystem::path resolve_out_dir(const std::string& out) {
    std::filesystem::path p(out);
    if (p.is_absolute()) return p;
    if (const char* root = std::getenv("HYPERLEARN_OUT")) {
        return std::filesystem::path(root) / p;
    }
    return p;
}

inline int cmd_run(const std::optional<std::string>& config_path,
                   const std::map<std::string, std::string>& overrides) {
    const ExperimentConfig cfg = parse_config(config_path, overrides);
    const RunSetup setup = build_run_setup(cfg);
    const RunResult result = run_experiment(setup);

    const std::filesystem::path dir = resolve_out_dir(cfg.out_dir);
    write_manifest(cfg.resolved, dir);
    emit_csv(result.log, dir);
    if (cfg.emit_svg) {
        const auto files = emit_svg(result.log, dir);
        if (files.empty()) std::cerr << "warning: empty log, no SVG emitted\n";
    }
    for (const auto& w : result.log.warnings) std::cerr << "warning: " << w << "\n";

    const auto& epochs = result.log.epochs;
    std::cout << "run complete: " << epochs.size() << " epochs, " << result.log.steps.size()
              << " steps\n";
    if (!epochs.empty()) {
        std::cout << "final val loss " << epochs.back().val_loss << ", val acc "
                  << epochs.back().val_acc << ", next B " << epochs.back().next_b << "\n";
    }
    if (!setup.test.labels.empty()) {
        std::cout << "test loss " << result.test_metrics.loss << ", test acc "
                  << result.test_metrics.accuracy << "\n";
    }
    if (result.log.skipped_meta_updates > 0) {
        std::cout << "skipped meta updates: " << result.log.skipped_meta_updates << "\n";
    }
    std::cout << "outputs in " << dir.string() << "\n";
    return 0;
}

inline int cmd_grad_check(std::uint64_t seed, bool inject_sigmoid_fault) {
    if (inject_sigmoid_fault) testing::sigmoid_vjp_fault = 1.02;
    const auto suites = gradcheck::run_all(seed);
    testing::sigmoid_vjp_fault = 1.0;
    bool all_pass = true;
    for (const auto& s : suites) {
        char line[160];
        std::snprintf(line, sizeof line, "%-14s max_rel_err=%.3e  checks=%zu  %s", s.suite.c_str(),
                      s.max_rel_err, s.checks, s.pass() ? "ok" : "FAIL");
        std::cout << line << "\n";
        all_pass = all_pass && s.pass();
    }
    return all_pass ? 0 : 1;
}

inline int cmd_replay(const std::string& log_dir, const std::string& out_dir, bool svg) {
    const RunLog log = load_run_log(log_dir);
    const std::filesystem::path dir = resolve_out_dir(out_dir.empty() ? log_dir : out_dir);
    emit_csv(log, dir);
    if (svg) {
        const auto files = emit_svg(log, dir);
        if (files.empty()) std::cerr << "warning: empty log, no SVG emitted\n";
    }
    std::cout << "replayed " << log.steps.size() << " steps, " << log.epochs.size()
              << " epochs into " << dir.string() << "\n";
    return 0;
}

inline int run(const std::vector<std::string>& args) {
    CLI::App app{"hyper-learning batch-size scheduler laboratory"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "execute a configured experiment");
    std::string config_path, preset, out;
    std::uint64_t seed = 0;
    bool emit_flag = false;
    run_cmd->add_option("--config", config_path, "flat key = value config file");
    run_cmd->add_option("--preset", preset, "named preset configuration");
    auto* seed_opt = run_cmd->add_option("--seed", seed, "master seed override");
    auto* out_opt = run_cmd->add_option("--out", out, "output directory");
    run_cmd->add_flag("--emit-svg", emit_flag, "also write SVG charts");

    auto* check_cmd = app.add_subcommand("grad-check", "finite-difference gradient suites");
    std::uint64_t check_seed = 2024;
    bool inject_fault = false;
    check_cmd->add_option("--seed", check_seed, "suite seed");
    check_cmd->add_flag("--inject-sigmoid-fault", inject_fault,
                        "testing aid: corrupt the sigmoid derivative");

    auto* replay_cmd = app.add_subcommand("replay", "re-emit outputs from a saved log");
    std::string log_dir, replay_out;
    bool replay_svg = false;
    replay_cmd->add_option("--log", log_dir, "directory with steps.csv and epochs.csv")
        ->required();
    replay_cmd->add_option("--out", replay_out, "output directory (default: the log directory)");
    replay_cmd->add_flag("--emit-svg", replay_svg, "also write SVG charts");

    std::vector<const char*> argv;
    argv.push_back("hyperlearn");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (run_cmd->parsed()) {
            std::map<std::string, std::string> overrides;
            if (!preset.empty()) overrides["preset"] = preset;
            if (seed_opt->count() > 0) overrides["seed"] = std::to_string(seed);
            if (out_opt->count() > 0) overrides["out"] = out;
            if (emit_flag) overrides["emit_svg"] = "true";
            return cmd_run(config_path.empty() ? std::nullopt
                                               : std::optional<std::string>(config_path),
                           overrides);
        }
        if (check_cmd->parsed()) return cmd_grad_check(check_seed, inject_fault);
        if (replay_cmd->parsed()) return cmd_replay(log_dir, replay_out, replay_svg);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const numeric_error& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace hyperlearn::cli
