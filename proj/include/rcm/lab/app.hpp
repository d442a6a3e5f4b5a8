#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "rcm/lab/config.hpp"
#include "rcm/lab/experiments.hpp"
#include "rcm/lab/sidecar.hpp"

namespace rcm::lab {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitMismatch = 3 };

struct RunOutcome {
    std::filesystem::path csv;
    std::filesystem::path sidecar;
    std::size_t rows = 0;
};

/// Runs one experiment and writes `<dir>/<kind>.csv` plus `<dir>/<kind>.json`.
inline RunOutcome run_and_record(ExperimentConfig cfg)
{
    const ExperimentPlan plan = plan_experiment(cfg);
    const std::size_t workers = cfg.uint("run.workers");
    const RunOptions opts{workers};
    const auto start = std::chrono::steady_clock::now();
    const CsvTable table = run_experiment(plan, opts);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const std::filesystem::path dir = cfg.text("output.dir");
    std::filesystem::create_directories(dir);
    const std::string stem(kind_name(cfg.kind()));
    RunOutcome out{dir / (stem + ".csv"), dir / (stem + ".json"), table.size()};
    const std::string csv = table.str();
    write_text_file(out.csv, csv);

    Sidecar side{cfg};
    side.digest = config_digest(cfg);
    side.csv_file = out.csv.filename().string();
    side.csv_digest = fnv1a_hex(csv);
    side.version = std::string(kLabVersion);
    side.workers = opts.resolved_workers();
    side.wall_clock_seconds = wall;
    write_text_file(out.sidecar, side.to_json().dump(2) + "\n");
    return out;
}

struct ReplayOutcome {
    bool identical = false;
    bool digest_matches = false;
    std::optional<LineDifference> difference;
    std::filesystem::path csv;
};

/// Re-runs the experiment recorded in a sidecar and compares against its CSV byte for byte.
inline ReplayOutcome replay(const std::filesystem::path& sidecar_path, std::optional<std::size_t> workers)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(sidecar_path));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("sidecar '" + sidecar_path.string() + "': " + e.what());
    }
    Sidecar side = Sidecar::from_json(j);
    ExperimentConfig cfg = side.config;
    cfg.set("run.workers", std::to_string(workers.value_or(side.workers)));

    ReplayOutcome out;
    out.csv = sidecar_path.parent_path() / side.csv_file;
    out.digest_matches = side.digest == config_digest(cfg);
    const std::string recorded = read_text_file(out.csv);
    const std::string replayed = run_experiment(cfg, RunOptions{cfg.uint("run.workers")}).str();
    out.difference = first_difference(recorded, replayed);
    out.identical = !out.difference.has_value();
    return out;
}

/// Entry point of the `rcm-lab` tool; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"rcm-lab: Monte Carlo experiments on the random connection model"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::optional<std::string> out_dir;
    std::string sidecar_path;

    std::vector<std::pair<CLI::App*, ExperimentKind>> kinds;
    for (const auto& [kind, name] : kKindNames) {
        auto* sub = app.add_subcommand(std::string(name), "run the " + std::string(name) + " experiment");
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--seed", seed, "override run.seed");
        sub->add_option("--workers", workers, "override run.workers (0 = all cores)");
        sub->add_option("--out", out_dir, "override output.dir");
        kinds.emplace_back(sub, kind);
    }
    auto* replay_cmd = app.add_subcommand("replay", "re-run a recorded experiment and compare outputs");
    replay_cmd->add_option("sidecar", sidecar_path, "JSON sidecar written by a previous run")->required();
    replay_cmd->add_option("--workers", workers, "worker count for the re-run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (replay_cmd->parsed()) {
        try {
            const auto r = replay(sidecar_path, workers);
            if (!r.digest_matches) {
                err << "rcm-lab replay: note: sidecar config does not match its recorded digest\n";
            }
            if (!r.identical) {
                err << "rcm-lab replay: mismatch against " << r.csv.string() << " at line " << r.difference->line
                    << "\n  recorded: " << r.difference->expected << "\n  replayed: " << r.difference->actual << "\n";
                return kExitMismatch;
            }
            out << "replay ok: " << r.csv.string() << " reproduced exactly\n";
            return kExitOk;
        } catch (const UsageError& e) {
            err << "rcm-lab replay: invalid input: " << e.what() << "\n";
            return kExitUsage;
        } catch (const std::exception& e) {
            err << "rcm-lab replay: failed: " << e.what() << "\n";
            return kExitFailure;
        }
    }

    for (const auto& [sub, kind] : kinds) {
        if (!sub->parsed()) {
            continue;
        }
        const std::string name(kind_name(kind));
        try {
            ExperimentConfig cfg = [&] {
                try {
                    return ExperimentConfig::resolve(kind, ConfigDocument::parse(read_text_file(config_path)));
                } catch (const ConfigError& e) {
                    throw ConfigError("config '" + config_path + "': " + e.what());
                }
            }();
            if (seed) {
                cfg.set("run.seed", std::to_string(*seed));
            }
            if (workers) {
                cfg.set("run.workers", std::to_string(*workers));
            }
            if (out_dir) {
                cfg.set("output.dir", *out_dir);
            }
            const auto r = run_and_record(std::move(cfg));
            out << "wrote " << r.csv.string() << " (" << r.rows << " rows) and " << r.sidecar.string() << "\n";
            return kExitOk;
        } catch (const UsageError& e) {
            err << "rcm-lab " << name << ": invalid configuration: " << e.what() << "\n";
            return kExitUsage;
        } catch (const std::exception& e) {
            err << "rcm-lab " << name << ": failed: " << e.what() << "\n";
            return kExitFailure;
        }
    }
    return kExitUsage;
}

} // namespace rcm::lab
