#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "tpg/config.hpp"

namespace tpg::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kDataError = 3,
};

struct TrainOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    std::optional<std::size_t> generations;
    std::optional<std::string> tasks;
    std::optional<std::string> output;
};

struct ResumeOptions {
    std::string checkpoint;
    std::optional<std::size_t> generations;
    std::optional<std::size_t> threads;
    std::optional<std::string> output;
};

struct ReplayOptions {
    std::string checkpoint;
    std::string champion;
    std::string task;
    std::size_t episodes = 100;
    bool trace = false;
    // Reuse the seeds champions were tested with during training.
    bool test_seeds = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
};

struct AnalyzeOptions {
    std::string run;
    std::string analysis;
    std::optional<std::string> task;
};

struct BaselineOptions {
    std::string tasks = "cartpole,acrobot,cartcentering,pendulum,mountaincar,mountaincarcontinuous";
    std::size_t episodes = 100;
    std::uint64_t seed = 1;
    std::string output = ".";
};

// Each command reports progress on `out`; errors propagate as exceptions and
// are mapped to exit codes by run_cli.
void cmd_train(const TrainOptions& opts, std::ostream& out, const EnvLookup& env = process_env);
void cmd_resume(const ResumeOptions& opts, std::ostream& out);
void cmd_replay(const ReplayOptions& opts, std::ostream& out);
void cmd_analyze(const AnalyzeOptions& opts, std::ostream& out);
void cmd_baseline(const BaselineOptions& opts, std::ostream& out);

/// Parses argv, dispatches, and maps failures to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const EnvLookup& env = process_env);

} // namespace tpg::cli
