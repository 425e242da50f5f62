#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tpg/evolution.hpp"
#include "tpg/replay.hpp"

namespace tpg {

struct ComplexityRow {
    std::size_t episode = 0;
    std::size_t t = 0;
    std::size_t teams_visited = 0;
    std::size_t instructions_executed = 0;
};

struct Summary {
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

std::vector<ComplexityRow> runtime_complexity(const ReplayEpisode& ep);
Summary summarize(std::vector<double> values);

struct WindowRow {
    std::size_t episode = 0;
    std::size_t t = 0;
    std::size_t oldest_access = 0;
    std::size_t width = 0;
};

/// Oldest last-write step among the stateful registers read at each step.
/// Steps without stateful reads have width 0.
std::vector<WindowRow> memory_window(const ReplayEpisode& ep);

/// Two-pass Pearson correlation; 0 when either series is constant.
/// Throws InsufficientData for fewer than 2 samples.
double pearson(std::span<const double> x, std::span<const double> y);

/// Affine map of a series onto [-1,1]; constant series map to 0.
std::vector<double> rescale_unit(std::span<const double> x);

struct VelocityRow {
    std::size_t hidden = 0;
    BankId bank = 0;
    int slot = 0;
    double r = 0.0;
};

/// For each hidden velocity, the stateful register whose time series has the
/// largest |r| over the concatenated episodes.
std::vector<VelocityRow> velocity_correlation(std::span<const ReplayEpisode> episodes);

struct DecompositionRow {
    std::size_t episode = 0;
    std::size_t t = 0;
    double s0 = 0.0;
    double hidden0 = 0.0;
    TeamId team = 0;
    bool terminal = false;
    int a_d = 0;
    double a_c = 0.0;
};

/// One row per visited team per step; the last visited team is terminal.
std::vector<DecompositionRow> task_decomposition(const ReplayEpisode& ep);

/// (raw - random) / (reference - random). Throws DegenerateBaseline when the
/// reference equals the random baseline.
double normalized_comparison(double raw, double random_baseline, double reference);

/// Mean reward of the uniform random policy over `episodes` episodes.
double random_baseline(TaskId task, std::size_t episodes, std::uint64_t seed);

struct NormalizedRow {
    TaskMask set = 0;
    TeamId team = 0;
    TaskId task = TaskId::CartPole;
    double raw = 0.0;
    double random = 0.0;
    double reference = 0.0;
    double normalized = 0.0;
};

/// Normalized test scores of the latest archived champions. The reference
/// for a task defaults to the best test score any single-task champion of
/// that task reached over the whole archive.
std::vector<NormalizedRow> normalized_report(const std::vector<ArchiveEntry>& archive,
                                             const std::vector<TaskId>& tasks, const TaskScores& random,
                                             const std::optional<TaskScores>& reference = std::nullopt);

/// Analysis names accepted by run_analysis.
std::vector<std::string> analysis_names();

/// Reads `<run>/replay/task<id>` and writes `<run>/<name>-task<id>.csv`.
/// Returns the written path.
std::filesystem::path run_analysis(const std::filesystem::path& run, const std::string& name, TaskId task);

} // namespace tpg
