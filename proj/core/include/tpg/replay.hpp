#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tpg/env.hpp"
#include "tpg/team_graph.hpp"

namespace tpg {

using BankSnapshot = std::array<double, kMemorySize>;

/// One time step as seen by the analyses. Bank snapshots are taken after the
/// full traversal of the step and line up with ReplayEpisode::bank_ids.
struct ReplayStep {
    TraceRow row;
    TraversalTrace traversal;
    std::vector<BankSnapshot> banks;
};

struct ReplayEpisode {
    TaskId task = TaskId::CartPole;
    std::size_t index = 0;
    std::uint64_t seed = 0;
    double reward = 0.0;
    std::vector<BankId> bank_ids;
    std::vector<ReplayStep> steps;
};

ReplayEpisode replay_episode(const Population& pop, TeamId root, TaskId task, std::uint64_t seed,
                             std::size_t index, AgentOptions options = {});

/// `<run>/replay/task<id>`
std::filesystem::path replay_dir(const std::filesystem::path& run, TaskId task);

/// Writes ep<k>.csv (environment trace), ep<k>-graph.csv (traversal) and
/// ep<k>-memory.csv (bank snapshots).
void write_episode(const std::filesystem::path& dir, const ReplayEpisode& ep);

/// `episode,seed,reward,steps`, one row per episode.
void write_scores(const std::filesystem::path& dir, const std::vector<ReplayEpisode>& episodes);

/// Reads every episode listed in scores.csv. Throws MissingTraces when the
/// directory or any listed file is absent.
std::vector<ReplayEpisode> load_replay(const std::filesystem::path& run, TaskId task);

} // namespace tpg
