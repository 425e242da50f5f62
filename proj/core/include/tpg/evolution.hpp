#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tpg/env.hpp"
#include "tpg/lgp.hpp"
#include "tpg/random.hpp"
#include "tpg/team_graph.hpp"

namespace tpg {

/// Bit i set means TaskId i is in the set.
using TaskMask = std::uint8_t;

constexpr TaskMask task_bit(TaskId t) { return static_cast<TaskMask>(1u << task_index(t)); }
TaskMask mask_of(const std::vector<TaskId>& tasks);
std::vector<TaskId> tasks_in(TaskMask mask);

/// Every non-empty subset of `tasks`, ascending by mask value.
std::vector<TaskMask> task_sets(const std::vector<TaskId>& tasks);

/// "0+3" style label used in metrics and archive files.
std::string task_set_label(TaskMask mask);
/// Accepts "0,3", "0+3", "cartpole,pendulum".
std::optional<TaskMask> parse_task_set(std::string_view text);

struct EvolutionParams {
    std::size_t R_size = 1000;
    std::size_t n_elite = 50;
    std::size_t tm_size_init = 10;
    double p_x = 0.2;
    TeamParams team;
    ProgramParams program;
    std::size_t episodes_per_task = 5;
    std::size_t generations = 100;
    std::uint64_t seed = 1;
    bool no_crossover = false;
    bool no_memory = false;
    bool no_hierarchy = false;
    std::vector<TaskId> tasks {kAllTasks.begin(), kAllTasks.end()};
    std::size_t threads = 1;
    std::size_t test_interval = 5;
    std::size_t test_episodes = 100;
    std::size_t checkpoint_interval = 0;

    double effective_p_x() const { return no_crossover ? 0.0 : p_x; }
    TeamParams effective_team() const;
    AgentOptions agent_options() const { return AgentOptions {no_memory}; }
};

/// Mean training reward per task; only the run's tasks are meaningful.
using TaskScores = std::array<double, kTaskCount>;
using ScoreTable = std::map<TeamId, TaskScores>;

Population init_population(const EvolutionParams& params, Rng& rng);

/// n_elite children per task set, added to `pop` as roots. Returns their ids.
std::vector<TeamId> generate_offspring(Population& pop, const EvolutionParams& params, Rng& rng);

/// Mean reward of one root over `episodes` episodes of `task`. Episode k uses
/// the stream seeded by `seed_of(k)`.
double evaluate_root(const Population& pop, TeamId root, TaskId task, std::size_t episodes,
                     const std::function<std::uint64_t(std::size_t)>& seed_of, AgentOptions options);

/// Scores every root of `pop` missing from `table`, in parallel over roots.
void evaluate_generation(const Population& pop, ScoreTable& table, const EvolutionParams& params,
                         std::size_t generation);

/// Training stream seed; independent of evaluation order and thread count.
std::uint64_t training_seed(std::uint64_t master, std::size_t generation, TeamId root, TaskId task,
                            std::size_t episode);
/// Test stream seed; shared by every champion so test scores are comparable.
std::uint64_t test_seed(std::uint64_t master, TaskId task, std::size_t episode);

/// Per-task min-max normalization over the given roots. A task on which all
/// roots score the same maps to 1.0.
ScoreTable normalize_scores(const ScoreTable& raw, const std::vector<TaskId>& tasks);

/// Ranking value of a root for a task set: raw mean for single-task sets,
/// minimum normalized score otherwise.
double set_fitness(TaskMask set, const TaskScores& raw, const TaskScores& normalized);

/// Roots ordered best first for `set`; ties go to the higher (newer) team id.
std::vector<TeamId> rank_for_set(TaskMask set, const ScoreTable& raw, const ScoreTable& normalized);

/// Union of the top n_elite roots of every task set.
std::vector<TeamId> survivors_of(const ScoreTable& raw, const std::vector<TaskId>& tasks, std::size_t n_elite);

/// Drops non-surviving roots, every team not reachable from a survivor, then
/// orphan programs and banks. Scores of deleted roots are erased.
void select_survivors(Population& pop, ScoreTable& table, const EvolutionParams& params);

struct ArchiveEntry {
    std::size_t generation = 0;
    TaskMask set = 0;
    TeamId team = 0;
    double training_fitness = 0.0;
    TaskScores test_mean {};
};

struct MetricsRow {
    std::size_t generation = 0;
    TaskMask set = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
    std::size_t n_roots = 0;
    std::size_t n_teams = 0;
    std::size_t n_programs = 0;
    std::size_t n_banks = 0;
};

std::string metrics_header();
std::string metrics_line(const MetricsRow& row);
std::string archive_header();
std::string archive_line(const ArchiveEntry& entry, const std::vector<TaskId>& tasks);
/// Reads archive.csv back; rows of one entry are merged. Throws DataError.
std::vector<ArchiveEntry> parse_archive(std::istream& in);

/// Everything needed to continue a run bit-for-bit.
struct EvolutionState {
    EvolutionParams params;
    Population pop;
    Rng rng;
    std::size_t generation = 0;  // completed generations
    ScoreTable scores;
    std::map<TeamId, TaskScores> test_cache;
    std::vector<ArchiveEntry> archive;
};

EvolutionState start_evolution(const EvolutionParams& params);

struct RunSinks {
    std::ostream* metrics = nullptr;
    std::ostream* archive = nullptr;
    // Called after generations that are due for a checkpoint.
    std::function<void(const EvolutionState&)> checkpoint;
};

std::vector<MetricsRow> generation_metrics(const EvolutionState& state);

/// Champion of `set` among the current roots.
TeamId champion(const EvolutionState& state, TaskMask set);

/// Mean test reward of `team` on every run task (cached by team id).
const TaskScores& test_team(EvolutionState& state, TeamId team);

/// One generate / evaluate / select cycle plus metrics, archive, checkpoint.
void step_generation(EvolutionState& state, const RunSinks& sinks);

/// Steps until `state.generation == params.generations`.
void run_evolution(EvolutionState& state, const RunSinks& sinks);

} // namespace tpg
