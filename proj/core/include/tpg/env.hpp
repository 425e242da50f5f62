#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tpg/random.hpp"

namespace tpg {

// Order is fixed: task-set bitmasks use these values as bit positions.
enum class TaskId : int {
    CartPole = 0,
    Acrobot = 1,
    CartCentering = 2,
    Pendulum = 3,
    MountainCar = 4,
    MountainCarContinuous = 5,
};

inline constexpr std::size_t kTaskCount = 6;
inline constexpr std::array<TaskId, kTaskCount> kAllTasks {
    TaskId::CartPole, TaskId::Acrobot, TaskId::CartCentering,
    TaskId::Pendulum, TaskId::MountainCar, TaskId::MountainCarContinuous,
};

std::string_view task_name(TaskId task);
/// Accepts the lower-case name ("cartpole") or the numeric id ("0").
std::optional<TaskId> parse_task(std::string_view text);

constexpr int task_index(TaskId task) noexcept { return static_cast<int>(task); }

/// Physical state: observable variables first, then the hidden velocities.
///   CartPole      [x, theta, x_dot, theta_dot]
///   Acrobot       [theta1, theta2, theta1_dot, theta2_dot]
///   others        [x (or theta), velocity]
struct SystemState {
    std::array<double, 4> vars {};
    std::size_t var_count = 0;
    std::size_t steps_elapsed = 0;
    double prev_discrete_force = 1.0;
    bool done = false;

    friend bool operator==(const SystemState&, const SystemState&) = default;
};

/// The only thing an agent ever sees.
struct Observation {
    double s0 = 0.0;
    double s1 = 0.0;
};
static_assert(sizeof(Observation) == 2 * sizeof(double));

struct ActionPair {
    int a_d = 0;
    double a_c = 0.0;

    friend bool operator==(const ActionPair&, const ActionPair&) = default;
};

struct StepResult {
    double reward = 0.0;
    bool done = false;
    // Analysis-only; never routed to agent callbacks.
    std::vector<double> hidden_velocities;
};

struct TaskSpec {
    std::size_t step_limit;
    std::size_t hidden_count;
    bool discrete;  // reads a_d; otherwise reads a_c
};

const TaskSpec& task_spec(TaskId task);

SystemState reset(TaskId task, Rng& rng);
Observation observe(TaskId task, const SystemState& state, Rng& rng);
std::pair<SystemState, StepResult> step(TaskId task, const SystemState& state, const ActionPair& action);

/// Hidden velocity variables of a state (analysis access only).
std::vector<double> hidden_velocities(TaskId task, const SystemState& state);

/// One row of a per-episode trace.
struct TraceRow {
    std::size_t t = 0;
    Observation obs;
    ActionPair action;
    double reward = 0.0;
    bool done = false;
    std::vector<double> hidden;
};

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void record(const TraceRow& row) = 0;
};

/// Collects trace rows in memory.
class VectorTraceSink final : public TraceSink {
public:
    void record(const TraceRow& row) override { rows.push_back(row); }
    std::vector<TraceRow> rows;
};

/// Writes `t,s0,s1,a_d,a_c,reward,done,hidden_v0[,hidden_v1]` with a header row.
class CsvTraceSink final : public TraceSink {
public:
    CsvTraceSink(std::ostream& out, TaskId task);
    void record(const TraceRow& row) override;

private:
    std::ostream& out_;
};

std::string csv_trace_header(TaskId task);

/// Agent callback: observation and the step index within the episode.
using AgentCallback = std::function<ActionPair(const Observation&, std::size_t)>;

struct EpisodeOutcome {
    double total_reward = 0.0;
    std::size_t steps = 0;
};

EpisodeOutcome run_episode(TaskId task, const AgentCallback& agent, Rng& rng, TraceSink* trace = nullptr);

/// Uniform random action over both channels (continuous range of the task's clip bounds).
ActionPair random_action(TaskId task, Rng& rng);

} // namespace tpg
