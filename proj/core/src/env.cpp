#include "tpg/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "tpg/csv.hpp"
#include "tpg/error.hpp"

namespace tpg {

namespace {

constexpr double kPi = std::numbers::pi;

namespace cartpole {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kHalfLength;
constexpr double kForceMag = 10.0;
constexpr double kTau = 0.02;
constexpr double kXThreshold = 2.4;
constexpr double kThetaThreshold = 15.0 * kPi / 180.0;
} // namespace cartpole

namespace acrobot {
constexpr double kDt = 0.2;
constexpr double kLink1Length = 1.0;
constexpr double kLink1Mass = 1.0;
constexpr double kLink2Mass = 1.0;
constexpr double kLink1Com = 0.5;
constexpr double kLink2Com = 0.5;
constexpr double kLinkMoi = 1.0;
constexpr double kMaxVel1 = 4 * kPi;
constexpr double kMaxVel2 = 9 * kPi;
constexpr double kGravity = 9.8;
} // namespace acrobot

namespace centering {
constexpr double kMass = 2.0;
constexpr double kTau = 0.02;
constexpr double kInit = 0.75;
constexpr double kTolerance = 0.01;
constexpr double kXBound = 1.5;
} // namespace centering

namespace pendulum {
constexpr double kGravity = 10.0;
constexpr double kMass = 1.0;
constexpr double kLength = 1.0;
constexpr double kDt = 0.05;
constexpr double kMaxSpeed = 8.0;
constexpr double kMaxTorque = 2.0;
} // namespace pendulum

namespace mountain {
constexpr double kMinPosition = -1.2;
constexpr double kMaxPosition = 0.6;
constexpr double kMaxSpeed = 0.07;
constexpr double kGravity = 0.0025;
constexpr double kDiscreteForce = 0.001;
constexpr double kContinuousPower = 0.0015;
constexpr double kGoal = 0.5;
constexpr double kContinuousGoal = 0.45;
} // namespace mountain

const std::array<TaskSpec, kTaskCount> kSpecs {{
    {200, 2, true},   // CartPole
    {500, 2, false},  // Acrobot
    {500, 1, true},   // CartCentering
    {200, 1, false},  // Pendulum
    {200, 1, true},   // MountainCar
    {999, 1, false},  // MountainCarContinuous
}};

double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

double clip_unit(double v) { return clip(v, -1.0, 1.0); }

double wrap(double x, double lo, double hi)
{
    double diff = hi - lo;
    while (x > hi) {
        x -= diff;
    }
    while (x < lo) {
        x += diff;
    }
    return x;
}

double angle_normalize(double x)
{
    return std::fmod(std::fmod(x + kPi, 2 * kPi) + 2 * kPi, 2 * kPi) - kPi;
}

double sanitize(double a_c) { return std::isfinite(a_c) ? a_c : 0.0; }

// Discrete index -> force sign for CartPole/CartCentering: {+1, prev, -1}.
double bang_bang_force(int a_d, double prev)
{
    switch (a_d) {
    case 0:
        return 1.0;
    case 1:
        return prev;
    default:
        return -1.0;
    }
}

int clamp_discrete(int a_d) { return std::clamp(a_d, 0, 2); }

void step_cartpole(SystemState& s, const ActionPair& action, StepResult& res)
{
    using namespace cartpole;
    double sign = bang_bang_force(clamp_discrete(action.a_d), s.prev_discrete_force);
    s.prev_discrete_force = sign;
    double force = sign * kForceMag;

    double x = s.vars[0];
    double theta = s.vars[1];
    double x_dot = s.vars[2];
    double theta_dot = s.vars[3];

    double cos_t = std::cos(theta);
    double sin_t = std::sin(theta);
    double temp = (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
    double theta_acc = (kGravity * sin_t - cos_t * temp) /
        (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
    double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

    x = x + kTau * x_dot;
    x_dot = x_dot + kTau * x_acc;
    theta = theta + kTau * theta_dot;
    theta_dot = theta_dot + kTau * theta_acc;

    s.vars = {x, theta, x_dot, theta_dot};
    res.reward = 1.0;
    res.done = x < -kXThreshold || x > kXThreshold || theta < -kThetaThreshold || theta > kThetaThreshold;
}

using AcroState = std::array<double, 5>;

AcroState acrobot_derivs(const AcroState& s)
{
    using namespace acrobot;
    double m1 = kLink1Mass, m2 = kLink2Mass, l1 = kLink1Length;
    double lc1 = kLink1Com, lc2 = kLink2Com, i1 = kLinkMoi, i2 = kLinkMoi, g = kGravity;
    double a = s[4];
    double theta1 = s[0], theta2 = s[1], dtheta1 = s[2], dtheta2 = s[3];
    double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(theta2)) + i1 + i2;
    double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(theta2)) + i2;
    double phi2 = m2 * lc2 * g * std::cos(theta1 + theta2 - kPi / 2.0);
    double phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * std::sin(theta2)
        - 2 * m2 * l1 * lc2 * dtheta2 * dtheta1 * std::sin(theta2)
        + (m1 * lc1 + m2 * l1) * g * std::cos(theta1 - kPi / 2.0) + phi2;
    double ddtheta2 = (a + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * std::sin(theta2) - phi2)
        / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    double ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    return {dtheta1, dtheta2, ddtheta1, ddtheta2, 0.0};
}

void step_acrobot(SystemState& s, const ActionPair& action, StepResult& res)
{
    using namespace acrobot;
    double torque = clip_unit(sanitize(action.a_c));
    AcroState y0 {s.vars[0], s.vars[1], s.vars[2], s.vars[3], torque};

    auto axpy = [](const AcroState& y, double h, const AcroState& k) {
        AcroState out;
        for (std::size_t i = 0; i < y.size(); ++i) {
            out[i] = y[i] + h * k[i];
        }
        return out;
    };
    double dt = kDt;
    double dt2 = dt / 2.0;
    AcroState k1 = acrobot_derivs(y0);
    AcroState k2 = acrobot_derivs(axpy(y0, dt2, k1));
    AcroState k3 = acrobot_derivs(axpy(y0, dt2, k2));
    AcroState k4 = acrobot_derivs(axpy(y0, dt, k3));
    AcroState y1;
    for (std::size_t i = 0; i < y1.size(); ++i) {
        y1[i] = y0[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }

    s.vars[0] = wrap(y1[0], -kPi, kPi);
    s.vars[1] = wrap(y1[1], -kPi, kPi);
    s.vars[2] = clip(y1[2], -kMaxVel1, kMaxVel1);
    s.vars[3] = clip(y1[3], -kMaxVel2, kMaxVel2);

    bool terminal = -std::cos(s.vars[0]) - std::cos(s.vars[1] + s.vars[0]) > 1.0;
    res.reward = terminal ? 0.0 : -1.0;
    res.done = terminal;
}

void step_cart_centering(SystemState& s, const ActionPair& action, StepResult& res)
{
    using namespace centering;
    double force = bang_bang_force(clamp_discrete(action.a_d), s.prev_discrete_force);
    s.prev_discrete_force = force;
    double x = s.vars[0];
    double v = s.vars[1];
    x = x + kTau * v;
    v = v + kTau * force / kMass;
    s.vars[0] = x;
    s.vars[1] = v;
    bool centered = std::abs(x) < kTolerance && std::abs(v) < kTolerance;
    res.reward = centered ? 0.0 : -1.0;
    res.done = centered;
}

void step_pendulum(SystemState& s, const ActionPair& action, StepResult& res)
{
    using namespace pendulum;
    double th = s.vars[0];
    double thdot = s.vars[1];
    double u = clip(sanitize(action.a_c), -kMaxTorque, kMaxTorque);
    double th_n = angle_normalize(th);
    double cost = th_n * th_n + 0.1 * thdot * thdot + 0.001 * u * u;

    double new_thdot = thdot + (3.0 * kGravity / (2.0 * kLength) * std::sin(th) + 3.0 / (kMass * kLength * kLength) * u) * kDt;
    new_thdot = clip(new_thdot, -kMaxSpeed, kMaxSpeed);
    double new_th = th + new_thdot * kDt;

    s.vars[0] = new_th;
    s.vars[1] = new_thdot;
    res.reward = -cost;
    res.done = false;
}

void mountain_update(SystemState& s, double accel)
{
    using namespace mountain;
    double pos = s.vars[0];
    double vel = s.vars[1];
    vel += accel + std::cos(3.0 * pos) * (-kGravity);
    vel = clip(vel, -kMaxSpeed, kMaxSpeed);
    pos += vel;
    pos = clip(pos, kMinPosition, kMaxPosition);
    if (pos == kMinPosition && vel < 0) {
        vel = 0;
    }
    s.vars[0] = pos;
    s.vars[1] = vel;
}

void step_mountain_car(SystemState& s, const ActionPair& action, StepResult& res)
{
    // {+1, 0, -1}
    double force = 1.0 - static_cast<double>(clamp_discrete(action.a_d));
    mountain_update(s, force * mountain::kDiscreteForce);
    res.done = s.vars[0] >= mountain::kGoal;
    res.reward = -1.0;
}

void step_mountain_car_continuous(SystemState& s, const ActionPair& action, StepResult& res)
{
    double force = clip_unit(sanitize(action.a_c));
    mountain_update(s, force * mountain::kContinuousPower);
    bool goal = s.vars[0] >= mountain::kContinuousGoal && s.vars[1] >= 0.0;
    res.reward = (goal ? 100.0 : 0.0) - 0.1 * force * force;
    res.done = goal;
}

} // namespace

std::string_view task_name(TaskId task)
{
    switch (task) {
    case TaskId::CartPole:
        return "cartpole";
    case TaskId::Acrobot:
        return "acrobot";
    case TaskId::CartCentering:
        return "cartcentering";
    case TaskId::Pendulum:
        return "pendulum";
    case TaskId::MountainCar:
        return "mountaincar";
    case TaskId::MountainCarContinuous:
        return "mountaincarcontinuous";
    }
    return "unknown";
}

std::optional<TaskId> parse_task(std::string_view text)
{
    for (auto t : kAllTasks) {
        if (text == task_name(t) || text == std::to_string(task_index(t))) {
            return t;
        }
    }
    return std::nullopt;
}

const TaskSpec& task_spec(TaskId task) { return kSpecs[static_cast<std::size_t>(task)]; }

SystemState reset(TaskId task, Rng& rng)
{
    SystemState s;
    switch (task) {
    case TaskId::CartPole:
        s.var_count = 4;
        for (auto& v : s.vars) {
            v = rng.uniform(-0.05, 0.05);
        }
        break;
    case TaskId::Acrobot:
        s.var_count = 4;
        for (auto& v : s.vars) {
            v = rng.uniform(-0.1, 0.1);
        }
        break;
    case TaskId::CartCentering:
        s.var_count = 2;
        s.vars[0] = rng.uniform(-centering::kInit, centering::kInit);
        s.vars[1] = rng.uniform(-centering::kInit, centering::kInit);
        break;
    case TaskId::Pendulum:
        s.var_count = 2;
        s.vars[0] = rng.uniform(-kPi, kPi);
        s.vars[1] = rng.uniform(-1.0, 1.0);
        break;
    case TaskId::MountainCar:
    case TaskId::MountainCarContinuous:
        s.var_count = 2;
        s.vars[0] = rng.uniform(-0.6, -0.4);
        s.vars[1] = 0.0;
        break;
    }
    s.steps_elapsed = 0;
    s.prev_discrete_force = 1.0;
    s.done = false;
    return s;
}

Observation observe(TaskId task, const SystemState& state, Rng& rng)
{
    Observation o;
    switch (task) {
    case TaskId::CartPole:
        o.s0 = clip_unit(state.vars[0] / cartpole::kXThreshold);
        o.s1 = clip_unit(state.vars[1] / cartpole::kThetaThreshold);
        break;
    case TaskId::Acrobot:
        o.s0 = clip_unit(wrap(state.vars[0], -kPi, kPi) / kPi);
        o.s1 = clip_unit(wrap(state.vars[1], -kPi, kPi) / kPi);
        break;
    case TaskId::CartCentering:
        o.s0 = clip_unit(state.vars[0] / centering::kXBound);
        o.s1 = rng.uniform();
        break;
    case TaskId::Pendulum:
        o.s0 = clip_unit(std::cos(state.vars[0]));
        o.s1 = rng.uniform();
        break;
    case TaskId::MountainCar:
    case TaskId::MountainCarContinuous: {
        constexpr double mid = (mountain::kMinPosition + mountain::kMaxPosition) / 2.0;
        constexpr double half = (mountain::kMaxPosition - mountain::kMinPosition) / 2.0;
        o.s0 = clip_unit((state.vars[0] - mid) / half);
        o.s1 = rng.uniform();
        break;
    }
    }
    return o;
}

std::pair<SystemState, StepResult> step(TaskId task, const SystemState& state, const ActionPair& action)
{
    if (state.done || state.steps_elapsed >= task_spec(task).step_limit) {
        throw StepAfterDone();
    }
    SystemState next = state;
    StepResult res;
    switch (task) {
    case TaskId::CartPole:
        step_cartpole(next, action, res);
        break;
    case TaskId::Acrobot:
        step_acrobot(next, action, res);
        break;
    case TaskId::CartCentering:
        step_cart_centering(next, action, res);
        break;
    case TaskId::Pendulum:
        step_pendulum(next, action, res);
        break;
    case TaskId::MountainCar:
        step_mountain_car(next, action, res);
        break;
    case TaskId::MountainCarContinuous:
        step_mountain_car_continuous(next, action, res);
        break;
    }
    next.steps_elapsed += 1;
    if (next.steps_elapsed >= task_spec(task).step_limit) {
        res.done = true;
    }
    next.done = res.done;
    res.hidden_velocities = hidden_velocities(task, next);
    return {next, std::move(res)};
}

std::vector<double> hidden_velocities(TaskId task, const SystemState& state)
{
    if (task == TaskId::CartPole || task == TaskId::Acrobot) {
        return {state.vars[2], state.vars[3]};
    }
    return {state.vars[1]};
}

ActionPair random_action(TaskId task, Rng& rng)
{
    ActionPair a;
    a.a_d = static_cast<int>(rng.below(3));
    double bound = task == TaskId::Pendulum ? pendulum::kMaxTorque : 1.0;
    a.a_c = rng.uniform(-bound, bound);
    return a;
}

std::string csv_trace_header(TaskId task)
{
    std::string h = "t,s0,s1,a_d,a_c,reward,done,hidden_v0";
    if (task_spec(task).hidden_count > 1) {
        h += ",hidden_v1";
    }
    return h;
}

CsvTraceSink::CsvTraceSink(std::ostream& out, TaskId task) : out_(out)
{
    out_ << csv_trace_header(task) << '\n';
}

void CsvTraceSink::record(const TraceRow& row)
{
    out_ << row.t << ',' << csv::number(row.obs.s0) << ',' << csv::number(row.obs.s1) << ','
         << row.action.a_d << ',' << csv::number(row.action.a_c) << ',' << csv::number(row.reward) << ','
         << (row.done ? 1 : 0);
    for (double h : row.hidden) {
        out_ << ',' << csv::number(h);
    }
    out_ << '\n';
}

EpisodeOutcome run_episode(TaskId task, const AgentCallback& agent, Rng& rng, TraceSink* trace)
{
    EpisodeOutcome out;
    SystemState state = reset(task, rng);
    const std::size_t limit = task_spec(task).step_limit;
    while (!state.done && state.steps_elapsed < limit) {
        std::size_t t = state.steps_elapsed;
        Observation obs = observe(task, state, rng);
        ActionPair action = agent(obs, t);
        auto [next, res] = step(task, state, action);
        out.total_reward += res.reward;
        if (trace != nullptr) {
            trace->record(TraceRow {t, obs, action, res.reward, res.done, res.hidden_velocities});
        }
        state = next;
    }
    out.steps = state.steps_elapsed;
    return out;
}

} // namespace tpg
