#include "tpg/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "tpg/csv.hpp"
#include "tpg/error.hpp"

namespace tpg {

TaskMask mask_of(const std::vector<TaskId>& tasks)
{
    TaskMask m = 0;
    for (auto t : tasks) {
        m |= task_bit(t);
    }
    return m;
}

std::vector<TaskId> tasks_in(TaskMask mask)
{
    std::vector<TaskId> out;
    for (auto t : kAllTasks) {
        if (mask & task_bit(t)) {
            out.push_back(t);
        }
    }
    return out;
}

std::vector<TaskMask> task_sets(const std::vector<TaskId>& tasks)
{
    TaskMask all = mask_of(tasks);
    std::vector<TaskMask> sets;
    for (unsigned m = 1; m < (1u << kTaskCount); ++m) {
        if ((m & all) == m) {
            sets.push_back(static_cast<TaskMask>(m));
        }
    }
    return sets;
}

std::string task_set_label(TaskMask mask)
{
    std::string out;
    for (auto t : tasks_in(mask)) {
        if (!out.empty()) {
            out += '+';
        }
        out += std::to_string(task_index(t));
    }
    return out;
}

std::optional<TaskMask> parse_task_set(std::string_view text)
{
    TaskMask mask = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find_first_of(",+", start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto field = text.substr(start, end - start);
        while (!field.empty() && field.front() == ' ') {
            field.remove_prefix(1);
        }
        while (!field.empty() && field.back() == ' ') {
            field.remove_suffix(1);
        }
        auto task = parse_task(field);
        if (!task) {
            return std::nullopt;
        }
        mask |= task_bit(*task);
        start = end + 1;
    }
    if (mask == 0) {
        return std::nullopt;
    }
    return mask;
}

TeamParams EvolutionParams::effective_team() const
{
    TeamParams t = team;
    if (no_hierarchy) {
        t.p_atomic = 1.0;
    }
    return t;
}

// --- Initialization and offspring -------------------------------------------

Population init_population(const EvolutionParams& params, Rng& rng)
{
    Population pop;
    for (std::size_t i = 0; i < params.R_size; ++i) {
        Team team;
        team.id = pop.ids.team();
        for (std::size_t j = 0; j < std::max<std::size_t>(2, params.tm_size_init); ++j) {
            team.programs.push_back(pop.add_program(random_program(rng, params.program, pop.ids)));
        }
        pop.add_team(std::move(team));
    }
    return pop;
}

std::vector<TeamId> generate_offspring(Population& pop, const EvolutionParams& params, Rng& rng)
{
    const auto roots = pop.roots();
    if (roots.empty()) {
        throw Error("population has no root team");
    }
    std::vector<TeamId> all_teams;
    all_teams.reserve(pop.teams.size());
    for (const auto& [id, t] : pop.teams) {
        all_teams.push_back(id);
    }
    auto pools = VariationPools::from(pop);
    const TeamParams team_params = params.effective_team();
    const double p_x = params.effective_p_x();
    const std::size_t sets = task_sets(params.tasks).size();

    std::vector<TeamId> children;
    children.reserve(sets * params.n_elite);
    for (std::size_t s = 0; s < sets; ++s) {
        for (std::size_t k = 0; k < params.n_elite; ++k) {
            const Team& parent1 = pop.team(roots[rng.index(roots.size())]);
            const Team& parent2 = pop.team(all_teams[rng.index(all_teams.size())]);
            Team child = rng.bernoulli(p_x) ? team_crossover(parent1, parent2, pop, rng, pop.ids)
                                            : clone_team(parent1, pop.ids);
            mutate_team(child, pop, rng, team_params, params.program, pools);
            children.push_back(child.id);
            pop.add_team(std::move(child));
        }
    }
    return children;
}

// --- Evaluation --------------------------------------------------------------

namespace {

constexpr std::uint64_t kTestDomain = 0x7E57'5EED'0000'0001ULL;

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn)
{
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next {0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace

std::uint64_t training_seed(std::uint64_t master, std::size_t generation, TeamId root, TaskId task,
                            std::size_t episode)
{
    return derive_seed(master, {generation, root, static_cast<std::uint64_t>(task_index(task)), episode});
}

std::uint64_t test_seed(std::uint64_t master, TaskId task, std::size_t episode)
{
    return derive_seed(master ^ kTestDomain, {static_cast<std::uint64_t>(task_index(task)), episode});
}

double evaluate_root(const Population& pop, TeamId root, TaskId task, std::size_t episodes,
                     const std::function<std::uint64_t(std::size_t)>& seed_of, AgentOptions options)
{
    Agent agent(pop, root, options);
    double total = 0.0;
    for (std::size_t k = 0; k < episodes; ++k) {
        Rng rng(seed_of(k));
        agent.reset();
        auto outcome = run_episode(
            task, [&agent](const Observation& obs, std::size_t t) { return agent.act(obs, t); }, rng);
        total += outcome.total_reward;
    }
    return episodes == 0 ? 0.0 : total / static_cast<double>(episodes);
}

void evaluate_generation(const Population& pop, ScoreTable& table, const EvolutionParams& params,
                         std::size_t generation)
{
    std::vector<TeamId> pending;
    for (TeamId id : pop.roots()) {
        if (!table.contains(id)) {
            pending.push_back(id);
        }
    }
    std::vector<TaskScores> results(pending.size());
    parallel_for(pending.size(), params.threads, [&](std::size_t i) {
        TaskScores scores {};
        for (TaskId task : params.tasks) {
            scores[static_cast<std::size_t>(task_index(task))] = evaluate_root(
                pop, pending[i], task, params.episodes_per_task,
                [&](std::size_t k) { return training_seed(params.seed, generation, pending[i], task, k); },
                params.agent_options());
        }
        results[i] = scores;
    });
    for (std::size_t i = 0; i < pending.size(); ++i) {
        table[pending[i]] = results[i];
    }
}

// --- Selection ---------------------------------------------------------------

namespace {

// Snapping to a 2^-32 grid keeps rankings stable when an affine rescale of the
// raw rewards perturbs the last bits of the quotient.
double snap(double v) { return std::round(v * 0x1.0p32) * 0x1.0p-32; }

} // namespace

ScoreTable normalize_scores(const ScoreTable& raw, const std::vector<TaskId>& tasks)
{
    ScoreTable out;
    for (const auto& [id, s] : raw) {
        out[id] = TaskScores {};
    }
    for (TaskId task : tasks) {
        auto k = static_cast<std::size_t>(task_index(task));
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& [id, s] : raw) {
            lo = std::min(lo, s[k]);
            hi = std::max(hi, s[k]);
        }
        for (const auto& [id, s] : raw) {
            out[id][k] = hi > lo ? snap((s[k] - lo) / (hi - lo)) : 1.0;
        }
    }
    return out;
}

double set_fitness(TaskMask set, const TaskScores& raw, const TaskScores& normalized)
{
    auto tasks = tasks_in(set);
    if (tasks.size() == 1) {
        return raw[static_cast<std::size_t>(task_index(tasks.front()))];
    }
    double f = std::numeric_limits<double>::infinity();
    for (auto t : tasks) {
        f = std::min(f, normalized[static_cast<std::size_t>(task_index(t))]);
    }
    return f;
}

std::vector<TeamId> rank_for_set(TaskMask set, const ScoreTable& raw, const ScoreTable& normalized)
{
    std::vector<std::pair<double, TeamId>> ranked;
    ranked.reserve(raw.size());
    for (const auto& [id, s] : raw) {
        ranked.emplace_back(set_fitness(set, s, normalized.at(id)), id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return a.second > b.second;
    });
    std::vector<TeamId> out;
    out.reserve(ranked.size());
    for (const auto& [f, id] : ranked) {
        out.push_back(id);
    }
    return out;
}

std::vector<TeamId> survivors_of(const ScoreTable& raw, const std::vector<TaskId>& tasks, std::size_t n_elite)
{
    auto normalized = normalize_scores(raw, tasks);
    std::set<TeamId> keep;
    for (TaskMask set : task_sets(tasks)) {
        auto ranked = rank_for_set(set, raw, normalized);
        for (std::size_t i = 0; i < std::min(n_elite, ranked.size()); ++i) {
            keep.insert(ranked[i]);
        }
    }
    return {keep.begin(), keep.end()};
}

void select_survivors(Population& pop, ScoreTable& table, const EvolutionParams& params)
{
    ScoreTable current;
    for (TeamId id : pop.roots()) {
        auto it = table.find(id);
        if (it == table.end()) {
            throw Error("root " + std::to_string(id) + " was never evaluated");
        }
        current.emplace(id, it->second);
    }
    auto survivors = survivors_of(current, params.tasks, params.n_elite);
    auto reachable = pop.reachable_from(survivors);
    std::set<TeamId> live(reachable.begin(), reachable.end());

    std::vector<TeamId> doomed;
    for (const auto& [id, t] : pop.teams) {
        if (!live.contains(id)) {
            doomed.push_back(id);
        }
    }
    for (TeamId id : doomed) {
        pop.remove_team(id);
    }
    pop.remove_orphans();

    std::set<TeamId> keep(survivors.begin(), survivors.end());
    std::erase_if(table, [&](const auto& kv) { return !keep.contains(kv.first); });
}

// --- Output records -------------------------------------------------------------

std::string metrics_header() { return "gen,task_set,best_fitness,mean_fitness,n_roots,n_teams,n_programs,n_banks"; }

std::string metrics_line(const MetricsRow& r)
{
    std::ostringstream out;
    out << r.generation << ',' << task_set_label(r.set) << ',' << csv::number(r.best_fitness) << ','
        << csv::number(r.mean_fitness) << ',' << r.n_roots << ',' << r.n_teams << ',' << r.n_programs << ','
        << r.n_banks;
    return out.str();
}

std::string archive_header() { return "gen,task_set,team,training_fitness,task,test_mean"; }

std::string archive_line(const ArchiveEntry& e, const std::vector<TaskId>& tasks)
{
    std::ostringstream out;
    bool first = true;
    for (TaskId t : tasks) {
        if (!first) {
            out << '\n';
        }
        first = false;
        out << e.generation << ',' << task_set_label(e.set) << ',' << e.team << ','
            << csv::number(e.training_fitness) << ',' << task_index(t) << ','
            << csv::number(e.test_mean[static_cast<std::size_t>(task_index(t))]);
    }
    return out.str();
}

std::vector<ArchiveEntry> parse_archive(std::istream& in)
{
    std::vector<ArchiveEntry> out;
    std::string line;
    if (!std::getline(in, line) || line != archive_header()) {
        throw DataError("archive header missing");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        auto f = csv::split(line);
        if (f.size() != 6) {
            throw DataError("bad archive row: " + line);
        }
        auto gen = static_cast<std::size_t>(csv::to_int(f[0]));
        auto set = parse_task_set(f[1]);
        auto team = static_cast<TeamId>(csv::to_int(f[2]));
        auto task = parse_task(f[4]);
        if (!set || !task) {
            throw DataError("bad archive row: " + line);
        }
        if (out.empty() || out.back().generation != gen || out.back().set != *set || out.back().team != team) {
            ArchiveEntry e;
            e.generation = gen;
            e.set = *set;
            e.team = team;
            e.training_fitness = csv::to_double(f[3]);
            out.push_back(e);
        }
        out.back().test_mean[static_cast<std::size_t>(task_index(*task))] = csv::to_double(f[5]);
    }
    return out;
}

// --- Run loop ----------------------------------------------------------------

EvolutionState start_evolution(const EvolutionParams& params)
{
    if (params.tasks.empty()) {
        throw ConfigError("no tasks configured");
    }
    EvolutionState state;
    state.params = params;
    state.rng = Rng(params.seed);
    state.pop = init_population(params, state.rng);
    return state;
}

std::vector<MetricsRow> generation_metrics(const EvolutionState& state)
{
    const auto& tasks = state.params.tasks;
    auto normalized = normalize_scores(state.scores, tasks);
    std::vector<MetricsRow> rows;
    for (TaskMask set : task_sets(tasks)) {
        MetricsRow row;
        row.generation = state.generation;
        row.set = set;
        row.best_fitness = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        for (const auto& [id, s] : state.scores) {
            double f = set_fitness(set, s, normalized.at(id));
            row.best_fitness = std::max(row.best_fitness, f);
            sum += f;
        }
        row.mean_fitness = state.scores.empty() ? 0.0 : sum / static_cast<double>(state.scores.size());
        row.n_roots = state.scores.size();
        row.n_teams = state.pop.teams.size();
        row.n_programs = state.pop.programs.size();
        row.n_banks = state.pop.banks.size();
        rows.push_back(row);
    }
    return rows;
}

TeamId champion(const EvolutionState& state, TaskMask set)
{
    if (state.scores.empty()) {
        throw UnknownChampion("no evaluated roots");
    }
    if ((set & mask_of(state.params.tasks)) != set) {
        throw UnknownChampion("task set " + task_set_label(set) + " is not part of this run");
    }
    auto normalized = normalize_scores(state.scores, state.params.tasks);
    return rank_for_set(set, state.scores, normalized).front();
}

namespace {

TaskScores run_tests(const EvolutionState& state, TeamId team)
{
    TaskScores out {};
    const auto& p = state.params;
    for (TaskId task : p.tasks) {
        out[static_cast<std::size_t>(task_index(task))] = evaluate_root(
            state.pop, team, task, p.test_episodes, [&](std::size_t k) { return test_seed(p.seed, task, k); },
            p.agent_options());
    }
    return out;
}

} // namespace

const TaskScores& test_team(EvolutionState& state, TeamId team)
{
    auto it = state.test_cache.find(team);
    if (it == state.test_cache.end()) {
        it = state.test_cache.emplace(team, run_tests(state, team)).first;
    }
    return it->second;
}

namespace {

void archive_champions(EvolutionState& state, const RunSinks& sinks)
{
    const auto sets = task_sets(state.params.tasks);
    auto normalized = normalize_scores(state.scores, state.params.tasks);

    std::vector<TeamId> champs;
    for (TaskMask set : sets) {
        champs.push_back(rank_for_set(set, state.scores, normalized).front());
    }
    std::vector<TeamId> untested;
    for (TeamId id : std::set<TeamId>(champs.begin(), champs.end())) {
        if (!state.test_cache.contains(id)) {
            untested.push_back(id);
        }
    }
    std::vector<TaskScores> results(untested.size());
    parallel_for(untested.size(), state.params.threads, [&](std::size_t i) { results[i] = run_tests(state, untested[i]); });
    for (std::size_t i = 0; i < untested.size(); ++i) {
        state.test_cache[untested[i]] = results[i];
    }

    for (std::size_t i = 0; i < sets.size(); ++i) {
        ArchiveEntry e;
        e.generation = state.generation;
        e.set = sets[i];
        e.team = champs[i];
        e.training_fitness = set_fitness(sets[i], state.scores.at(champs[i]), normalized.at(champs[i]));
        e.test_mean = state.test_cache.at(champs[i]);
        if (sinks.archive != nullptr) {
            *sinks.archive << archive_line(e, state.params.tasks) << '\n';
        }
        state.archive.push_back(e);
    }
    // Tests of deleted teams can never be requested again.
    std::erase_if(state.test_cache, [&](const auto& kv) { return !state.pop.has_team(kv.first); });
}

} // namespace

void step_generation(EvolutionState& state, const RunSinks& sinks)
{
    const auto& p = state.params;
    const std::size_t gen = state.generation + 1;

    generate_offspring(state.pop, p, state.rng);
    evaluate_generation(state.pop, state.scores, p, gen);
    select_survivors(state.pop, state.scores, p);
    state.generation = gen;

    if (sinks.metrics != nullptr) {
        for (const auto& row : generation_metrics(state)) {
            *sinks.metrics << metrics_line(row) << '\n';
        }
        sinks.metrics->flush();
    }
    bool last = gen == p.generations;
    if ((p.test_interval > 0 && gen % p.test_interval == 0) || last) {
        archive_champions(state, sinks);
        if (sinks.archive != nullptr) {
            sinks.archive->flush();
        }
    }
    if (sinks.checkpoint && ((p.checkpoint_interval > 0 && gen % p.checkpoint_interval == 0) || last)) {
        sinks.checkpoint(state);
    }
}

void run_evolution(EvolutionState& state, const RunSinks& sinks)
{
    while (state.generation < state.params.generations) {
        step_generation(state, sinks);
    }
}

} // namespace tpg
