#include "tpg/replay.hpp"

#include <fstream>
#include <sstream>

#include "tpg/csv.hpp"
#include "tpg/error.hpp"

namespace tpg {

namespace fs = std::filesystem;

ReplayEpisode replay_episode(const Population& pop, TeamId root, TaskId task, std::uint64_t seed,
                             std::size_t index, AgentOptions options)
{
    ReplayEpisode ep;
    ep.task = task;
    ep.index = index;
    ep.seed = seed;

    Agent agent(pop, root, options);
    agent.reset();
    ep.bank_ids = agent.bank_ids();

    struct Sink final : TraceSink {
        std::vector<ReplayStep>* steps;
        void record(const TraceRow& row) override { steps->back().row = row; }
    } sink;
    sink.steps = &ep.steps;

    Rng rng(seed);
    auto outcome = run_episode(
        task,
        [&](const Observation& obs, std::size_t t) {
            ReplayStep step;
            auto action = agent.act(obs, t, &step.traversal);
            auto banks = agent.banks();
            step.banks.assign(banks.begin(), banks.end());
            ep.steps.push_back(std::move(step));
            return action;
        },
        rng, &sink);
    ep.reward = outcome.total_reward;
    return ep;
}

fs::path replay_dir(const fs::path& run, TaskId task)
{
    return run / "replay" / ("task" + std::to_string(task_index(task)));
}

namespace {

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

std::ifstream open_in(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw MissingTraces("missing trace file " + path.string());
    }
    return in;
}

std::string episode_stem(std::size_t index) { return "ep" + std::to_string(index); }

template <typename T, typename Fn>
std::string join(const std::vector<T>& items, Fn&& fmt)
{
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) {
            out += ' ';
        }
        out += fmt(item);
    }
    return out;
}

std::vector<std::string_view> words(std::string_view s)
{
    std::vector<std::string_view> out;
    if (s.empty()) {
        return out;
    }
    return csv::split(s, ' ');
}

} // namespace

void write_episode(const fs::path& dir, const ReplayEpisode& ep)
{
    fs::create_directories(dir);
    const auto stem = episode_stem(ep.index);
    {
        auto out = open_out(dir / (stem + ".csv"));
        CsvTraceSink sink(out, ep.task);
        for (const auto& s : ep.steps) {
            sink.record(s.row);
        }
    }
    {
        auto out = open_out(dir / (stem + "-graph.csv"));
        out << "t,teams_visited,programs_executed,instructions_executed,visited,reads,writes,winner\n";
        for (const auto& s : ep.steps) {
            const auto& tr = s.traversal;
            out << s.row.t << ',' << tr.visited_team_ids.size() << ',' << tr.executed_program_count << ','
                << tr.executed_instruction_count << ','
                << join(tr.visited_team_ids, [](TeamId id) { return std::to_string(id); }) << ','
                << join(tr.memory_reads,
                        [](const MemoryRead& r) {
                            return std::to_string(r.bank) + ':' + std::to_string(r.slot) + ':'
                                + std::to_string(r.last_write_step);
                        })
                << ','
                << join(tr.memory_writes,
                        [](const MemoryWrite& w) { return std::to_string(w.bank) + ':' + std::to_string(w.slot); })
                << ',' << tr.winning_program << '\n';
        }
    }
    {
        auto out = open_out(dir / (stem + "-memory.csv"));
        out << 't';
        for (BankId b : ep.bank_ids) {
            for (int k = 0; k < kMemorySize; ++k) {
                out << ",b" << b << 'm' << k;
            }
        }
        out << '\n';
        for (const auto& s : ep.steps) {
            out << s.row.t;
            for (const auto& bank : s.banks) {
                for (double v : bank) {
                    out << ',' << csv::number(v);
                }
            }
            out << '\n';
        }
    }
}

void write_scores(const fs::path& dir, const std::vector<ReplayEpisode>& episodes)
{
    fs::create_directories(dir);
    auto out = open_out(dir / "scores.csv");
    out << "episode,seed,reward,steps\n";
    for (const auto& ep : episodes) {
        out << ep.index << ',' << ep.seed << ',' << csv::number(ep.reward) << ',' << ep.steps.size() << '\n';
    }
}

namespace {

void read_env_trace(const fs::path& path, ReplayEpisode& ep)
{
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    const std::size_t hidden = task_spec(ep.task).hidden_count;
    while (std::getline(in, line)) {
        auto f = csv::split(line);
        if (f.size() != 7 + hidden) {
            throw DataError("bad trace row in " + path.string());
        }
        ReplayStep s;
        s.row.t = static_cast<std::size_t>(csv::to_int(f[0]));
        s.row.obs = Observation {csv::to_double(f[1]), csv::to_double(f[2])};
        s.row.action = ActionPair {static_cast<int>(csv::to_int(f[3])), csv::to_double(f[4])};
        s.row.reward = csv::to_double(f[5]);
        s.row.done = csv::to_int(f[6]) != 0;
        for (std::size_t k = 0; k < hidden; ++k) {
            s.row.hidden.push_back(csv::to_double(f[7 + k]));
        }
        ep.steps.push_back(std::move(s));
    }
}

void read_graph_trace(const fs::path& path, ReplayEpisode& ep)
{
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    std::size_t i = 0;
    while (std::getline(in, line)) {
        auto f = csv::split(line);
        if (f.size() != 8 || i >= ep.steps.size()) {
            throw DataError("bad graph row in " + path.string());
        }
        auto& tr = ep.steps[i++].traversal;
        tr.executed_program_count = static_cast<std::size_t>(csv::to_int(f[2]));
        tr.executed_instruction_count = static_cast<std::size_t>(csv::to_int(f[3]));
        for (auto w : words(f[4])) {
            tr.visited_team_ids.push_back(static_cast<TeamId>(csv::to_int(w)));
        }
        for (auto w : words(f[5])) {
            auto p = csv::split(w, ':');
            if (p.size() != 3) {
                throw DataError("bad read record in " + path.string());
            }
            tr.memory_reads.push_back(MemoryRead {static_cast<BankId>(csv::to_int(p[0])),
                                                  static_cast<int>(csv::to_int(p[1])),
                                                  static_cast<std::size_t>(csv::to_int(p[2]))});
        }
        for (auto w : words(f[6])) {
            auto p = csv::split(w, ':');
            if (p.size() != 2) {
                throw DataError("bad write record in " + path.string());
            }
            tr.memory_writes.push_back(
                MemoryWrite {static_cast<BankId>(csv::to_int(p[0])), static_cast<int>(csv::to_int(p[1]))});
        }
        tr.winning_program = static_cast<ProgramId>(csv::to_int(f[7]));
        if (tr.visited_team_ids.size() != static_cast<std::size_t>(csv::to_int(f[1]))) {
            throw DataError("visited count mismatch in " + path.string());
        }
    }
    if (i != ep.steps.size()) {
        throw DataError("graph trace length differs from environment trace in " + path.string());
    }
}

void read_memory_trace(const fs::path& path, ReplayEpisode& ep)
{
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);
    auto header = csv::split(line);
    if (header.empty() || (header.size() - 1) % kMemorySize != 0) {
        throw DataError("bad memory header in " + path.string());
    }
    for (std::size_t c = 1; c < header.size(); c += kMemorySize) {
        auto name = header[c];
        auto m = name.find('m');
        if (name.size() < 2 || name[0] != 'b' || m == std::string_view::npos) {
            throw DataError("bad memory column " + std::string(name));
        }
        ep.bank_ids.push_back(static_cast<BankId>(csv::to_int(name.substr(1, m - 1))));
    }
    std::size_t i = 0;
    while (std::getline(in, line)) {
        auto f = csv::split(line);
        if (f.size() != header.size() || i >= ep.steps.size()) {
            throw DataError("bad memory row in " + path.string());
        }
        auto& banks = ep.steps[i++].banks;
        banks.assign(ep.bank_ids.size(), {});
        for (std::size_t c = 1; c < f.size(); ++c) {
            banks[(c - 1) / kMemorySize][(c - 1) % kMemorySize] = csv::to_double(f[c]);
        }
    }
    if (i != ep.steps.size()) {
        throw DataError("memory trace length differs from environment trace in " + path.string());
    }
}

} // namespace

std::vector<ReplayEpisode> load_replay(const fs::path& run, TaskId task)
{
    const auto dir = replay_dir(run, task);
    if (!fs::is_directory(dir)) {
        throw MissingTraces("no replay traces for task " + std::to_string(task_index(task)) + " under "
                            + run.string());
    }
    auto in = open_in(dir / "scores.csv");
    std::string line;
    std::getline(in, line);
    std::vector<ReplayEpisode> out;
    while (std::getline(in, line)) {
        auto f = csv::split(line);
        if (f.size() != 4) {
            throw DataError("bad scores row in " + (dir / "scores.csv").string());
        }
        ReplayEpisode ep;
        ep.task = task;
        ep.index = static_cast<std::size_t>(csv::to_int(f[0]));
        ep.seed = std::stoull(std::string(f[1]));
        ep.reward = csv::to_double(f[2]);
        const auto stem = episode_stem(ep.index);
        read_env_trace(dir / (stem + ".csv"), ep);
        read_graph_trace(dir / (stem + "-graph.csv"), ep);
        read_memory_trace(dir / (stem + "-memory.csv"), ep);
        if (ep.steps.size() != static_cast<std::size_t>(csv::to_int(f[3]))) {
            throw DataError("episode " + std::to_string(ep.index) + " length differs from scores.csv");
        }
        out.push_back(std::move(ep));
    }
    return out;
}

} // namespace tpg
