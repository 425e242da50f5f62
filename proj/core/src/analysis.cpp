#include "tpg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "tpg/csv.hpp"
#include "tpg/error.hpp"

namespace tpg {

namespace fs = std::filesystem;

std::vector<ComplexityRow> runtime_complexity(const ReplayEpisode& ep)
{
    std::vector<ComplexityRow> out;
    out.reserve(ep.steps.size());
    for (const auto& s : ep.steps) {
        out.push_back(ComplexityRow {ep.index, s.row.t, s.traversal.visited_team_ids.size(),
                                     s.traversal.executed_instruction_count});
    }
    return out;
}

Summary summarize(std::vector<double> values)
{
    if (values.empty()) {
        throw InsufficientData("no samples to summarize");
    }
    std::sort(values.begin(), values.end());
    Summary s;
    s.min = values.front();
    s.max = values.back();
    auto n = values.size();
    s.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(n);
    return s;
}

std::vector<WindowRow> memory_window(const ReplayEpisode& ep)
{
    std::vector<WindowRow> out;
    out.reserve(ep.steps.size());
    for (const auto& s : ep.steps) {
        const std::size_t t = s.row.t;
        std::size_t oldest = t;
        for (const auto& r : s.traversal.memory_reads) {
            oldest = std::min(oldest, r.last_write_step);
        }
        out.push_back(WindowRow {ep.index, t, oldest, t - oldest});
    }
    return out;
}

double pearson(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw InsufficientData("series lengths differ");
    }
    if (x.size() < 2) {
        throw InsufficientData("correlation needs at least 2 samples");
    }
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx;
        double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        return 0.0;
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> rescale_unit(std::span<const double> x)
{
    std::vector<double> out(x.size(), 0.0);
    if (x.empty()) {
        return out;
    }
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*hi == *lo) {
        return out;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = 2.0 * (x[i] - *lo) / (*hi - *lo) - 1.0;
    }
    return out;
}

std::vector<VelocityRow> velocity_correlation(std::span<const ReplayEpisode> episodes)
{
    if (episodes.empty()) {
        throw InsufficientData("no episodes");
    }
    const auto& bank_ids = episodes.front().bank_ids;
    const std::size_t hidden = task_spec(episodes.front().task).hidden_count;

    std::vector<std::vector<double>> velocity(hidden);
    std::vector<std::vector<double>> registers(bank_ids.size() * kMemorySize);
    for (const auto& ep : episodes) {
        if (ep.bank_ids != bank_ids) {
            throw DataError("episodes come from different agents");
        }
        for (const auto& s : ep.steps) {
            for (std::size_t h = 0; h < hidden; ++h) {
                velocity[h].push_back(s.row.hidden.at(h));
            }
            for (std::size_t b = 0; b < bank_ids.size(); ++b) {
                for (std::size_t k = 0; k < kMemorySize; ++k) {
                    registers[b * kMemorySize + k].push_back(s.banks.at(b)[k]);
                }
            }
        }
    }
    if (hidden > 0 && velocity.front().size() < 2) {
        throw InsufficientData("correlation needs at least 2 steps");
    }

    std::vector<VelocityRow> out;
    for (std::size_t h = 0; h < hidden; ++h) {
        auto v = rescale_unit(velocity[h]);
        VelocityRow best;
        best.hidden = h;
        double best_abs = -1.0;
        for (std::size_t c = 0; c < registers.size(); ++c) {
            double r = pearson(v, rescale_unit(registers[c]));
            if (std::abs(r) > best_abs) {
                best_abs = std::abs(r);
                best.bank = bank_ids[c / kMemorySize];
                best.slot = static_cast<int>(c % kMemorySize);
                best.r = r;
            }
        }
        out.push_back(best);
    }
    return out;
}

std::vector<DecompositionRow> task_decomposition(const ReplayEpisode& ep)
{
    std::vector<DecompositionRow> out;
    for (const auto& s : ep.steps) {
        const auto& visited = s.traversal.visited_team_ids;
        for (std::size_t i = 0; i < visited.size(); ++i) {
            DecompositionRow r;
            r.episode = ep.index;
            r.t = s.row.t;
            r.s0 = s.row.obs.s0;
            r.hidden0 = s.row.hidden.empty() ? 0.0 : s.row.hidden.front();
            r.team = visited[i];
            r.terminal = i + 1 == visited.size();
            r.a_d = s.row.action.a_d;
            r.a_c = s.row.action.a_c;
            out.push_back(r);
        }
    }
    return out;
}

double normalized_comparison(double raw, double random_baseline, double reference)
{
    if (reference == random_baseline) {
        throw DegenerateBaseline("reference score equals the random baseline");
    }
    return (raw - random_baseline) / (reference - random_baseline);
}

double random_baseline(TaskId task, std::size_t episodes, std::uint64_t seed)
{
    if (episodes == 0) {
        throw InsufficientData("baseline needs at least one episode");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < episodes; ++k) {
        Rng env_rng(derive_seed(seed, {static_cast<std::uint64_t>(task_index(task)), k, 0}));
        Rng policy_rng(derive_seed(seed, {static_cast<std::uint64_t>(task_index(task)), k, 1}));
        total += run_episode(
                     task, [&](const Observation&, std::size_t) { return random_action(task, policy_rng); }, env_rng)
                     .total_reward;
    }
    return total / static_cast<double>(episodes);
}

std::vector<NormalizedRow> normalized_report(const std::vector<ArchiveEntry>& archive,
                                             const std::vector<TaskId>& tasks, const TaskScores& random,
                                             const std::optional<TaskScores>& reference)
{
    if (archive.empty()) {
        throw InsufficientData("empty champion archive");
    }
    TaskScores ref {};
    if (reference) {
        ref = *reference;
    } else {
        for (TaskId t : tasks) {
            auto k = static_cast<std::size_t>(task_index(t));
            ref[k] = -std::numeric_limits<double>::infinity();
            for (const auto& e : archive) {
                if (e.set == task_bit(t)) {
                    ref[k] = std::max(ref[k], e.test_mean[k]);
                }
            }
            if (!std::isfinite(ref[k])) {
                throw InsufficientData("no single-task champion for task " + std::to_string(task_index(t)));
            }
        }
    }
    std::size_t latest = 0;
    for (const auto& e : archive) {
        latest = std::max(latest, e.generation);
    }
    std::vector<NormalizedRow> out;
    for (const auto& e : archive) {
        if (e.generation != latest) {
            continue;
        }
        for (TaskId t : tasks_in(e.set)) {
            auto k = static_cast<std::size_t>(task_index(t));
            NormalizedRow r;
            r.set = e.set;
            r.team = e.team;
            r.task = t;
            r.raw = e.test_mean[k];
            r.random = random[k];
            r.reference = ref[k];
            r.normalized = normalized_comparison(r.raw, r.random, r.reference);
            out.push_back(r);
        }
    }
    return out;
}

std::vector<std::string> analysis_names()
{
    return {"complexity", "complexity-summary", "memory-window", "velocity", "decomposition"};
}

fs::path run_analysis(const fs::path& run, const std::string& name, TaskId task)
{
    const auto names = analysis_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw DataError("unknown analysis '" + name + "'");
    }
    auto episodes = load_replay(run, task);
    if (episodes.empty()) {
        throw MissingTraces("scores.csv lists no episodes");
    }
    const auto path = run / (name + "-task" + std::to_string(task_index(task)) + ".csv");
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }

    if (name == "complexity") {
        out << "episode,t,teams_visited,instructions_executed\n";
        for (const auto& ep : episodes) {
            for (const auto& r : runtime_complexity(ep)) {
                out << r.episode << ',' << r.t << ',' << r.teams_visited << ',' << r.instructions_executed << '\n';
            }
        }
    } else if (name == "complexity-summary") {
        std::vector<double> teams;
        std::vector<double> instructions;
        for (const auto& ep : episodes) {
            for (const auto& r : runtime_complexity(ep)) {
                teams.push_back(static_cast<double>(r.teams_visited));
                instructions.push_back(static_cast<double>(r.instructions_executed));
            }
        }
        out << "measure,min,median,max,mean\n";
        auto row = [&out](const char* label, const Summary& s) {
            out << label << ',' << csv::number(s.min) << ',' << csv::number(s.median) << ',' << csv::number(s.max)
                << ',' << csv::number(s.mean) << '\n';
        };
        row("teams_visited", summarize(teams));
        row("instructions_executed", summarize(instructions));
    } else if (name == "memory-window") {
        out << "episode,t,oldest_access,width\n";
        for (const auto& ep : episodes) {
            for (const auto& r : memory_window(ep)) {
                out << r.episode << ',' << r.t << ',' << r.oldest_access << ',' << r.width << '\n';
            }
        }
    } else if (name == "velocity") {
        out << "hidden,bank,slot,r\n";
        for (const auto& r : velocity_correlation(episodes)) {
            out << r.hidden << ',' << r.bank << ',' << r.slot << ',' << csv::number(r.r) << '\n';
        }
    } else {
        out << "episode,t,s0,hidden_v0,team,terminal,a_d,a_c\n";
        for (const auto& ep : episodes) {
            for (const auto& r : task_decomposition(ep)) {
                out << r.episode << ',' << r.t << ',' << csv::number(r.s0) << ',' << csv::number(r.hidden0) << ','
                    << r.team << ',' << (r.terminal ? 1 : 0) << ',' << r.a_d << ',' << csv::number(r.a_c) << '\n';
            }
        }
    }
    if (!out) {
        throw DataError("failed writing " + path.string());
    }
    return path;
}

} // namespace tpg
