#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tpg/analysis.hpp"
#include "tpg/checkpoint.hpp"
#include "tpg/csv.hpp"
#include "tpg/error.hpp"
#include "tpg/evolution.hpp"
#include "tpg/replay.hpp"

namespace tpg::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kReplayDomain = 0x5EED'4E91'A700'0001ULL;

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc)
{
    std::ofstream out(path, mode);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    return out;
}

void make_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw DataError("cannot create output directory " + dir.string());
    }
}

// Keeps the header and every row whose leading generation field is <= gen.
void truncate_after(const fs::path& path, std::size_t gen, const std::string& header)
{
    std::vector<std::string> kept {header};
    if (std::ifstream in(path); in) {
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            auto comma = line.find(',');
            if (comma == std::string::npos) {
                continue;
            }
            if (static_cast<std::size_t>(csv::to_int(std::string_view(line).substr(0, comma))) <= gen) {
                kept.push_back(line);
            }
        }
    }
    auto out = open_out(path);
    for (const auto& l : kept) {
        out << l << '\n';
    }
}

void run_in(const fs::path& dir, EvolutionState& state, std::ostream& out)
{
    auto metrics = open_out(dir / "metrics.csv", std::ios::app);
    auto archive = open_out(dir / "archive.csv", std::ios::app);
    make_dir(dir / "checkpoints");

    RunSinks sinks;
    sinks.metrics = &metrics;
    sinks.archive = &archive;
    sinks.checkpoint = [&dir](const EvolutionState& s) {
        write_checkpoint(s, dir.string(), dir / "checkpoints" / ("gen" + std::to_string(s.generation) + ".json"));
        write_checkpoint(s, dir.string(), dir / "checkpoint.json");
    };

    const TaskMask all = mask_of(state.params.tasks);
    while (state.generation < state.params.generations) {
        step_generation(state, sinks);
        TeamId best = champion(state, all);
        out << "gen " << state.generation << "  roots " << state.scores.size() << "  teams "
            << state.pop.teams.size() << "  champion(" << task_set_label(all) << ") " << best << '\n';
    }
    if (!state.archive.empty()) {
        const auto& last = state.archive.back();
        out << "final champion " << last.team << " test:";
        for (TaskId t : tasks_in(last.set)) {
            out << ' ' << task_name(t) << '=' << csv::number(last.test_mean[static_cast<std::size_t>(task_index(t))]);
        }
        out << '\n';
    }
}

TaskScores read_baseline(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw MissingTraces("missing random baseline " + path.string() + " (run `tpg baseline`)");
    }
    TaskScores out {};
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        auto f = csv::split(line);
        if (f.size() != 3) {
            throw DataError("bad baseline row: " + line);
        }
        auto task = parse_task(f[0]);
        if (!task) {
            throw DataError("bad baseline task: " + std::string(f[0]));
        }
        out[static_cast<std::size_t>(task_index(*task))] = csv::to_double(f[2]);
    }
    return out;
}

void write_normalized(const fs::path& run, std::ostream& out)
{
    std::ifstream in(run / "archive.csv");
    if (!in) {
        throw MissingTraces("missing champion archive " + (run / "archive.csv").string());
    }
    auto archive = parse_archive(in);
    auto random = read_baseline(run / "baseline.csv");
    std::vector<TaskId> tasks;
    for (const auto& e : archive) {
        for (TaskId t : tasks_in(e.set)) {
            if (std::find(tasks.begin(), tasks.end(), t) == tasks.end()) {
                tasks.push_back(t);
            }
        }
    }
    std::sort(tasks.begin(), tasks.end());
    auto rows = normalized_report(archive, tasks, random);
    for (TaskId t : tasks) {
        auto path = run / ("normalized-task" + std::to_string(task_index(t)) + ".csv");
        auto file = open_out(path);
        file << "task_set,team,raw,random,reference,normalized\n";
        for (const auto& r : rows) {
            if (r.task == t) {
                file << task_set_label(r.set) << ',' << r.team << ',' << csv::number(r.raw) << ','
                     << csv::number(r.random) << ',' << csv::number(r.reference) << ','
                     << csv::number(r.normalized) << '\n';
            }
        }
        out << path.string() << '\n';
    }
}

} // namespace

void cmd_train(const TrainOptions& opts, std::ostream& out, const EnvLookup& env)
{
    RunConfig cfg = load_config(opts.config);
    cfg = apply_env_overrides(std::move(cfg), env);
    if (opts.seed) {
        cfg.params.seed = *opts.seed;
    }
    if (opts.threads) {
        cfg.params.threads = *opts.threads;
    }
    if (opts.generations) {
        cfg.params.generations = *opts.generations;
    }
    if (opts.tasks) {
        cfg.params.tasks = parse_tasks(*opts.tasks);
    }
    if (opts.output) {
        cfg.output_dir = *opts.output;
    }
    validate(cfg);

    const fs::path dir = cfg.output_dir;
    make_dir(dir);
    open_out(dir / "config.txt") << format_config(cfg);
    open_out(dir / "metrics.csv") << metrics_header() << '\n';
    open_out(dir / "archive.csv") << archive_header() << '\n';

    out << "training " << format_tasks(cfg.params.tasks) << " (" << task_sets(cfg.params.tasks).size()
        << " task sets) into " << dir.string() << '\n';
    EvolutionState state = start_evolution(cfg.params);
    run_in(dir, state, out);
}

void cmd_resume(const ResumeOptions& opts, std::ostream& out)
{
    Checkpoint cp = read_checkpoint(opts.checkpoint);
    if (opts.generations) {
        cp.state.params.generations = *opts.generations;
    }
    if (opts.threads) {
        cp.state.params.threads = *opts.threads;
    }
    if (opts.output) {
        cp.config.output_dir = *opts.output;
    }
    cp.config.params = cp.state.params;
    validate(cp.config);

    const fs::path dir = cp.config.output_dir;
    make_dir(dir);
    truncate_after(dir / "metrics.csv", cp.state.generation, metrics_header());
    truncate_after(dir / "archive.csv", cp.state.generation, archive_header());
    out << "resuming at generation " << cp.state.generation << " of " << cp.state.params.generations << '\n';
    run_in(dir, cp.state, out);
}

void cmd_replay(const ReplayOptions& opts, std::ostream& out)
{
    Checkpoint cp = read_checkpoint(opts.checkpoint);
    const auto& params = cp.state.params;

    auto set = parse_task_set(opts.champion);
    if (!set || (*set & mask_of(params.tasks)) != *set) {
        throw UnknownChampion("no champion for task set '" + opts.champion + "' in this run");
    }
    auto task = parse_task(opts.task);
    if (!task || std::find(params.tasks.begin(), params.tasks.end(), *task) == params.tasks.end()) {
        throw UnknownTask("task '" + opts.task + "' is not part of this run");
    }
    TeamId team = champion(cp.state, *set);

    const fs::path run = opts.output ? fs::path(*opts.output) : fs::path(opts.checkpoint).parent_path();
    const fs::path dir = replay_dir(run.empty() ? fs::path(".") : run, *task);
    make_dir(dir);

    const std::uint64_t base = opts.seed.value_or(mix64(params.seed ^ kReplayDomain));
    std::vector<ReplayEpisode> episodes;
    double total = 0.0;
    for (std::size_t k = 0; k < opts.episodes; ++k) {
        std::uint64_t seed = opts.test_seeds ? test_seed(params.seed, *task, k)
                                             : derive_seed(base, {static_cast<std::uint64_t>(task_index(*task)), k});
        auto ep = replay_episode(cp.state.pop, team, *task, seed, k, params.agent_options());
        if (opts.trace) {
            write_episode(dir, ep);
        }
        total += ep.reward;
        ep.steps.shrink_to_fit();
        episodes.push_back(std::move(ep));
    }
    write_scores(dir, episodes);
    out << "champion " << team << " of set " << task_set_label(*set) << " on " << task_name(*task) << ": mean "
        << csv::number(opts.episodes == 0 ? 0.0 : total / static_cast<double>(opts.episodes)) << " over "
        << opts.episodes << " episodes\n";
}

void cmd_analyze(const AnalyzeOptions& opts, std::ostream& out)
{
    const fs::path run = opts.run;
    if (opts.analysis == "normalized") {
        write_normalized(run, out);
        return;
    }
    const auto names = analysis_names();
    if (std::find(names.begin(), names.end(), opts.analysis) == names.end()) {
        throw ConfigError("unknown analysis '" + opts.analysis + "'");
    }
    std::vector<TaskId> tasks;
    if (opts.task) {
        auto t = parse_task(*opts.task);
        if (!t) {
            throw UnknownTask("unknown task '" + *opts.task + "'");
        }
        tasks.push_back(*t);
    } else {
        for (TaskId t : kAllTasks) {
            if (fs::is_directory(replay_dir(run, t))) {
                tasks.push_back(t);
            }
        }
        if (tasks.empty()) {
            throw MissingTraces("no replay traces under " + run.string());
        }
    }
    for (TaskId t : tasks) {
        out << run_analysis(run, opts.analysis, t).string() << '\n';
    }
}

void cmd_baseline(const BaselineOptions& opts, std::ostream& out)
{
    auto tasks = parse_tasks(opts.tasks);
    if (tasks.empty()) {
        throw ConfigError("tasks must not be empty");
    }
    const fs::path dir = opts.output;
    make_dir(dir);
    auto file = open_out(dir / "baseline.csv");
    file << "task,episodes,mean\n";
    for (TaskId t : tasks) {
        double mean = random_baseline(t, opts.episodes, opts.seed);
        file << task_name(t) << ',' << opts.episodes << ',' << csv::number(mean) << '\n';
        out << task_name(t) << ": " << csv::number(mean) << '\n';
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err, const EnvLookup& env)
{
    CLI::App app {"Tangled program graph evolution, replay and analysis"};
    app.require_subcommand(1);

    TrainOptions train;
    auto* train_cmd = app.add_subcommand("train", "Evolve a population from a config file");
    train_cmd->add_option("config", train.config, "Config file (key = value)")->required();
    train_cmd->add_option("--seed", train.seed, "Override the master seed");
    train_cmd->add_option("--threads", train.threads, "Evaluation threads");
    train_cmd->add_option("--generations", train.generations, "Override the generation count");
    train_cmd->add_option("--tasks", train.tasks, "Comma-separated task names or ids");
    train_cmd->add_option("--output", train.output, "Run directory");

    ResumeOptions resume;
    auto* resume_cmd = app.add_subcommand("resume", "Continue a run from a checkpoint");
    resume_cmd->add_option("checkpoint", resume.checkpoint, "Checkpoint file")->required();
    resume_cmd->add_option("--generations", resume.generations, "New total generation count");
    resume_cmd->add_option("--threads", resume.threads, "Evaluation threads");
    resume_cmd->add_option("--output", resume.output, "Run directory");

    ReplayOptions replay;
    auto* replay_cmd = app.add_subcommand("replay", "Run test episodes of a champion and record traces");
    replay_cmd->add_option("checkpoint", replay.checkpoint, "Checkpoint file")->required();
    replay_cmd->add_option("--champion", replay.champion, "Task set, e.g. 0,3")->required();
    replay_cmd->add_option("--task", replay.task, "Task to replay on")->required();
    replay_cmd->add_option("--episodes", replay.episodes, "Episode count");
    replay_cmd->add_flag("--trace", replay.trace, "Write per-episode trace files");
    replay_cmd->add_flag("--test-seeds", replay.test_seeds, "Use the seeds of the training-time tests");
    replay_cmd->add_option("--seed", replay.seed, "Seed for fresh episodes");
    replay_cmd->add_option("--output", replay.output, "Run directory (default: the checkpoint's directory)");

    AnalyzeOptions analyze;
    auto* analyze_cmd = app.add_subcommand("analyze", "Reduce replay traces to CSV");
    analyze_cmd->add_option("run", analyze.run, "Run directory")->required();
    analyze_cmd
        ->add_option("analysis", analyze.analysis,
                     "complexity | complexity-summary | memory-window | velocity | decomposition | normalized")
        ->required();
    analyze_cmd->add_option("--task", analyze.task, "Only this task");

    BaselineOptions baseline;
    auto* baseline_cmd = app.add_subcommand("baseline", "Random-policy baselines");
    baseline_cmd->add_option("--tasks", baseline.tasks, "Comma-separated task names or ids");
    baseline_cmd->add_option("--episodes", baseline.episodes, "Episodes per task");
    baseline_cmd->add_option("--seed", baseline.seed, "Seed");
    baseline_cmd->add_option("--output", baseline.output, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (*train_cmd) {
            cmd_train(train, out, env);
        } else if (*resume_cmd) {
            cmd_resume(resume, out);
        } else if (*replay_cmd) {
            cmd_replay(replay, out);
        } else if (*analyze_cmd) {
            cmd_analyze(analyze, out);
        } else if (*baseline_cmd) {
            cmd_baseline(baseline, out);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kOk;
}

} // namespace tpg::cli
