#include "tpg/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "tpg/csv.hpp"
#include "tpg/error.hpp"

namespace tpg {

namespace {

struct Key {
    const char* name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::size_t to_count(const std::string& v)
{
    long long n = 0;
    try {
        n = csv::to_int(v);
    } catch (const DataError&) {
        throw ConfigError("expected a non-negative integer, got '" + v + "'");
    }
    if (n < 0) {
        throw ConfigError("expected a non-negative integer, got '" + v + "'");
    }
    return static_cast<std::size_t>(n);
}

double to_real(const std::string& v)
{
    try {
        return csv::to_double(v);
    } catch (const DataError&) {
        throw ConfigError("expected a number, got '" + v + "'");
    }
}

bool to_flag(const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        return false;
    }
    throw ConfigError("expected true/false, got '" + v + "'");
}

std::string flag(bool b) { return b ? "true" : "false"; }

#define TPG_COUNT(key, field)                                                                            \
    Key { key, [](const RunConfig& c) { return std::to_string(c.field); },                              \
          [](RunConfig& c, const std::string& v) { c.field = to_count(v); } }
#define TPG_REAL(key, field)                                                                             \
    Key { key, [](const RunConfig& c) { return csv::number(c.field); },                                 \
          [](RunConfig& c, const std::string& v) { c.field = to_real(v); } }
#define TPG_FLAG(key, field)                                                                             \
    Key { key, [](const RunConfig& c) { return flag(c.field); },                                        \
          [](RunConfig& c, const std::string& v) { c.field = to_flag(v); } }

const std::vector<Key>& keys()
{
    static const std::vector<Key> table {
        TPG_COUNT("R_size", params.R_size),
        TPG_COUNT("n_elite", params.n_elite),
        TPG_COUNT("tmSize_init", params.tm_size_init),
        TPG_REAL("p_x", params.p_x),
        TPG_REAL("p_md", params.team.p_md),
        TPG_REAL("p_ma", params.team.p_ma),
        TPG_REAL("p_mm", params.team.p_mm),
        TPG_REAL("p_mn", params.team.p_mn),
        TPG_REAL("p_ms", params.team.p_ms),
        TPG_REAL("p_atomic", params.team.p_atomic),
        TPG_FLAG("per_program_mutation", params.team.per_program),
        TPG_COUNT("progSize_init", params.program.prog_size_init),
        TPG_REAL("p_delete", params.program.p_delete),
        TPG_REAL("p_add", params.program.p_add),
        TPG_REAL("p_mutate", params.program.p_mutate),
        TPG_REAL("p_swap", params.program.p_swap),
        TPG_COUNT("episodes_per_task", params.episodes_per_task),
        TPG_COUNT("generations", params.generations),
        Key {"seed", [](const RunConfig& c) { return std::to_string(c.params.seed); },
             [](RunConfig& c, const std::string& v) {
                 try {
                     std::size_t used = 0;
                     c.params.seed = std::stoull(v, &used);
                     if (used != v.size()) {
                         throw ConfigError("");
                     }
                 } catch (const std::exception&) {
                     throw ConfigError("expected an unsigned seed, got '" + v + "'");
                 }
             }},
        Key {"tasks", [](const RunConfig& c) { return format_tasks(c.params.tasks); },
             [](RunConfig& c, const std::string& v) { c.params.tasks = parse_tasks(v); }},
        Key {"output_dir", [](const RunConfig& c) { return c.output_dir; },
             [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
        TPG_COUNT("checkpoint_interval", params.checkpoint_interval),
        TPG_COUNT("test_interval", params.test_interval),
        TPG_COUNT("test_episodes", params.test_episodes),
        TPG_COUNT("threads", params.threads),
        TPG_FLAG("no_crossover", params.no_crossover),
        TPG_FLAG("no_memory", params.no_memory),
        TPG_FLAG("no_hierarchy", params.no_hierarchy),
    };
    return table;
}

#undef TPG_COUNT
#undef TPG_REAL
#undef TPG_FLAG

const Key* find_key(const std::string& name)
{
    for (const auto& k : keys()) {
        if (name == k.name) {
            return &k;
        }
    }
    return nullptr;
}

std::string env_name(const std::string& key)
{
    std::string out = "TPG_";
    for (char c : key) {
        out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

} // namespace

std::string format_tasks(const std::vector<TaskId>& tasks)
{
    std::string out;
    for (auto t : tasks) {
        if (!out.empty()) {
            out += ',';
        }
        out += task_name(t);
    }
    return out;
}

std::vector<TaskId> parse_tasks(std::string_view text)
{
    std::vector<TaskId> out;
    if (trim(text).empty()) {
        return out;
    }
    for (auto field : csv::split(text, ',')) {
        auto name = trim(field);
        auto task = parse_task(name);
        if (!task) {
            throw ConfigError("unknown task '" + name + "'");
        }
        if (std::find(out.begin(), out.end(), *task) == out.end()) {
            out.push_back(*task);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

ConfigPairs to_pairs(const RunConfig& cfg)
{
    ConfigPairs out;
    for (const auto& k : keys()) {
        out.emplace_back(k.name, k.get(cfg));
    }
    return out;
}

RunConfig apply_pairs(RunConfig base, const ConfigPairs& pairs)
{
    for (const auto& [name, value] : pairs) {
        const Key* key = find_key(name);
        if (key == nullptr) {
            throw ConfigError("unknown key '" + name + "'");
        }
        try {
            key->set(base, value);
        } catch (const ConfigError& e) {
            throw ConfigError(name + ": " + e.what());
        }
    }
    return base;
}

RunConfig parse_config(std::istream& in)
{
    ConfigPairs pairs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        auto text = trim(line);
        if (text.empty()) {
            continue;
        }
        auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        }
        pairs.emplace_back(trim(std::string_view(text).substr(0, eq)), trim(std::string_view(text).substr(eq + 1)));
    }
    return apply_pairs(RunConfig {}, pairs);
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    return parse_config(in);
}

std::string format_config(const RunConfig& cfg)
{
    std::ostringstream out;
    for (const auto& [k, v] : to_pairs(cfg)) {
        out << k << " = " << v << '\n';
    }
    return out.str();
}

RunConfig apply_env_overrides(RunConfig cfg, const EnvLookup& lookup)
{
    ConfigPairs pairs;
    for (const auto& k : keys()) {
        if (auto v = lookup(env_name(k.name))) {
            pairs.emplace_back(k.name, trim(*v));
        }
    }
    return apply_pairs(std::move(cfg), pairs);
}

std::optional<std::string> process_env(const std::string& name)
{
    if (const char* v = std::getenv(name.c_str())) {
        return std::string(v);
    }
    return std::nullopt;
}

void validate(const RunConfig& cfg)
{
    const auto& p = cfg.params;
    const std::pair<const char*, double> probabilities[] {
        {"p_x", p.p_x},           {"p_md", p.team.p_md},          {"p_ma", p.team.p_ma},
        {"p_mm", p.team.p_mm},    {"p_mn", p.team.p_mn},          {"p_ms", p.team.p_ms},
        {"p_atomic", p.team.p_atomic}, {"p_delete", p.program.p_delete}, {"p_add", p.program.p_add},
        {"p_mutate", p.program.p_mutate}, {"p_swap", p.program.p_swap},
    };
    for (const auto& [name, value] : probabilities) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw ConfigError(std::string(name) + " must lie in [0,1]");
        }
    }
    if (p.tasks.empty()) {
        throw ConfigError("tasks must not be empty");
    }
    if (p.R_size < 2) {
        throw ConfigError("R_size must be at least 2");
    }
    if (p.n_elite < 1) {
        throw ConfigError("n_elite must be at least 1");
    }
    if (p.episodes_per_task < 1) {
        throw ConfigError("episodes_per_task must be at least 1");
    }
    if (p.program.prog_size_init < 1) {
        throw ConfigError("progSize_init must be at least 1");
    }
    if (p.threads < 1) {
        throw ConfigError("threads must be at least 1");
    }
}

} // namespace tpg
