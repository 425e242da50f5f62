#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tpg/evolution.hpp"

namespace tpg {

struct RunConfig {
    EvolutionParams params;
    std::string output_dir = "run";
};

using ConfigPairs = std::vector<std::pair<std::string, std::string>>;

/// Every key in canonical order with its current value.
ConfigPairs to_pairs(const RunConfig& cfg);

/// Applies `key = value` assignments on top of `base`. Unknown keys and
/// malformed values throw ConfigError.
RunConfig apply_pairs(RunConfig base, const ConfigPairs& pairs);

/// Flat `key = value` text; `#` starts a comment.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);
std::string format_config(const RunConfig& cfg);

/// `TPG_<KEY>` overrides, key upper-cased (TPG_R_SIZE, TPG_P_X, ...).
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
RunConfig apply_env_overrides(RunConfig cfg, const EnvLookup& lookup);
std::optional<std::string> process_env(const std::string& name);

/// Probabilities in [0,1], R_size >= 2, n_elite >= 1, non-empty task list.
void validate(const RunConfig& cfg);

std::string format_tasks(const std::vector<TaskId>& tasks);
std::vector<TaskId> parse_tasks(std::string_view text);

} // namespace tpg
