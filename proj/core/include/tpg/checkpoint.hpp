#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "tpg/config.hpp"
#include "tpg/evolution.hpp"

namespace tpg {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    RunConfig config;
    EvolutionState state;
};

/// Versioned JSON document holding the whole run state.
std::string serialize_checkpoint(const EvolutionState& state, const std::string& output_dir);
Checkpoint parse_checkpoint(std::string_view text);

/// Writes through a temporary file and renames it into place. Throws
/// DataError if the file cannot be written.
void write_checkpoint(const EvolutionState& state, const std::string& output_dir, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

} // namespace tpg
