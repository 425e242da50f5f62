#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "tpg/team_graph.hpp"

namespace oracle {

struct Access {
    std::size_t step = 0;
    std::uint64_t bank = 0;
    int slot = 0;
    bool write = false;
};

/// Walks the population directly: no lowering, no precompiled node table.
/// Programs run through naive_run_logged on their effective mask.
class NaiveAgent {
public:
    NaiveAgent(const tpg::Population& pop, tpg::TeamId root);

    void reset();
    tpg::ActionPair act(double s0, double s1, std::size_t step, std::vector<tpg::TeamId>* visited = nullptr);

    const std::vector<Access>& log() const { return log_; }
    const std::map<std::uint64_t, std::array<double, 8>>& banks() const { return banks_; }

private:
    const tpg::Population& pop_;
    tpg::TeamId root_;
    std::map<std::uint64_t, std::array<double, 8>> banks_;
    std::vector<Access> log_;
};

/// Oldest last-write step among the reads of each step, found by scanning the
/// ordered log backwards from every read. -1 when the step has no reads.
std::vector<long> brute_force_oldest(const std::vector<Access>& log, std::size_t steps);

} // namespace oracle
