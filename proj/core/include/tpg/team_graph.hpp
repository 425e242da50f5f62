#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tpg/env.hpp"
#include "tpg/lgp.hpp"
#include "tpg/random.hpp"

namespace tpg {

/// A graph vertex: an ordered group of programs. Order is significant since
/// programs sharing a bank see each other's writes.
struct Team {
    TeamId id = 0;
    std::vector<ProgramId> programs;
    // Programs in other teams pointing here; maintained by Population.
    std::size_t indegree = 0;

    friend bool operator==(const Team&, const Team&) = default;
};

/// Coevolving stores of teams, programs and memory banks.
class Population {
public:
    std::map<BankId, MemoryBank> banks;
    std::map<ProgramId, ProgramPtr> programs;
    std::map<TeamId, Team> teams;
    IdAllocator ids;

    const Program& program(ProgramId id) const;
    const Team& team(TeamId id) const;
    bool has_team(TeamId id) const { return teams.contains(id); }

    BankId add_bank();
    /// Registers a program (and its bank if unseen). Returns the id.
    ProgramId add_program(Program p);
    /// Inserts a team and bumps the indegree of every team its programs point at.
    void add_team(Team team);
    void remove_team(TeamId id);

    bool is_root(TeamId id) const { return team(id).indegree == 0; }
    std::vector<TeamId> roots() const;

    std::size_t leaf_count(const Team& team) const;
    bool satisfies_invariants(const Team& team) const;

    /// Indegrees recomputed from scratch out of program action pointers.
    std::map<TeamId, std::size_t> recount_indegrees() const;
    bool indegrees_consistent() const;

    /// Teams reachable from `roots` through program action pointers.
    std::vector<TeamId> reachable_from(std::span<const TeamId> roots) const;

    /// Deletes programs no team references, then banks no program references.
    void remove_orphans();

    /// Structural checksum for determinism checks.
    std::uint64_t checksum() const;

private:
    // References to teams not (or no longer) in the store, so indegrees stay
    // correct whatever order teams arrive in.
    std::map<TeamId, std::size_t> dangling_;
};

struct MemoryRead {
    BankId bank = 0;
    int slot = 0;
    std::size_t last_write_step = 0;

    friend bool operator==(const MemoryRead&, const MemoryRead&) = default;
};

struct MemoryWrite {
    BankId bank = 0;
    int slot = 0;

    friend bool operator==(const MemoryWrite&, const MemoryWrite&) = default;
};

struct TraversalTrace {
    std::vector<TeamId> visited_team_ids;
    std::size_t executed_program_count = 0;
    std::size_t executed_instruction_count = 0;
    std::vector<MemoryRead> memory_reads;
    std::vector<MemoryWrite> memory_writes;
    ProgramId winning_program = 0;

    void clear();
};

struct AgentOptions {
    // Ablation: every register (shared banks included) is reset before each
    // program execution.
    bool stateless_memory = false;
};

/// A root team's program graph lowered for repeated traversal. Owns private
/// copies of every reachable bank, so agents are independent of each other
/// and of the population they were built from.
class Agent {
public:
    Agent(const Population& pop, TeamId root, AgentOptions options = {});

    /// Zeroes every bank; call at the start of each episode.
    void reset();

    /// One root-to-leaf traversal. Every program of a visited team executes
    /// in order; the best-ranked edge that is a leaf or leads to an unvisited
    /// team is followed.
    ActionPair act(const Observation& obs, std::size_t step, TraversalTrace* trace = nullptr);

    TeamId root() const { return nodes_.front().id; }
    std::size_t team_count() const { return nodes_.size(); }
    std::size_t program_count() const;
    const std::vector<BankId>& bank_ids() const { return bank_ids_; }
    std::span<const std::array<double, kMemorySize>> banks() const { return banks_; }

private:
    struct Edge {
        ProgramPtr program;
        int bank = 0;
        int next = -1;  // node index, -1 for a leaf
        int action = 0;
    };
    struct Node {
        TeamId id = 0;
        std::vector<Edge> edges;
    };

    AgentOptions options_;
    std::vector<Node> nodes_;
    std::vector<BankId> bank_ids_;
    std::vector<std::array<double, kMemorySize>> banks_;
    std::vector<std::array<std::size_t, kMemorySize>> last_write_;
    std::vector<char> visited_;
    std::vector<double> weights_;
    std::vector<double> outputs_;
    std::vector<int> order_;
};

struct TeamParams {
    double p_md = 0.7;
    double p_ma = 0.6;
    double p_mm = 0.2;
    double p_mn = 0.1;
    double p_ms = 0.1;
    double p_atomic = 0.95;
    // Delete/add repeat while their coin succeeds; modify and both pointer
    // operators are tried once per program. Off: each operator fires at most once.
    bool per_program = true;
};

/// Candidate pools for variation: programs and banks that can be attached,
/// teams that pointer mutations may target.
struct VariationPools {
    std::vector<ProgramId> programs;
    std::vector<BankId> banks;
    std::vector<TeamId> teams;

    static VariationPools from(const Population& pop);
};

/// Fresh id, same ordered program ids, indegree 0.
Team clone_team(const Team& team, IdAllocator& ids);

/// Keep-masks for crossover. mask1[i] selects parent1.programs[i].
struct CrossoverMasks {
    std::vector<bool> keep1;
    std::vector<bool> keep2;
};

CrossoverMasks random_crossover_masks(const Team& p1, const Team& p2, Rng& rng);

/// Interleaves the kept programs of both parents, each parent's order
/// preserved. A program present in both parents is placed at parent1's
/// position. Repairs (size < 2 or no leaf) add parent1 programs.
Team team_crossover(const Team& p1, const Team& p2, const Population& pop, Rng& rng, IdAllocator& ids);
Team team_crossover(const Team& p1, const Team& p2, const CrossoverMasks& masks, const Population& pop, Rng& rng,
                    IdAllocator& ids);

/// Applies delete / add / modify / action-pointer / memory-pointer operators,
/// each with its own probability. New programs (and clones of subsumed roots)
/// are registered in `pop`; the team itself is not inserted.
void mutate_team(Team& team, Population& pop, Rng& rng, const TeamParams& params, const ProgramParams& prog_params,
                 VariationPools& pools);

/// Picks a pointer target for `self`: uniform over pools.teams minus self.
/// A root target is cloned first and the clone returned.
std::optional<TeamId> pick_pointer_target(TeamId self, Population& pop, Rng& rng, VariationPools& pools);

} // namespace tpg
