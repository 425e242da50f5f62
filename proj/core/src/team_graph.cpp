#include "tpg/team_graph.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "tpg/error.hpp"

namespace tpg {

// --- Population --------------------------------------------------------------

const Program& Population::program(ProgramId id) const
{
    auto it = programs.find(id);
    if (it == programs.end()) {
        throw DataError("unknown program " + std::to_string(id));
    }
    return *it->second;
}

const Team& Population::team(TeamId id) const
{
    auto it = teams.find(id);
    if (it == teams.end()) {
        throw DataError("unknown team " + std::to_string(id));
    }
    return it->second;
}

BankId Population::add_bank()
{
    BankId id = ids.bank();
    banks.emplace(id, MemoryBank {id, {}});
    return id;
}

ProgramId Population::add_program(Program p)
{
    ProgramId id = p.id();
    BankId bank = p.memory_ref();
    if (!banks.contains(bank)) {
        banks.emplace(bank, MemoryBank {bank, {}});
    }
    programs.emplace(id, std::make_shared<const Program>(std::move(p)));
    return id;
}

void Population::add_team(Team team)
{
    auto& dangling = dangling_;
    TeamId id = team.id;
    team.indegree = 0;
    if (auto it = dangling.find(id); it != dangling.end()) {
        team.indegree = it->second;
        dangling.erase(it);
    }
    for (ProgramId pid : team.programs) {
        const auto& action = program(pid).action();
        if (const auto* ref = std::get_if<TeamRef>(&action); ref != nullptr && ref->team != id) {
            if (auto t = teams.find(ref->team); t != teams.end()) {
                t->second.indegree += 1;
            } else {
                dangling[ref->team] += 1;
            }
        }
    }
    teams.insert_or_assign(id, std::move(team));
}

void Population::remove_team(TeamId id)
{
    auto node = teams.extract(id);
    if (node.empty()) {
        return;
    }
    auto& dangling = dangling_;
    const Team& team = node.mapped();
    for (ProgramId pid : team.programs) {
        const auto& action = program(pid).action();
        if (const auto* ref = std::get_if<TeamRef>(&action); ref != nullptr && ref->team != id) {
            if (auto t = teams.find(ref->team); t != teams.end()) {
                t->second.indegree -= 1;
            } else if (auto d = dangling.find(ref->team); d != dangling.end() && --d->second == 0) {
                dangling.erase(d);
            }
        }
    }
    if (team.indegree > 0) {
        dangling[id] += team.indegree;
    }
}

std::vector<TeamId> Population::roots() const
{
    std::vector<TeamId> out;
    for (const auto& [id, team] : teams) {
        if (team.indegree == 0) {
            out.push_back(id);
        }
    }
    return out;
}

std::size_t Population::leaf_count(const Team& team) const
{
    return static_cast<std::size_t>(std::count_if(team.programs.begin(), team.programs.end(),
                                                   [this](ProgramId pid) { return is_leaf(program(pid).action()); }));
}

bool Population::satisfies_invariants(const Team& team) const
{
    if (team.programs.size() < 2 || leaf_count(team) < 1) {
        return false;
    }
    std::set<ProgramId> unique(team.programs.begin(), team.programs.end());
    return unique.size() == team.programs.size();
}

std::map<TeamId, std::size_t> Population::recount_indegrees() const
{
    std::map<TeamId, std::size_t> counts;
    for (const auto& [id, team] : teams) {
        counts[id];
        for (ProgramId pid : team.programs) {
            const auto& action = program(pid).action();
            if (const auto* ref = std::get_if<TeamRef>(&action); ref != nullptr && ref->team != id
                && teams.contains(ref->team)) {
                counts[ref->team] += 1;
            }
        }
    }
    return counts;
}

bool Population::indegrees_consistent() const
{
    auto counts = recount_indegrees();
    return std::all_of(teams.begin(), teams.end(),
                       [&](const auto& kv) { return counts[kv.first] == kv.second.indegree; });
}

std::vector<TeamId> Population::reachable_from(std::span<const TeamId> start) const
{
    std::set<TeamId> seen;
    std::deque<TeamId> queue;
    for (TeamId id : start) {
        if (teams.contains(id) && seen.insert(id).second) {
            queue.push_back(id);
        }
    }
    while (!queue.empty()) {
        TeamId id = queue.front();
        queue.pop_front();
        for (ProgramId pid : team(id).programs) {
            const auto& action = program(pid).action();
            if (const auto* ref = std::get_if<TeamRef>(&action);
                ref != nullptr && teams.contains(ref->team) && seen.insert(ref->team).second) {
                queue.push_back(ref->team);
            }
        }
    }
    return {seen.begin(), seen.end()};
}

void Population::remove_orphans()
{
    std::set<ProgramId> used_programs;
    for (const auto& [id, team] : teams) {
        used_programs.insert(team.programs.begin(), team.programs.end());
    }
    std::erase_if(programs, [&](const auto& kv) { return !used_programs.contains(kv.first); });

    std::set<BankId> used_banks;
    for (const auto& [id, prog] : programs) {
        used_banks.insert(prog->memory_ref());
    }
    std::erase_if(banks, [&](const auto& kv) { return !used_banks.contains(kv.first); });
}

std::uint64_t Population::checksum() const
{
    std::uint64_t h = 0x51ED270B27D3A1F5ULL;
    auto feed = [&h](std::uint64_t v) { h = mix64(h ^ v); };
    for (const auto& [id, team] : teams) {
        feed(id);
        feed(team.indegree);
        for (auto pid : team.programs) {
            feed(pid);
        }
    }
    for (const auto& [id, prog] : programs) {
        feed(id);
        feed(prog->memory_ref());
        const auto& a = prog->action();
        feed(is_leaf(a) ? static_cast<std::uint64_t>(std::get<DiscreteAction>(a).value)
                        : (1ULL << 63) | std::get<TeamRef>(a).team);
        for (const auto& ins : prog->instructions()) {
            feed(static_cast<std::uint64_t>(ins.op) | (static_cast<std::uint64_t>(ins.target_bank) << 8)
                 | (static_cast<std::uint64_t>(ins.op1_bank) << 16) | (static_cast<std::uint64_t>(ins.op2_bank) << 24));
            feed(static_cast<std::uint32_t>(ins.target_idx));
            feed(static_cast<std::uint32_t>(ins.op1_idx));
            feed(static_cast<std::uint32_t>(ins.op2_idx));
        }
    }
    for (const auto& [id, bank] : banks) {
        feed(id);
    }
    feed(ids.next_program);
    feed(ids.next_team);
    feed(ids.next_bank);
    return h;
}

// --- Traversal ---------------------------------------------------------------

void TraversalTrace::clear()
{
    visited_team_ids.clear();
    executed_program_count = 0;
    executed_instruction_count = 0;
    memory_reads.clear();
    memory_writes.clear();
    winning_program = 0;
}

Agent::Agent(const Population& pop, TeamId root, AgentOptions options) : options_(options)
{
    std::map<TeamId, int> node_index;
    std::map<BankId, int> bank_index;
    std::deque<TeamId> queue {root};
    node_index[root] = 0;
    std::vector<TeamId> order {root};

    while (!queue.empty()) {
        TeamId id = queue.front();
        queue.pop_front();
        for (ProgramId pid : pop.team(id).programs) {
            const auto& action = pop.program(pid).action();
            if (const auto* ref = std::get_if<TeamRef>(&action); ref != nullptr && !node_index.contains(ref->team)) {
                if (!pop.has_team(ref->team)) {
                    throw DataError("program " + std::to_string(pid) + " points at missing team "
                                    + std::to_string(ref->team));
                }
                node_index[ref->team] = static_cast<int>(order.size());
                order.push_back(ref->team);
                queue.push_back(ref->team);
            }
        }
    }

    nodes_.reserve(order.size());
    for (TeamId id : order) {
        Node node;
        node.id = id;
        for (ProgramId pid : pop.team(id).programs) {
            const auto& prog_ptr = pop.programs.at(pid);
            Edge e;
            e.program = prog_ptr;
            auto [it, inserted] = bank_index.try_emplace(prog_ptr->memory_ref(), static_cast<int>(bank_ids_.size()));
            if (inserted) {
                bank_ids_.push_back(prog_ptr->memory_ref());
            }
            e.bank = it->second;
            if (const auto* ref = std::get_if<TeamRef>(&prog_ptr->action())) {
                e.next = node_index.at(ref->team);
            } else {
                e.action = std::get<DiscreteAction>(prog_ptr->action()).value;
            }
            node.edges.push_back(std::move(e));
        }
        nodes_.push_back(std::move(node));
    }
    banks_.assign(bank_ids_.size(), {});
    last_write_.assign(bank_ids_.size(), {});
    visited_.assign(nodes_.size(), 0);
}

std::size_t Agent::program_count() const
{
    std::set<const Program*> seen;
    for (const auto& node : nodes_) {
        for (const auto& e : node.edges) {
            seen.insert(e.program.get());
        }
    }
    return seen.size();
}

void Agent::reset()
{
    for (auto& b : banks_) {
        b.fill(0.0);
    }
    for (auto& w : last_write_) {
        w.fill(0);
    }
}

namespace {

struct TraceObserver {
    TraversalTrace& trace;
    BankId bank;
    std::array<std::size_t, kMemorySize>& last_write;
    std::size_t step;
    bool stateless;

    void on_read(int slot)
    {
        std::size_t when = stateless ? step : last_write[static_cast<std::size_t>(slot)];
        trace.memory_reads.push_back(MemoryRead {bank, slot, when});
    }
    void on_write(int slot)
    {
        last_write[static_cast<std::size_t>(slot)] = step;
        trace.memory_writes.push_back(MemoryWrite {bank, slot});
    }
};

} // namespace

ActionPair Agent::act(const Observation& obs, std::size_t step, TraversalTrace* trace)
{
    if (trace != nullptr) {
        trace->clear();
    }
    std::fill(visited_.begin(), visited_.end(), 0);
    int current = 0;

    while (true) {
        visited_[static_cast<std::size_t>(current)] = 1;
        Node& node = nodes_[static_cast<std::size_t>(current)];
        const std::size_t n = node.edges.size();
        weights_.resize(n);
        outputs_.resize(n);

        if (trace != nullptr) {
            trace->visited_team_ids.push_back(node.id);
        }

        for (std::size_t i = 0; i < n; ++i) {
            const Edge& e = node.edges[i];
            std::array<double, kMemorySize> scratch {};
            std::span<double, kMemorySize> mem = options_.stateless_memory
                ? std::span<double, kMemorySize>(scratch)
                : std::span<double, kMemorySize>(banks_[static_cast<std::size_t>(e.bank)]);
            ExecResult res;
            if (trace != nullptr) {
                TraceObserver observer {*trace, bank_ids_[static_cast<std::size_t>(e.bank)],
                                        last_write_[static_cast<std::size_t>(e.bank)], step,
                                        options_.stateless_memory};
                res = execute_observed(*e.program, obs, mem, observer);
                trace->executed_program_count += 1;
                trace->executed_instruction_count += e.program->effective_code().size();
            } else {
                res = execute(*e.program, obs, mem);
            }
            weights_[i] = std::isnan(res.weight) ? -std::numeric_limits<double>::infinity() : res.weight;
            outputs_[i] = res.a_c;
        }

        order_.resize(n);
        std::iota(order_.begin(), order_.end(), 0);
        std::stable_sort(order_.begin(), order_.end(), [this](int a, int b) {
            return weights_[static_cast<std::size_t>(a)] > weights_[static_cast<std::size_t>(b)];
        });

        int next = -1;
        for (int idx : order_) {
            const Edge& e = node.edges[static_cast<std::size_t>(idx)];
            if (e.next < 0) {
                ActionPair out;
                out.a_d = e.action;
                out.a_c = options_.stateless_memory ? outputs_[static_cast<std::size_t>(idx)]
                                                    : banks_[static_cast<std::size_t>(e.bank)][0];
                if (trace != nullptr) {
                    trace->winning_program = e.program->id();
                }
                return out;
            }
            if (visited_[static_cast<std::size_t>(e.next)] == 0) {
                next = e.next;
                break;
            }
        }
        if (next < 0) {
            throw Error("team " + std::to_string(node.id) + " has no leaf program");
        }
        current = next;
    }
}

// --- Variation ---------------------------------------------------------------

VariationPools VariationPools::from(const Population& pop)
{
    VariationPools pools;
    for (const auto& [id, p] : pop.programs) {
        pools.programs.push_back(id);
    }
    for (const auto& [id, b] : pop.banks) {
        pools.banks.push_back(id);
    }
    for (const auto& [id, t] : pop.teams) {
        pools.teams.push_back(id);
    }
    return pools;
}

Team clone_team(const Team& team, IdAllocator& ids)
{
    Team clone;
    clone.id = ids.team();
    clone.programs = team.programs;
    clone.indegree = 0;
    return clone;
}

CrossoverMasks random_crossover_masks(const Team& p1, const Team& p2, Rng& rng)
{
    CrossoverMasks masks;
    masks.keep1.resize(p1.programs.size());
    masks.keep2.resize(p2.programs.size());
    for (std::size_t i = 0; i < masks.keep1.size(); ++i) {
        masks.keep1[i] = rng.bernoulli(0.5);
    }
    for (std::size_t i = 0; i < masks.keep2.size(); ++i) {
        masks.keep2[i] = rng.bernoulli(0.5);
    }
    return masks;
}

namespace {

std::vector<ProgramId> interleave(const Team& p1, const Team& p2, const std::vector<bool>& keep1,
                                  const std::vector<bool>& keep2)
{
    std::set<ProgramId> in_p1(p1.programs.begin(), p1.programs.end());
    std::set<ProgramId> emitted;
    std::vector<ProgramId> child;
    const std::size_t len = std::max(p1.programs.size(), p2.programs.size());
    for (std::size_t i = 0; i < len; ++i) {
        if (i < p1.programs.size() && keep1[i] && emitted.insert(p1.programs[i]).second) {
            child.push_back(p1.programs[i]);
        }
        if (i < p2.programs.size() && keep2[i] && !in_p1.contains(p2.programs[i])
            && emitted.insert(p2.programs[i]).second) {
            child.push_back(p2.programs[i]);
        }
    }
    return child;
}

} // namespace

Team team_crossover(const Team& p1, const Team& p2, const Population& pop, Rng& rng, IdAllocator& ids)
{
    auto masks = random_crossover_masks(p1, p2, rng);
    return team_crossover(p1, p2, masks, pop, rng, ids);
}

Team team_crossover(const Team& p1, const Team& p2, const CrossoverMasks& masks, const Population& pop, Rng& rng,
                    IdAllocator& ids)
{
    std::vector<bool> keep1 = masks.keep1;
    std::vector<bool> keep2 = masks.keep2;
    keep1.resize(p1.programs.size(), false);
    keep2.resize(p2.programs.size(), false);

    // A program shared by both parents is attributed to parent1's position.
    for (std::size_t j = 0; j < p2.programs.size(); ++j) {
        if (!keep2[j]) {
            continue;
        }
        auto it = std::find(p1.programs.begin(), p1.programs.end(), p2.programs[j]);
        if (it != p1.programs.end()) {
            keep1[static_cast<std::size_t>(it - p1.programs.begin())] = true;
        }
    }

    Team child;
    child.id = ids.team();
    child.programs = interleave(p1, p2, keep1, keep2);

    auto unkept_p1 = [&](auto pred) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < p1.programs.size(); ++i) {
            if (!keep1[i] && pred(p1.programs[i])) {
                idx.push_back(i);
            }
        }
        return idx;
    };

    while (child.programs.size() < 2) {
        auto candidates = unkept_p1([&](ProgramId pid) {
            return std::find(child.programs.begin(), child.programs.end(), pid) == child.programs.end();
        });
        if (candidates.empty()) {
            break;
        }
        keep1[candidates[rng.index(candidates.size())]] = true;
        child.programs = interleave(p1, p2, keep1, keep2);
    }
    auto has_leaf = [&] {
        return std::any_of(child.programs.begin(), child.programs.end(),
                           [&](ProgramId pid) { return is_leaf(pop.program(pid).action()); });
    };
    if (!has_leaf()) {
        auto leaves = unkept_p1([&](ProgramId pid) { return is_leaf(pop.program(pid).action()); });
        if (!leaves.empty()) {
            keep1[leaves[rng.index(leaves.size())]] = true;
            child.programs = interleave(p1, p2, keep1, keep2);
        }
    }
    return child;
}

std::optional<TeamId> pick_pointer_target(TeamId self, Population& pop, Rng& rng, VariationPools& pools)
{
    std::vector<TeamId> candidates;
    candidates.reserve(pools.teams.size());
    for (TeamId id : pools.teams) {
        if (id != self && pop.has_team(id)) {
            candidates.push_back(id);
        }
    }
    if (candidates.empty()) {
        return std::nullopt;
    }
    TeamId target = candidates[rng.index(candidates.size())];
    if (pop.is_root(target)) {
        Team clone = clone_team(pop.team(target), pop.ids);
        target = clone.id;
        pop.add_team(std::move(clone));
        pools.teams.push_back(target);
    }
    return target;
}

void mutate_team(Team& team, Population& pop, Rng& rng, const TeamParams& params, const ProgramParams& prog_params,
                 VariationPools& pools)
{
    auto leaf_at = [&](std::size_t i) { return is_leaf(pop.program(team.programs[i]).action()); };
    auto leaves = [&] {
        std::size_t n = 0;
        for (std::size_t i = 0; i < team.programs.size(); ++i) {
            n += leaf_at(i) ? 1 : 0;
        }
        return n;
    };

    auto delete_one = [&] {
        std::size_t leaf_total = leaves();
        std::vector<std::size_t> deletable;
        for (std::size_t i = 0; i < team.programs.size(); ++i) {
            if (!(leaf_at(i) && leaf_total == 1)) {
                deletable.push_back(i);
            }
        }
        if (!deletable.empty()) {
            auto victim = deletable[rng.index(deletable.size())];
            team.programs.erase(team.programs.begin() + static_cast<std::ptrdiff_t>(victim));
        }
    };
    auto add_one = [&] {
        ProgramId pid = pools.programs[rng.index(pools.programs.size())];
        auto pos = rng.index(team.programs.size() + 1);
        if (pop.programs.contains(pid)
            && std::find(team.programs.begin(), team.programs.end(), pid) == team.programs.end()) {
            team.programs.insert(team.programs.begin() + static_cast<std::ptrdiff_t>(pos), pid);
        }
    };
    auto modify = [&](std::size_t i) {
        Program variant = mutate_program(pop.program(team.programs[i]), rng, prog_params, pop.ids);
        team.programs[i] = pop.add_program(std::move(variant));
    };
    auto repoint_action = [&](std::size_t i) {
        bool sole_leaf = leaf_at(i) && leaves() == 1;
        bool atomic = rng.bernoulli(params.p_atomic) || sole_leaf;
        Action action = DiscreteAction {static_cast<int>(rng.below(3))};
        if (!atomic) {
            if (auto target = pick_pointer_target(team.id, pop, rng, pools)) {
                action = TeamRef {*target};
            }
        }
        const Program& old = pop.program(team.programs[i]);
        team.programs[i] = pop.add_program(old.with_action(pop.ids.program(), action));
    };
    auto repoint_memory = [&](std::size_t i) {
        BankId bank = pools.banks[rng.index(pools.banks.size())];
        const Program& old = pop.program(team.programs[i]);
        team.programs[i] = pop.add_program(old.with_memory(pop.ids.program(), bank));
    };

    if (params.per_program) {
        while (team.programs.size() > 2 && rng.bernoulli(params.p_md)) {
            delete_one();
        }
        while (!pools.programs.empty() && rng.bernoulli(params.p_ma)) {
            add_one();
        }
        for (std::size_t i = 0; i < team.programs.size(); ++i) {
            if (rng.bernoulli(params.p_mm)) {
                modify(i);
            }
            if (rng.bernoulli(params.p_mn)) {
                repoint_action(i);
            }
            if (!pools.banks.empty() && rng.bernoulli(params.p_ms)) {
                repoint_memory(i);
            }
        }
        return;
    }

    if (rng.bernoulli(params.p_md) && team.programs.size() > 2) {
        delete_one();
    }
    if (rng.bernoulli(params.p_ma) && !pools.programs.empty()) {
        add_one();
    }
    if (rng.bernoulli(params.p_mm)) {
        modify(rng.index(team.programs.size()));
    }
    if (rng.bernoulli(params.p_mn)) {
        repoint_action(rng.index(team.programs.size()));
    }
    if (rng.bernoulli(params.p_ms) && !pools.banks.empty()) {
        repoint_memory(rng.index(team.programs.size()));
    }
}

} // namespace tpg
