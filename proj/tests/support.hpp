#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

#include "tpg/lgp.hpp"
#include "tpg/random.hpp"
#include "tpg/team_graph.hpp"

namespace testing_support {

/// Instruction with indices far outside every bank, negative ones included.
inline tpg::Instruction wild_instruction(tpg::Rng& rng)
{
    tpg::Instruction ins = tpg::random_instruction(rng);
    auto wide = [&rng] { return static_cast<std::int32_t>(rng.below(2001)) - 1000; };
    ins.target_idx = wide();
    ins.op1_idx = wide();
    ins.op2_idx = wide();
    return ins;
}

inline std::vector<tpg::Instruction> random_code(tpg::Rng& rng, std::size_t max_len, bool wild = false)
{
    std::size_t n = 1 + rng.index(max_len);
    std::vector<tpg::Instruction> code;
    for (std::size_t i = 0; i < n; ++i) {
        code.push_back(wild ? wild_instruction(rng) : tpg::random_instruction(rng));
    }
    return code;
}

inline tpg::ProgramId add_program(tpg::Population& pop, std::vector<tpg::Instruction> code, tpg::Action action,
                                  tpg::BankId bank)
{
    auto id = pop.ids.program();
    return pop.add_program(tpg::Program(id, std::move(code), action, bank));
}

/// Program whose weight is the constant `c` (one of the built-in constants).
inline std::vector<tpg::Instruction> constant_bid(int constant_index)
{
    using tpg::Bank;
    using tpg::Opcode;
    return {tpg::Instruction {Opcode::Add, Bank::R, 0, Bank::R, 0, Bank::R, 8 + constant_index}};
}

struct GraphShape {
    std::size_t max_teams = 50;
    std::size_t max_programs = 6;
    std::size_t max_code = 12;
    double p_pointer = 0.5;
    double p_shared_bank = 0.3;
};

/// Random team graph with cycles (pointers may go to any team, self included).
/// Every team keeps at least two programs and one leaf.
inline std::vector<tpg::TeamId> random_graph(tpg::Population& pop, tpg::Rng& rng, const GraphShape& shape = {})
{
    std::size_t n = 1 + rng.index(shape.max_teams);
    std::vector<tpg::TeamId> ids;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back(pop.ids.team());
    }
    std::vector<tpg::BankId> banks;
    for (auto team_id : ids) {
        tpg::Team team;
        team.id = team_id;
        std::size_t k = 2 + rng.index(shape.max_programs - 1);
        std::size_t leaf_at = rng.index(k);
        for (std::size_t j = 0; j < k; ++j) {
            tpg::Action action = tpg::DiscreteAction {static_cast<int>(rng.below(3))};
            if (j != leaf_at && rng.bernoulli(shape.p_pointer)) {
                action = tpg::TeamRef {ids[rng.index(ids.size())]};
            }
            tpg::BankId bank = 0;
            if (!banks.empty() && rng.bernoulli(shape.p_shared_bank)) {
                bank = banks[rng.index(banks.size())];
            } else {
                bank = pop.ids.bank();
                banks.push_back(bank);
            }
            team.programs.push_back(add_program(pop, random_code(rng, shape.max_code), action, bank));
        }
        pop.add_team(std::move(team));
    }
    return ids;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
            ("tpg-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);

} // namespace testing_support
