#include "tpg/lgp.hpp"

#include <bitset>

namespace tpg {

std::string_view opcode_name(Opcode op)
{
    static constexpr std::array<std::string_view, kOpcodeCount> names {
        "add", "sub", "mul", "div", "pow", "cos", "ln", "exp",
        "sqrt", "sin", "tanh", "square", "abs", "cube", "iflt", "ifgt",
    };
    return names[static_cast<std::size_t>(op)];
}

bool is_valid(const Instruction& ins)
{
    return static_cast<int>(ins.op) < kOpcodeCount && ins.target_bank != Bank::S && ins.op1_bank != Bank::S
        && static_cast<int>(ins.op2_bank) <= static_cast<int>(Bank::S);
}

int resolve_target(const Instruction& ins)
{
    return ins.target_bank == Bank::M ? kMemOffset + wrap_index(ins.target_idx, kMemorySize)
                                      : wrap_index(ins.target_idx, kWritableRegisters);
}

int resolve_op1(const Instruction& ins)
{
    return ins.op1_bank == Bank::M ? kMemOffset + wrap_index(ins.op1_idx, kMemorySize)
                                   : wrap_index(ins.op1_idx, kWritableRegisters);
}

int resolve_op2(const Instruction& ins)
{
    switch (ins.op2_bank) {
    case Bank::R:
        return wrap_index(ins.op2_idx, kReadableRegisters);
    case Bank::M:
        return kMemOffset + wrap_index(ins.op2_idx, kMemorySize);
    case Bank::S:
        return kInputOffset + wrap_index(ins.op2_idx, kInputSize);
    }
    return 0;
}

LoweredInstruction lower(const Instruction& ins)
{
    return LoweredInstruction {
        ins.op,
        static_cast<std::uint8_t>(resolve_target(ins)),
        static_cast<std::uint8_t>(resolve_op1(ins)),
        static_cast<std::uint8_t>(resolve_op2(ins)),
    };
}

std::vector<bool> mark_introns(std::span<const Instruction> instructions)
{
    std::vector<bool> effective(instructions.size(), false);
    std::bitset<kReadableRegisters> live;
    live.set(0);

    auto use = [&live](int offset) {
        if (offset < kReadableRegisters) {
            live.set(static_cast<std::size_t>(offset));
        }
    };

    for (std::size_t k = instructions.size(); k-- > 0;) {
        const auto& ins = instructions[k];
        auto low = lower(ins);
        bool to_memory = low.dst >= kMemOffset;
        if (!to_memory && !live.test(low.dst)) {
            continue;
        }
        effective[k] = true;
        if (is_conditional(ins.op)) {
            // target is read and conditionally rewritten: stays live
            use(low.dst);
            use(low.b);
            continue;
        }
        if (!to_memory) {
            live.reset(low.dst);
        }
        if (is_binary(ins.op)) {
            use(low.a);
        }
        use(low.b);
    }
    return effective;
}

Program::Program(ProgramId id, std::vector<Instruction> instructions, Action action, BankId memory_ref)
    : id_(id), instructions_(std::move(instructions)), action_(action), memory_ref_(memory_ref)
{
    effective_ = mark_introns(instructions_);
    for (std::size_t i = 0; i < instructions_.size(); ++i) {
        if (effective_[i]) {
            code_.push_back(lower(instructions_[i]));
        }
    }
}

ExecResult execute(const Program& prog, const Observation& obs, std::span<double, kMemorySize> mem)
{
    NullMemoryObserver none;
    return detail::run_lowered(std::span<const LoweredInstruction>(prog.effective_code()), obs, mem, none);
}

ExecResult execute_full(std::span<const Instruction> instructions, const Observation& obs,
                        std::span<double, kMemorySize> mem)
{
    std::vector<LoweredInstruction> code;
    code.reserve(instructions.size());
    for (const auto& ins : instructions) {
        code.push_back(lower(ins));
    }
    NullMemoryObserver none;
    return detail::run_lowered(std::span<const LoweredInstruction>(code), obs, mem, none);
}

ExecResult execute_masked(std::span<const Instruction> instructions, const std::vector<bool>& mask,
                          const Observation& obs, std::span<double, kMemorySize> mem)
{
    std::vector<LoweredInstruction> code;
    for (std::size_t i = 0; i < instructions.size(); ++i) {
        if (mask[i]) {
            code.push_back(lower(instructions[i]));
        }
    }
    NullMemoryObserver none;
    return detail::run_lowered(std::span<const LoweredInstruction>(code), obs, mem, none);
}

namespace {

std::int32_t random_index_for(Bank bank, Rng& rng, bool op2)
{
    switch (bank) {
    case Bank::R:
        return static_cast<std::int32_t>(rng.below(op2 ? kReadableRegisters : kWritableRegisters));
    case Bank::M:
        return static_cast<std::int32_t>(rng.below(kMemorySize));
    case Bank::S:
        return static_cast<std::int32_t>(rng.below(kInputSize));
    }
    return 0;
}

Bank random_writable_bank(Rng& rng) { return rng.below(2) == 0 ? Bank::R : Bank::M; }

Bank random_source_bank(Rng& rng) { return static_cast<Bank>(rng.below(3)); }

} // namespace

void mutate_field(Instruction& ins, int field, Rng& rng)
{
    switch (field) {
    case 0:
        ins.op = static_cast<Opcode>(rng.below(kOpcodeCount));
        break;
    case 1:
        ins.target_bank = random_writable_bank(rng);
        break;
    case 2:
        ins.target_idx = random_index_for(ins.target_bank, rng, false);
        break;
    case 3:
        ins.op1_bank = random_writable_bank(rng);
        break;
    case 4:
        ins.op1_idx = random_index_for(ins.op1_bank, rng, false);
        break;
    case 5:
        ins.op2_bank = random_source_bank(rng);
        break;
    default:
        ins.op2_idx = random_index_for(ins.op2_bank, rng, true);
        break;
    }
}

Instruction random_instruction(Rng& rng)
{
    Instruction ins;
    ins.op = static_cast<Opcode>(rng.below(kOpcodeCount));
    ins.target_bank = random_writable_bank(rng);
    ins.target_idx = random_index_for(ins.target_bank, rng, false);
    ins.op1_bank = random_writable_bank(rng);
    ins.op1_idx = random_index_for(ins.op1_bank, rng, false);
    ins.op2_bank = random_source_bank(rng);
    ins.op2_idx = random_index_for(ins.op2_bank, rng, true);
    return ins;
}

Program random_program(Rng& rng, const ProgramParams& params, IdAllocator& ids)
{
    std::vector<Instruction> code;
    std::size_t n = std::max<std::size_t>(1, params.prog_size_init);
    code.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        code.push_back(random_instruction(rng));
    }
    auto action = DiscreteAction {static_cast<int>(rng.below(3))};
    ProgramId id = ids.program();
    BankId bank = ids.bank();
    return Program(id, std::move(code), action, bank);
}

Program mutate_program(const Program& prog, Rng& rng, const ProgramParams& params, IdAllocator& ids)
{
    std::vector<Instruction> code = prog.instructions();

    if (rng.bernoulli(params.p_delete) && code.size() > 1) {
        code.erase(code.begin() + static_cast<std::ptrdiff_t>(rng.index(code.size())));
    }
    if (rng.bernoulli(params.p_add)) {
        auto pos = rng.index(code.size() + 1);
        code.insert(code.begin() + static_cast<std::ptrdiff_t>(pos), random_instruction(rng));
    }
    if (rng.bernoulli(params.p_mutate)) {
        auto& ins = code[rng.index(code.size())];
        mutate_field(ins, static_cast<int>(rng.below(kInstructionFields)), rng);
    }
    if (rng.bernoulli(params.p_swap) && code.size() > 1) {
        auto i = rng.index(code.size());
        auto j = rng.index(code.size() - 1);
        if (j >= i) {
            ++j;
        }
        std::swap(code[i], code[j]);
    }
    return Program(ids.program(), std::move(code), prog.action(), prog.memory_ref());
}

} // namespace tpg
