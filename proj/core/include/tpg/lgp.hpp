#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "tpg/env.hpp"
#include "tpg/random.hpp"

namespace tpg {

using ProgramId = std::uint64_t;
using TeamId = std::uint64_t;
using BankId = std::uint64_t;

// 4-bit op-code space, fully used.
enum class Opcode : std::uint8_t {
    Add, Sub, Mul, Div, Pow,
    Cos, Ln, Exp, Sqrt, Sin, Tanh, Square, Abs, Cube,
    IfLt, IfGt,
};
inline constexpr int kOpcodeCount = 16;

enum class Bank : std::uint8_t { R = 0, M = 1, S = 2 };

inline constexpr int kWritableRegisters = 8;
inline constexpr int kConstantCount = 18;
inline constexpr int kReadableRegisters = kWritableRegisters + kConstantCount;
inline constexpr int kMemorySize = 8;
inline constexpr int kInputSize = 2;

/// {-0.9, ..., -0.1, 0.1, ..., 0.9}, stored at r[8..25].
constexpr std::array<double, kConstantCount> kConstants {
    -0.9, -0.8, -0.7, -0.6, -0.5, -0.4, -0.3, -0.2, -0.1,
    0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
};

std::string_view opcode_name(Opcode op);

constexpr bool is_binary(Opcode op) { return op <= Opcode::Pow; }
constexpr bool is_unary(Opcode op) { return op >= Opcode::Cos && op <= Opcode::Cube; }
constexpr bool is_conditional(Opcode op) { return op == Opcode::IfLt || op == Opcode::IfGt; }

/// Three-address register instruction.
///   binary:      target <- op1 (op) op2
///   unary:       target <- f(op2)
///   conditional: if (target cmp op2) target <- -target
/// Indices are arbitrary and reduced modulo the addressed bank at execution:
/// target and op1 address the 8 writable r registers (or m), op2 on R also
/// reaches the constants.
struct Instruction {
    Opcode op = Opcode::Add;
    Bank target_bank = Bank::R;
    std::int32_t target_idx = 0;
    Bank op1_bank = Bank::R;
    std::int32_t op1_idx = 0;
    Bank op2_bank = Bank::R;
    std::int32_t op2_idx = 0;

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Type-level invariants: opcode in range, target/op1 never S.
bool is_valid(const Instruction& ins);

/// Non-negative modulo used for index resolution.
constexpr int wrap_index(std::int32_t idx, int size)
{
    int m = idx % size;
    return m < 0 ? m + size : m;
}

int resolve_target(const Instruction& ins);
int resolve_op1(const Instruction& ins);
int resolve_op2(const Instruction& ins);

// Safe math: total and bounded. NaN becomes 0, magnitudes clamp to 1e15.
inline constexpr double kValueBound = 1e15;
inline constexpr double kDivEpsilon = 1e-9;
inline constexpr double kExpBound = 88.0;

inline double canonicalize(double v)
{
    if (std::isnan(v)) {
        return 0.0;
    }
    return std::clamp(v, -kValueBound, kValueBound);
}

inline double safe_binary(Opcode op, double x, double y)
{
    double r = 0.0;
    switch (op) {
    case Opcode::Add: r = x + y; break;
    case Opcode::Sub: r = x - y; break;
    case Opcode::Mul: r = x * y; break;
    case Opcode::Div: r = std::abs(y) < kDivEpsilon ? x : x / y; break;
    case Opcode::Pow: r = std::pow(std::abs(x), y); break;
    default: break;
    }
    return canonicalize(r);
}

inline double safe_unary(Opcode op, double y)
{
    double r = 0.0;
    switch (op) {
    case Opcode::Cos: r = std::cos(y); break;
    case Opcode::Ln: r = y > 0.0 ? std::log(y) : std::log(std::abs(y) + kDivEpsilon); break;
    case Opcode::Exp: r = std::exp(std::clamp(y, -kExpBound, kExpBound)); break;
    case Opcode::Sqrt: r = std::sqrt(std::abs(y)); break;
    case Opcode::Sin: r = std::sin(y); break;
    case Opcode::Tanh: r = std::tanh(y); break;
    case Opcode::Square: r = y * y; break;
    case Opcode::Abs: r = std::abs(y); break;
    case Opcode::Cube: r = y * y * y; break;
    default: break;
    }
    return canonicalize(r);
}

struct DiscreteAction {
    int value = 0;
    friend bool operator==(const DiscreteAction&, const DiscreteAction&) = default;
};
struct TeamRef {
    TeamId team = 0;
    friend bool operator==(const TeamRef&, const TeamRef&) = default;
};
using Action = std::variant<DiscreteAction, TeamRef>;

inline bool is_leaf(const Action& a) { return std::holds_alternative<DiscreteAction>(a); }

struct MemoryBank {
    BankId id = 0;
    std::array<double, kMemorySize> m {};

    void reset() { m.fill(0.0); }
};

struct ExecResult {
    double weight = 0.0;
    double a_c = 0.0;
};

/// Instruction lowered to offsets into one flat register file:
/// [r 0..7 | constants 8..25 | m 26..33 | s 34..35].
struct LoweredInstruction {
    Opcode op;
    std::uint8_t dst;
    std::uint8_t a;
    std::uint8_t b;
};

inline constexpr int kMemOffset = kReadableRegisters;
inline constexpr int kInputOffset = kMemOffset + kMemorySize;
inline constexpr int kFileSize = kInputOffset + kInputSize;

LoweredInstruction lower(const Instruction& ins);

/// Immutable after construction. Variation always produces a new Program
/// with a fresh id; teams share programs by id.
class Program {
public:
    Program(ProgramId id, std::vector<Instruction> instructions, Action action, BankId memory_ref);

    ProgramId id() const { return id_; }
    const std::vector<Instruction>& instructions() const { return instructions_; }
    const Action& action() const { return action_; }
    BankId memory_ref() const { return memory_ref_; }

    const std::vector<bool>& effective_mask() const { return effective_; }
    const std::vector<LoweredInstruction>& effective_code() const { return code_; }

    Program with_id(ProgramId id) const { return Program(id, instructions_, action_, memory_ref_); }
    Program with_action(ProgramId id, Action action) const { return Program(id, instructions_, action, memory_ref_); }
    Program with_memory(ProgramId id, BankId bank) const { return Program(id, instructions_, action_, bank); }

private:
    ProgramId id_;
    std::vector<Instruction> instructions_;
    Action action_;
    BankId memory_ref_;
    std::vector<bool> effective_;
    std::vector<LoweredInstruction> code_;
};

using ProgramPtr = std::shared_ptr<const Program>;

/// Backward liveness from {r[0], every m slot}. Writes to m are always
/// effective; a conditional keeps its target live and makes op2 live.
std::vector<bool> mark_introns(std::span<const Instruction> instructions);

/// Observer hooks for stateful-memory accesses. Slot is 0..7 within the bank.
struct NullMemoryObserver {
    void on_read(int) {}
    void on_write(int) {}
};

namespace detail {

template <typename Observer>
ExecResult run_lowered(std::span<const LoweredInstruction> code, const Observation& obs,
                       std::span<double, kMemorySize> mem, Observer& observer);

} // namespace detail

/// Executes only the effective instructions. The bank is updated in place.
ExecResult execute(const Program& prog, const Observation& obs, std::span<double, kMemorySize> mem);

/// Same, reporting every stateful read/write to `observer`.
template <typename Observer>
ExecResult execute_observed(const Program& prog, const Observation& obs, std::span<double, kMemorySize> mem,
                            Observer& observer)
{
    return detail::run_lowered(std::span<const LoweredInstruction>(prog.effective_code()), obs, mem, observer);
}

/// Executes every instruction, introns included.
ExecResult execute_full(std::span<const Instruction> instructions, const Observation& obs,
                        std::span<double, kMemorySize> mem);

/// Executes only instructions whose mask bit is set.
ExecResult execute_masked(std::span<const Instruction> instructions, const std::vector<bool>& mask,
                          const Observation& obs, std::span<double, kMemorySize> mem);

struct ProgramParams {
    std::size_t prog_size_init = 10;
    double p_delete = 0.5;
    double p_add = 0.4;
    double p_mutate = 1.0;
    double p_swap = 0.2;
};

/// Hands out fresh ids for every population store.
struct IdAllocator {
    ProgramId next_program = 1;
    TeamId next_team = 1;
    BankId next_bank = 1;

    ProgramId program() { return next_program++; }
    TeamId team() { return next_team++; }
    BankId bank() { return next_bank++; }
};

Instruction random_instruction(Rng& rng);

/// New leaf program of prog_size_init random instructions and a freshly
/// allocated bank id (the caller registers the bank).
Program random_program(Rng& rng, const ProgramParams& params, IdAllocator& ids);

/// delete -> add -> mutate -> swap, each applied at most once.
Program mutate_program(const Program& prog, Rng& rng, const ProgramParams& params, IdAllocator& ids);

/// Rewrites one field (0..6) of an instruction with a fresh random value.
void mutate_field(Instruction& ins, int field, Rng& rng);
inline constexpr int kInstructionFields = 7;

// ---------------------------------------------------------------------------

namespace detail {

inline constexpr std::array<double, kFileSize> make_file_template()
{
    std::array<double, kFileSize> f {};
    for (int i = 0; i < kConstantCount; ++i) {
        f[static_cast<std::size_t>(kWritableRegisters + i)] = kConstants[static_cast<std::size_t>(i)];
    }
    return f;
}

inline constexpr std::array<double, kFileSize> kFileTemplate = make_file_template();

template <typename Observer>
ExecResult run_lowered(std::span<const LoweredInstruction> code, const Observation& obs,
                       std::span<double, kMemorySize> mem, Observer& observer)
{
    constexpr bool kObserved = !std::is_same_v<Observer, NullMemoryObserver>;
    std::array<double, kFileSize> f = kFileTemplate;
    for (int i = 0; i < kMemorySize; ++i) {
        f[static_cast<std::size_t>(kMemOffset + i)] = mem[static_cast<std::size_t>(i)];
    }
    f[kInputOffset] = obs.s0;
    f[kInputOffset + 1] = obs.s1;

    auto is_mem = [](std::uint8_t off) { return off >= kMemOffset && off < kInputOffset; };

    for (const auto& ins : code) {
        double& dst = f[ins.dst];
        if (is_conditional(ins.op)) {
            if constexpr (kObserved) {
                if (is_mem(ins.dst)) observer.on_read(ins.dst - kMemOffset);
                if (is_mem(ins.b)) observer.on_read(ins.b - kMemOffset);
            }
            bool hit = ins.op == Opcode::IfLt ? dst < f[ins.b] : dst > f[ins.b];
            if (hit) {
                dst = -dst;
                if constexpr (kObserved) {
                    if (is_mem(ins.dst)) observer.on_write(ins.dst - kMemOffset);
                }
            }
            continue;
        }
        if (is_binary(ins.op)) {
            if constexpr (kObserved) {
                if (is_mem(ins.a)) observer.on_read(ins.a - kMemOffset);
                if (is_mem(ins.b)) observer.on_read(ins.b - kMemOffset);
            }
            dst = safe_binary(ins.op, f[ins.a], f[ins.b]);
        } else {
            if constexpr (kObserved) {
                if (is_mem(ins.b)) observer.on_read(ins.b - kMemOffset);
            }
            dst = safe_unary(ins.op, f[ins.b]);
        }
        if constexpr (kObserved) {
            if (is_mem(ins.dst)) observer.on_write(ins.dst - kMemOffset);
        }
    }

    for (int i = 0; i < kMemorySize; ++i) {
        mem[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(kMemOffset + i)];
    }
    return ExecResult {f[0], f[kMemOffset]};
}

} // namespace detail

} // namespace tpg
