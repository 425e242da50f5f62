#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

namespace tpg {

/// Mixes a 64-bit value (splitmix64 finalizer).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a tuple of
/// coordinates (generation, root id, task, episode, ...). Order matters.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> coords) noexcept
{
    std::uint64_t h = mix64(master);
    for (auto c : coords) {
        h = mix64(h ^ mix64(c + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

/// Random stream used everywhere in the engine. The engine is the standard
/// 64-bit Mersenne twister; the distribution mappings are written out here
/// because the std:: distributions are not specified bit-for-bit.
class Rng {
    __extension__ using U128 = unsigned __int128;

public:
    using Engine = std::mt19937_64;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n)
    {
        // Lemire's nearly-divisionless method with rejection.
        auto x = engine_();
        auto m = static_cast<U128>(x) * n;
        auto l = static_cast<std::uint64_t>(m);
        if (l < n) {
            auto t = (0 - n) % n;
            while (l < t) {
                x = engine_();
                m = static_cast<U128>(x) * n;
                l = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    bool bernoulli(double p) { return uniform() < p; }

    std::string state() const;
    void set_state(const std::string& s);

    friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
    Engine engine_;
};

} // namespace tpg
