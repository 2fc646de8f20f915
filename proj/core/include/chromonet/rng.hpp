#pragma once

#include <cstdint>
#include <random>

namespace chromonet {

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Counter-based seed derivation: every (master, cell, index) triple maps to an
// independent 64-bit seed, so any sample can be regenerated in isolation.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t cell_id,
                          std::uint64_t sample_index) noexcept;

// Thin wrapper over mt19937_64 whose variates do not depend on the standard
// library's distribution implementations (bit-identical across toolchains).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    std::uint64_t next() noexcept { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace chromonet
