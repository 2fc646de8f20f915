#include "chromonet/rng.hpp"

namespace chromonet {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t cell_id,
                          std::uint64_t sample_index) noexcept {
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ cell_id);
    return mix64(h ^ sample_index);
}

}  // namespace chromonet
