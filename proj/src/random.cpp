#include "fmx/random.hpp"

#include <cmath>

namespace fmx {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632BE59BD9B4E019ull));
    return s;
}

Engine make_engine(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    const std::uint64_t s = derive_seed(master, path);
    std::seed_seq seq{std::uint32_t(s), std::uint32_t(s >> 32)};
    return Engine(seq);
}

std::complex<double> complex_normal(Engine& rng, double variance) {
    std::normal_distribution<double> n(0.0, std::sqrt(0.5 * variance));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

}  // namespace fmx
