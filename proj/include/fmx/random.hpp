#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace fmx {

using Engine = std::mt19937_64;

// Stream tags used when splitting a master seed. Every random quantity in a
// Monte-Carlo trial is drawn from its own engine keyed by
// (master seed, trial, tag, FRM, antenna), so results do not depend on the
// order in which trials or channel components are generated.
enum class StreamTag : std::uint64_t {
    direct_channel = 1,
    user_to_frm = 2,
    frm_to_bs = 3,
    noise = 4,
    pilot = 5,
    scene = 6,
    path_set = 7,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Derives a child seed by folding each path element into the state.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

Engine make_engine(std::uint64_t master, std::initializer_list<std::uint64_t> path);

inline std::uint64_t tag(StreamTag t) noexcept { return static_cast<std::uint64_t>(t); }

// A seed plus trial index: the caller-facing handle for one reproducible trial.
struct TrialStream {
    std::uint64_t master_seed = 0;
    std::uint64_t trial = 0;

    Engine engine(StreamTag t, std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0) const {
        return make_engine(master_seed, {trial, tag(t), a, b, c});
    }
};

// Circularly-symmetric complex normal with E|z|^2 = variance.
std::complex<double> complex_normal(Engine& rng, double variance = 1.0);

}  // namespace fmx
