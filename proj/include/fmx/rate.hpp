#pragma once

// Ergodic achievable rate with perfect CSI, its Jensen upper bound and the
// conventional-MIMO benchmark.

#include <cstdint>
#include <span>
#include <vector>

#include "fmx/numeric.hpp"
#include "fmx/stochchan.hpp"

namespace fmx::rate {

struct RateEstimate {
    double mean = 0.0;            // bits per channel use
    double standard_error = 0.0;
    std::size_t trials = 0;
};

struct MonteCarloOptions {
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    stochchan::ChannelDrawOptions draw{};
    unsigned threads = 0;  // 0 = hardware concurrency
};

// E[log2(1 + p h_all^H h_all)] over channels from draw_channel_set.
RateEstimate rate_mc(const stochchan::FrequencyPlan& plan, int M, double power, const MonteCarloOptions& opt);

// log2(1 + p M (1 + S V / 2)).
double rate_upper_bound(int M, int S, int V, double power);

// E[log2(1 + p ||h_d||^2)], h_d ~ CN(0, I_M). Uses the same direct-channel
// stream as rate_mc, so both see identical h_d for a given seed.
RateEstimate mimo_baseline(int M, double power, const MonteCarloOptions& opt);

struct RatePoint {
    double power_db = 0.0;
    double power = 0.0;
    RateEstimate fmx;
    RateEstimate mimo;
    double bound = 0.0;
};

struct RateCurve {
    std::vector<RatePoint> points;
    RunningMoments energy;       // h_all^H h_all over trials
    RunningMoments mimo_energy;  // ||h_d||^2 over trials
};

// One set of channel draws reused at every power level.
RateCurve rate_curve(const stochchan::FrequencyPlan& plan, int M, std::span<const double> power_db,
                     const MonteCarloOptions& opt);

// E[h_all^H h_all] = M + M S V / 2.
inline double expected_energy(int M, int S, int V) { return M + 0.5 * M * S * V; }

}  // namespace fmx::rate
