#include "fmx/rate.hpp"

#include <cmath>

#include "fmx/errors.hpp"

namespace fmx::rate {

namespace {

struct TrialEnergies {
    std::vector<double> total;
    std::vector<double> direct;
};

double direct_energy(const std::vector<stochchan::cplx>& h) {
    CompensatedSum acc;
    for (const auto& v : h) acc.add(std::norm(v));
    return acc.value();
}

TrialEnergies draw_energies(const stochchan::FrequencyPlan& plan, int M, const MonteCarloOptions& opt) {
    if (opt.trials < 1) throw ConfigError("trials", "must be >= 1");
    TrialEnergies e;
    e.total.resize(opt.trials);
    e.direct.resize(opt.trials);
    parallel_for(
        opt.trials,
        [&](std::size_t t) {
            const TrialStream stream{opt.seed, t};
            const auto c = stochchan::draw_channel_set(plan, M, stream, opt.draw);
            e.total[t] = c.energy();
            e.direct[t] = direct_energy(c.direct);
        },
        opt.threads);
    return e;
}

RateEstimate average_rate(std::span<const double> energies, double power) {
    if (power < 0.0) throw DomainError("power must be non-negative");
    RunningMoments m;
    for (double e : energies) m.add(std::log2(1.0 + power * e));
    return {m.mean(), m.standard_error(), m.count()};
}

}  // namespace

RateEstimate rate_mc(const stochchan::FrequencyPlan& plan, int M, double power, const MonteCarloOptions& opt) {
    const auto e = draw_energies(plan, M, opt);
    return average_rate(e.total, power);
}

double rate_upper_bound(int M, int S, int V, double power) {
    if (M < 0 || S < 0 || V < 0 || power < 0.0) throw DomainError("rate bound arguments must be non-negative");
    return std::log2(1.0 + power * M * (1.0 + 0.5 * S * V));
}

RateEstimate mimo_baseline(int M, double power, const MonteCarloOptions& opt) {
    if (M < 1) throw ConfigError("M", "must be >= 1");
    if (opt.trials < 1) throw ConfigError("trials", "must be >= 1");
    std::vector<double> e(opt.trials);
    parallel_for(
        opt.trials,
        [&](std::size_t t) { e[t] = direct_energy(stochchan::draw_direct_channel(M, TrialStream{opt.seed, t})); },
        opt.threads);
    return average_rate(e, power);
}

RateCurve rate_curve(const stochchan::FrequencyPlan& plan, int M, std::span<const double> power_db,
                     const MonteCarloOptions& opt) {
    const auto e = draw_energies(plan, M, opt);
    RateCurve curve;
    for (std::size_t t = 0; t < e.total.size(); ++t) {
        curve.energy.add(e.total[t]);
        curve.mimo_energy.add(e.direct[t]);
    }
    for (double db : power_db) {
        RatePoint pt;
        pt.power_db = db;
        pt.power = from_db10(db);
        pt.fmx = average_rate(e.total, pt.power);
        pt.mimo = average_rate(e.direct, pt.power);
        pt.bound = rate_upper_bound(M, plan.S, plan.V, pt.power);
        curve.points.push_back(pt);
    }
    return curve;
}

}  // namespace fmx::rate
