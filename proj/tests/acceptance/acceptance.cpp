// Acceptance suite: one PASS/FAIL line per headline property, with the
// measured numbers. Exit status is the number of failed properties.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fmx/estim.hpp"
#include "fmx/experiment.hpp"
#include "fmx/numeric.hpp"
#include "fmx/rate.hpp"
#include "fmx/sigcore.hpp"
#include "fmx/stochchan.hpp"
#include "oracles.hpp"

using namespace fmx;
using cplx = std::complex<double>;
namespace ex = fmx::experiment;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void note(const std::string& detail) {
    std::printf("      %s\n", detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ex::ExperimentConfig config_for(ex::ExperimentId id) {
    auto c = ex::ExperimentConfig::defaults(id);
    c.seed = 20240611;
    return c;
}

// Rows of a fig3 table keyed by (model, branch, estimator).
using Fig3Rows = std::map<std::tuple<std::string, std::string, std::string>, std::vector<std::vector<std::string>>>;

Fig3Rows group_fig3(const ex::Table& t) {
    Fig3Rows out;
    for (const auto& r : t.rows) out[{r[0], r[1], r[2]}].push_back(r);
    return out;
}

void decoupling() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        Engine rng = make_engine(77, {std::uint64_t(n)});
        const auto scene = sigcore::random_two_path_scene(rng, 1 + n % 2);
        const cplx x = std::polar(1.0, std::uniform_real_distribution<double>(0.0, 2 * std::numbers::pi)(rng));
        const auto sim = sigcore::simulate_link(scene, x);
        const auto ref = sigcore::closed_form_readout(scene, x);
        for (const auto& [f, v] : ref.entries()) worst = std::max(worst, std::abs(sim.at(f) - v) / std::abs(v));
    }
    const double elapsed = seconds_since(t0);
    report("decoupling", worst <= 1e-3 && elapsed < 30.0,
           fmt("100 scenes, max relative error %.3e (<= 1e-3), %.2f s (< 30 s)", worst, elapsed));
}

void phasor_moments_check() {
    double worst = 0.0;
    for (int ia = 0; ia < 20; ++ia) {
        const double a = 1e2 * std::pow(10.0, 5.0 * ia / 19.0);  // 1e2 .. 1e7 Hz
        for (int iD = 0; iD < 20; ++iD) {
            const double D = 1e-9 * std::pow(10.0, 4.0 * iD / 19.0);  // 1 ns .. 10 us
            const auto m = stochchan::phasor_moments(a, D);
            const double w = 2 * std::numbers::pi * a;
            const double q[] = {
                oracle::uniform_mean([&](double t) { return std::cos(w * t); }, D, a),
                oracle::uniform_mean([&](double t) { return std::sin(w * t); }, D, a),
                oracle::uniform_mean([&](double t) { return std::pow(std::cos(w * t), 2); }, D, 2 * a),
                oracle::uniform_mean([&](double t) { return std::pow(std::sin(w * t), 2); }, D, 2 * a),
            };
            const double got[] = {m.m_cos, m.m_sin, m.m_cos2, m.m_sin2};
            for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(got[k] - q[k]));
        }
    }
    report("moments_vs_quadrature", worst <= 1e-9, fmt("20x20 (a, D) grid, max |error| %.3e (<= 1e-9)", worst));
}

void correlation() {
    const double tau = 1e-6, df = 1.0 / (2.0 * tau);
    double worst_zero = 0.0;
    for (int i = 1; i <= 64; ++i) worst_zero = std::max(worst_zero, stochchan::rho(i * df, tau));
    report("rho_zeros", worst_zero <= 1e-12, fmt("max rho(i delta_f), i = 1..64: %.3e (<= 1e-12)", worst_zero));

    const int n = 10000;
    double worst = 0.0;
    std::string detail;
    for (double r : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0}) {
        std::vector<cplx> plus(n), minus(n);
        parallel_for(n, [&](std::size_t t) {
            Engine rng = make_engine(31, {tag(StreamTag::path_set), t});
            const auto paths = stochchan::draw_path_set(256, tau, rng);
            std::tie(plus[t], minus[t]) = stochchan::evaluate_pair(paths, 3e9, r * df);
        });
        const double mc = std::abs(oracle::correlation(plus, minus));
        const double th = stochchan::rho(r * df, tau);
        worst = std::max(worst, std::abs(mc - th));
        detail += fmt(" %.2f:%.3f/%.3f", r, mc, th);
    }
    report("rho_monte_carlo", worst <= 0.03, fmt("max |MC - rho| %.4f (<= 0.03); f_r/df:MC/theory%s", worst, detail.c_str()));
}

void variances() {
    const auto plan = stochchan::FrequencyPlan::with_normalized_spacing(1.0, 2, 2);
    const int n = 10000, M = 8;
    std::vector<double> gp(n), gm(n), z(n), g4(n);
    parallel_for(n, [&](std::size_t t) {
        const auto c = stochchan::draw_channel_set(plan, M, TrialStream{41, t});
        CompensatedSum sp, sm, sz, s4;
        for (int k = 0; k < c.frm_count; ++k)
            for (int m = 0; m < M; ++m) {
                sp.add(std::norm(c.g_plus[std::size_t(k)][std::size_t(m)]));
                sm.add(std::norm(c.g_minus[std::size_t(k)][std::size_t(m)]));
                sz.add(std::norm(c.z_plus[std::size_t(k)][std::size_t(m)]) + std::norm(c.z_minus[std::size_t(k)][std::size_t(m)]));
                s4.add(std::pow(std::norm(c.g_plus[std::size_t(k)][std::size_t(m)]), 2));
            }
        const double count = double(c.frm_count * M);
        gp[t] = sp.value() / count;
        gm[t] = sm.value() / count;
        z[t] = sz.value() / (2.0 * count);
        g4[t] = s4.value() / count;
    });
    RunningMoments mp, mm, mz, m4;
    for (int t = 0; t < n; ++t) {
        mp.add(gp[std::size_t(t)]);
        mm.add(gm[std::size_t(t)]);
        mz.add(z[std::size_t(t)]);
        m4.add(g4[std::size_t(t)]);
    }
    const bool ok = std::abs(mp.mean() - 1.0) <= 0.03 && std::abs(mm.mean() - 1.0) <= 0.03 && std::abs(mz.mean() - 0.25) <= 0.01;
    report("channel_variances", ok,
           fmt("1e4 realizations: E|g+|^2 %.4f, E|g-|^2 %.4f (1 +- 0.03), E|z|^2 %.4f (0.25 +- 0.01)", mp.mean(),
               mm.mean(), mz.mean()));
    note(fmt("E|g+|^4 / (E|g+|^2)^2 = %.3f (complex Gaussian: 2)", m4.mean() / (mp.mean() * mp.mean())));
}

void conditioning() {
    const auto out = ex::run_fig4a(config_for(ex::ExperimentId::fig4a));
    const double r = 2.0 / std::numbers::pi;
    const double expected_half = 10.0 * std::log10((1 + r) / (1 - r));
    double worst_int = 0.0, worst_half = 0.0;
    int n_int = 0, n_half = 0;
    for (const auto& row : out.table.rows) {
        if (row[2] != "pair_only") continue;
        const double i = std::stod(row[0]), cond = std::stod(row[3]);
        if (i == std::round(i)) {
            worst_int = std::max(worst_int, std::abs(cond));
            ++n_int;
        }
        if (i == 0.5) {
            worst_half = std::max(worst_half, std::abs(cond - expected_half));
            ++n_half;
        }
    }
    report("pair_only_conditioning", n_int == 6 && n_half == 2 && worst_int <= 0.01 && worst_half <= 1e-6,
           fmt("integer i (V=S in {1,2}): max %.2e dB (<= 0.01); i = 0.5: %.6f dB, |error| %.2e (<= 1e-6)", worst_int,
               expected_half, worst_half));
}

ex::Table estimation() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = ex::run_fig3(config_for(ex::ExperimentId::fig3));
    const auto rows = group_fig3(out.table);
    double ls_var = 0.0, mmse_dev = 0.0;
    bool ordering = true;
    for (const auto& [key, list] : rows) {
        const auto& [model, branch, estimator] = key;
        for (const auto& r : list) {
            const double p = from_db10(std::stod(r[3]));
            if (estimator == "ls") ls_var = std::max(ls_var, std::abs(std::stod(r[7]) * p - 1.0));
            if (estimator == "mmse") {
                const double theory = branch == "direct" ? 1.0 / (1.0 + p) : 1.0 / (1.0 + p / 4.0);
                mmse_dev = std::max(mmse_dev, std::abs(std::stod(r[4]) / theory - 1.0));
            }
        }
    }
    for (const std::string est : {"ls", "mmse"}) {
        const auto& d = rows.at({"infinite_path", "direct", est});
        const auto& c = rows.at({"infinite_path", "cascaded", est});
        for (std::size_t j = 0; j < d.size(); ++j) ordering = ordering && std::stod(d[j][4]) < std::stod(c[j][4]);
    }
    report("estimation_nmse", ls_var <= 0.05 && mmse_dev <= 0.05 && ordering,
           fmt("1e4 trials, p = -10..30 dB: LS var*p max dev %.2f%% (<= 5%%), MMSE NMSE max dev %.2f%% (<= 5%%), "
               "direct < cascaded at every p: %s (%.1f s)",
               100 * ls_var, 100 * mmse_dev, ordering ? "yes" : "no", seconds_since(t0)));
    return out.table;
}

ex::Table achievable_rate() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto config = config_for(ex::ExperimentId::fig4b);
    const auto plan = stochchan::FrequencyPlan::with_normalized_spacing(1.0, 2, 2);
    const auto power_db = ex::linear_grid(-10, 30, 2);
    const auto curve = rate::rate_curve(plan, 8, power_db, {10000, config.seed, {256}, 0});
    const double elapsed = seconds_since(t0);

    bool below = true, above_mimo = true;
    double max_gap = 0.0, min_gap = 1e9;
    for (const auto& pt : curve.points) {
        below = below && pt.fmx.mean <= std::log2(1.0 + 24.0 * pt.power) + 3.0 * pt.fmx.standard_error;
        above_mimo = above_mimo && pt.fmx.mean > pt.mimo.mean;
        max_gap = std::max(max_gap, pt.bound - pt.fmx.mean);
        min_gap = std::min(min_gap, pt.bound - pt.fmx.mean);
    }
    const double energy = curve.energy.mean();
    const bool energy_ok = std::abs(energy / 24.0 - 1.0) <= 0.01;
    report("achievable_rate", below && above_mimo && max_gap <= 0.5 && energy_ok && elapsed < 120.0,
           fmt("M=8 V=S=2: below bound (3 SE) %s, bound gap %.4f..%.4f bits (<= 0.5), above MIMO %s, "
               "E[h^H h] %.3f (24 +- 1%%), %.1f s for 1e4 x 21 (< 120 s)",
               below ? "yes" : "no", min_gap, max_gap, above_mimo ? "yes" : "no", energy, elapsed));

    return ex::run_fig4b(config).table;
}

ex::Table fluctuation() {
    auto config = config_for(ex::ExperimentId::fig2);
    const auto out = ex::run_fig2(config);
    const auto& s = out.summary;
    const double classical = s["std_db"]["classical"];
    bool std_ok = true, smooth = true;
    std::string detail;
    for (const char* b : {"direct", "plus", "minus"}) {
        const double sd = s["std_db"][b];
        const int fades = s["fades_deeper_than_1db"][b];
        std_ok = std_ok && sd < classical;
        smooth = smooth && fades == 0;
        detail += fmt(", %s %.2f dB/%d", b, sd, fades);
    }
    const int classical_fades = s["fades_deeper_than_1db"]["classical"];
    report("gain_fluctuation", std_ok && smooth && classical_fades >= 3,
           fmt("std dB/fades > 1 dB: classical %.2f dB/%d (>= 3)%s; each branch std < classical: %s, no fades: %s",
               classical, classical_fades, detail.c_str(), std_ok ? "yes" : "no", smooth ? "yes" : "no"));

    // Same sweep with the pathloss exponent applied to power instead of amplitude.
    config.geometry.pathloss_interpretation = "power";
    const auto alt = ex::run_fig2(config).summary;
    note(fmt("power-law pathloss, same sweep: std dB classical %.2f, direct %.2f, plus %.2f, minus %.2f",
             double(alt["std_db"]["classical"]), double(alt["std_db"]["direct"]), double(alt["std_db"]["plus"]),
             double(alt["std_db"]["minus"])));
    return out.table;
}

void determinism(const std::map<ex::ExperimentId, std::string>& first) {
    bool same = true;
    std::string detail;
    for (const auto& [id, csv] : first) {
        const std::string again = ex::run_experiment(config_for(id)).table.to_csv();
        const bool eq = again == csv;
        same = same && eq;
        detail += fmt(" %s:%s", ex::to_string(id).c_str(), eq ? "identical" : "DIFFERENT");
    }
    report("determinism", same, "same seed, second run:" + detail);
}

}  // namespace

int main() {
    std::printf("fmx acceptance suite\n");
    decoupling();
    phasor_moments_check();
    correlation();
    variances();
    conditioning();

    std::map<ex::ExperimentId, std::string> csv;
    csv[ex::ExperimentId::fig3] = estimation().to_csv();
    csv[ex::ExperimentId::fig4b] = achievable_rate().to_csv();
    csv[ex::ExperimentId::fig2] = fluctuation().to_csv();
    csv[ex::ExperimentId::fig4a] = ex::run_fig4a(config_for(ex::ExperimentId::fig4a)).table.to_csv();
    auto validate = config_for(ex::ExperimentId::validate);
    csv[ex::ExperimentId::validate] = ex::run_validate(validate).table.to_csv();
    determinism(csv);

    std::printf("%d failed\n", failures);
    return failures;
}
