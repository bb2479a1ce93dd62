#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "fmx/errors.hpp"
#include "fmx/sigcore.hpp"
#include "oracles.hpp"

using namespace fmx;
using namespace fmx::sigcore;

namespace {

TwoPathScene one_reflector_scene(int f_r = 64) {
    TwoPathScene s;
    s.direct = {0.8, 0.13};
    s.reflectors.push_back({{0.5, 0.21}, {0.7, 0.05}, f_r});
    return s;
}

double max_relative_error(const ToneReadout& sim, const ToneReadout& ref) {
    double worst = 0.0;
    for (const auto& [f, v] : ref.entries()) worst = std::max(worst, std::abs(sim.at(f) - v) / std::abs(v));
    return worst;
}

}  // namespace

TEST_CASE("units validation") {
    CHECK_NOTHROW(NormalizedUnits{}.validate());
    CHECK_THROWS_AS((NormalizedUnits{0, 8192}.validate()), ConfigError);
    CHECK_THROWS_AS((NormalizedUnits{1024, 4096}.validate()), ConfigError);
    const int bad[] = {1024};
    CHECK_THROWS_AS(NormalizedUnits{}.validate(bad), ConfigError);
}

TEST_CASE("single path link rejects negative gain and out-of-range delay") {
    CHECK_THROWS_AS((SinglePathLink{-0.1, 0.0}.validate()), ConfigError);
    CHECK_THROWS_AS((SinglePathLink{1.0, 1.0}.validate()), ConfigError);
    CHECK_NOTHROW((SinglePathLink{0.0, 0.5}.validate()));
}

TEST_CASE("upconvert samples a unit-modulus carrier") {
    const cplx x = std::polar(1.0, 0.3);
    const auto w = upconvert(x, 16, 1, 256);
    REQUIRE(w.samples.size() == 256);
    for (std::size_t k = 0; k < w.samples.size(); k += 17)
        CHECK(w.samples[k] == doctest::Approx(std::cos(2 * std::numbers::pi * 16 * double(k) / 256 + 0.3)).epsilon(1e-12));
    CHECK_THROWS_AS(upconvert({2.0, 0.0}, 16, 1, 256), PreconditionError);
}

TEST_CASE("render agrees with upconvert for the carrier tone") {
    const cplx x = std::polar(1.0, -1.1);
    const auto a = upconvert(x, 32, 2, 512);
    const auto b = render(carrier_tone(x, 32), 512, 2);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t k = 0; k < a.samples.size(); ++k) CHECK(a.samples[k] == doctest::Approx(b.samples[k]).epsilon(1e-12));
}

TEST_CASE("propagation delays are phase rotations") {
    const ToneSum t = propagate_single_path(carrier_tone({1.0, 0.0}, 100), {0.5, 0.01});
    REQUIRE(t.size() == 1);
    CHECK(t[0].amplitude == doctest::Approx(0.5));
    const cplx ph = std::polar(1.0, t[0].phase);
    CHECK(std::abs(ph - std::polar(1.0, -2 * std::numbers::pi * 100 * 0.01)) < 1e-12);
}

TEST_CASE("frm reflection splits a tone into two half-amplitude images") {
    const ToneSum in = carrier_tone(std::polar(1.0, 0.4), 256);
    const ToneSum out = frm_reflect(in, 16, 256);
    REQUIRE(out.size() == 2);
    std::vector<double> freqs{out[0].frequency, out[1].frequency};
    std::sort(freqs.begin(), freqs.end());
    CHECK(freqs[0] == 240.0);
    CHECK(freqs[1] == 272.0);
    CHECK(out[0].amplitude == doctest::Approx(0.5));
    CHECK(frm_reflect(in, 0, 256).size() == 1);
    CHECK_THROWS_AS(frm_reflect(in, 256, 256), ConfigError);

    // Waveform and tone forms agree sample by sample.
    const auto wave = frm_reflect(render(in, 4096, 1), 16, 256);
    const auto tone = render(out, 4096, 1);
    for (std::size_t k = 0; k < wave.samples.size(); k += 31)
        CHECK(wave.samples[k] == doctest::Approx(tone.samples[k]).epsilon(1e-10));
}

TEST_CASE("low-pass filter: unit DC gain, flat passband, deep stopband") {
    const auto h = design_lowpass(kDefaultFilterTaps, 128.0, 8192);
    CHECK(std::abs(lowpass_response(h, 0.0, 8192) - 1.0) < 1e-12);
    for (double f : {8.0, 32.0, 64.0})
        CHECK(std::abs(lowpass_response(h, f, 8192) - 1.0) < 1e-5);
    for (double f : {2048.0, 2048.0 + 64.0, 3000.0})
        CHECK(std::abs(lowpass_response(h, f, 8192)) < 1e-5);
    // Linear phase after group-delay removal means a real response.
    CHECK(std::abs(lowpass_response(h, 50.0, 8192).imag()) < 1e-12);
    CHECK_THROWS_AS(design_lowpass(100, 128.0, 8192), ConfigError);
    CHECK_THROWS_AS(design_lowpass(101, 5000.0, 8192), ConfigError);
}

TEST_CASE("tone extraction matches a direct DFT and rejects leaky windows") {
    BasebandWaveform b;
    b.sample_rate = 512;
    b.samples.resize(512);
    for (std::size_t k = 0; k < b.samples.size(); ++k) {
        const double t = double(k) / 512;
        b.samples[k] = std::polar(0.7, 2 * std::numbers::pi * 5 * t + 0.2) + std::polar(0.3, -2 * std::numbers::pi * 9 * t);
    }
    const double offsets[] = {5.0, -9.0, 0.0};
    const auto r = extract_tones(b, offsets);
    CHECK(std::abs(r.at(5.0) - std::polar(0.7, 0.2)) < 1e-12);
    CHECK(std::abs(r.at(-9.0) - std::polar(0.3, 0.0)) < 1e-12);
    CHECK(std::abs(r.at(0.0)) < 1e-12);
    CHECK(std::abs(r.at(5.0) - oracle::dft_bin(b.samples, 5.0)) < 1e-12);
    CHECK_THROWS_AS(r.at(7.0), std::out_of_range);

    const double leaky[] = {2.5};
    CHECK_THROWS_AS(extract_tones(b, leaky), PreconditionError);
    const double close[] = {3.0, 3.0};
    CHECK_THROWS_AS(extract_tones(b, close), PreconditionError);
}

TEST_CASE("waveform link reproduces the closed-form decoupled readouts") {
    const auto scene = one_reflector_scene();
    for (double phase : {0.0, 1.0, 2.5}) {
        const cplx x = std::polar(1.0, phase);
        CHECK(max_relative_error(simulate_link(scene, x), closed_form_readout(scene, x)) < 1e-4);
    }
}

TEST_CASE("link is linear in the symbol") {
    const auto scene = one_reflector_scene(32);
    const cplx x1 = std::polar(1.0, 0.3), x2 = std::polar(1.0, 2.0);
    const auto a = simulate_link(scene, x1), b = simulate_link(scene, x2);
    for (const auto& [f, v] : a.entries()) {
        const cplx ratio = v / x1;
        CHECK(std::abs(b.at(f) / x2 - ratio) < 1e-9 * std::abs(ratio) + 1e-12);
    }
}

TEST_CASE("zero mixing frequency degenerates to classical interference") {
    TwoPathScene s = one_reflector_scene();
    s.reflectors.clear();
    const auto r = simulate_link(s, {1.0, 0.0});
    CHECK(r.size() == 1);
    CHECK(std::abs(r.at(0.0) - std::polar(0.8, -2 * std::numbers::pi * 1024 * 0.13)) < 1e-6);
}

TEST_CASE("scene validation") {
    auto s = one_reflector_scene();
    s.reflectors.push_back(s.reflectors.front());
    CHECK_THROWS_AS(s.validate(), ConfigError);  // duplicate frequency
    s = one_reflector_scene(600);
    CHECK_THROWS_AS(s.validate(), ConfigError);  // default cutoff reaches the carrier
    s = one_reflector_scene();
    s.cutoff = 32.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("random scenes are reproducible and valid") {
    Engine a = make_engine(5, {1}), b = make_engine(5, {1});
    const auto s1 = random_two_path_scene(a, 2), s2 = random_two_path_scene(b, 2);
    CHECK(s1.reflectors.size() == 2);
    CHECK(s1.mixing_frequencies() == s2.mixing_frequencies());
    CHECK(s1.direct.delay == s2.direct.delay);
    CHECK_NOTHROW(s1.validate());
    Engine c = make_engine(1, {});
    CHECK_THROWS_AS(random_two_path_scene(c, 100), ConfigError);
}
