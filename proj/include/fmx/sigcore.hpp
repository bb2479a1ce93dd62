#pragma once

// Waveform-level passband engine for a frequency-mixing reflector.
//
// Time is normalized to one symbol. Carrier, mixing frequencies and sample
// rate are integers in cycles (or samples) per symbol, so every tone
// completes a whole number of periods over one symbol and a single-bin
// projection over that window has no leakage.
//
// Signals travelling through the scene are kept as finite tone sums; a
// delay is then an exact phase rotation and fractional-sample resampling is
// never needed. The sampled waveform is rendered only where the receiver
// needs it (IQ demodulation and filtering).

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fmx/random.hpp"

namespace fmx::sigcore {

using cplx = std::complex<double>;

struct NormalizedUnits {
    int carrier = 1024;      // cycles per symbol
    int sample_rate = 8192;  // samples per symbol

    // Throws ConfigError unless carrier and sample_rate are positive,
    // sample_rate >= 8 * carrier, and every mixing frequency lies in [1, carrier).
    void validate(std::span<const int> mixing_frequencies = {}) const;
};

struct PassbandWaveform {
    std::vector<double> samples;
    int sample_rate = 0;
    double start_time = 0.0;

    double time(std::size_t k) const { return start_time + double(k) / sample_rate; }
};

struct BasebandWaveform {
    std::vector<cplx> samples;
    int sample_rate = 0;
    double start_time = 0.0;

    double time(std::size_t k) const { return start_time + double(k) / sample_rate; }

    // Sub-window of `count` samples starting at sample `first`.
    BasebandWaveform slice(std::size_t first, std::size_t count) const;
};

struct SinglePathLink {
    double gain = 1.0;   // amplitude pathloss, >= 0
    double delay = 0.0;  // symbols, in [0, 1)

    void validate() const;
};

// a * cos(2 pi f t + phase)
struct Tone {
    double amplitude = 0.0;
    double frequency = 0.0;
    double phase = 0.0;
};

using ToneSum = std::vector<Tone>;

// Complex amplitude per baseband frequency offset, in request order.
class ToneReadout {
public:
    void set(double offset, cplx value);
    cplx at(double offset) const;  // throws std::out_of_range
    bool contains(double offset) const;
    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<std::pair<double, cplx>>& entries() const noexcept { return entries_; }

private:
    std::vector<std::pair<double, cplx>> entries_;
};

// Tone form of the transmitted RF signal Re{x e^{j 2 pi f_c t}}.
ToneSum carrier_tone(cplx x, int carrier);

// Samples |x| cos(2 pi f_c t_k + arg x), t_k = k / rate, over n_symbols.
// Requires |x| = 1.
PassbandWaveform upconvert(cplx x, int carrier, int n_symbols, int sample_rate);

PassbandWaveform render(const ToneSum& tones, int sample_rate, int n_symbols, double start_time = 0.0);

// Each tone (a, f, phi) -> (gain a, f, phi - 2 pi f delay).
ToneSum propagate_single_path(const ToneSum& source, const SinglePathLink& link);

// Multiplies by cos(2 pi f_r t). Each tone splits into half-amplitude images
// at f + f_r and f - f_r. f_r = 0 returns the input unchanged.
ToneSum frm_reflect(const ToneSum& incident, int mixing_frequency, int carrier);
PassbandWaveform frm_reflect(const PassbandWaveform& incident, int mixing_frequency, int carrier);

// Linear-phase windowed-sinc low-pass (Kaiser window), unit DC gain.
// `cutoff` in cycles per symbol; taps must be odd.
std::vector<double> design_lowpass(int taps, double cutoff, int sample_rate);

// Frequency response of a linear-phase filter with its group delay removed.
cplx lowpass_response(std::span<const double> taps, double frequency, int sample_rate);

// Cutoff used when none is given: max(2 f_max, f_max + 64).
double default_cutoff(std::span<const int> mixing_frequencies);

inline constexpr int kDefaultFilterTaps = 1025;

// 2 y(t) e^{-j 2 pi f_c t}, low-pass filtered with group delay removed.
// Only fully-overlapped output samples are returned; start_time is shifted
// by half the filter length.
BasebandWaveform iq_demod_lowpass(const PassbandWaveform& y, int carrier, double cutoff,
                                  int filter_taps = kDefaultFilterTaps);

// (1/N) sum_k b[k] e^{-j 2 pi f t_k} for every requested offset. The window
// must hold an integer number of periods of each offset and offsets must be
// at least one cycle per symbol apart.
ToneReadout extract_tones(const BasebandWaveform& b, std::span<const double> offsets);

struct Reflector {
    SinglePathLink user_to_frm;
    SinglePathLink frm_to_bs;
    int mixing_frequency = 32;
};

struct TwoPathScene {
    SinglePathLink direct;
    std::vector<Reflector> reflectors;
    NormalizedUnits units;
    int filter_taps = kDefaultFilterTaps;
    double cutoff = 0.0;  // 0 selects default_cutoff

    std::vector<int> mixing_frequencies() const;
    void validate() const;
};

// {0, +f_1, -f_1, +f_2, -f_2, ...} in stacking order.
std::vector<double> readout_offsets(const TwoPathScene& scene);

// upconvert -> propagate -> reflect -> propagate -> add direct path ->
// demodulate -> extract tones.
ToneReadout simulate_link(const TwoPathScene& scene, cplx x);

// {h_d x, z_+ x, z_- x, ...} with h_d = |h_d| e^{-j 2 pi f_c tau_d},
// z_{+-} = 1/2 h g_{+-}, g_{+-} = |g| e^{-j 2 pi (f_c +- f_r) tau_g}.
ToneReadout closed_form_readout(const TwoPathScene& scene, cplx x);

// Gains in [0.1, 1], delays in [0, 1) symbol, distinct mixing frequencies
// drawn from the multiples of 8 in [8, max_mixing].
TwoPathScene random_two_path_scene(Engine& rng, int reflectors, NormalizedUnits units = {}, int max_mixing = 256);

}  // namespace fmx::sigcore
