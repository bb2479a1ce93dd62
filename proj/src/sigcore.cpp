#include "fmx/sigcore.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "fmx/errors.hpp"
#include "fmx/numeric.hpp"

namespace fmx::sigcore {

namespace {

// Stopband attenuation of roughly 100 dB.
constexpr double kKaiserBeta = 10.06;
constexpr double kCutoffMargin = 64.0;

bool is_integer(double v, double tol = 1e-9) { return std::abs(v - std::round(v)) <= tol; }

double sinc(double x) {
    if (x == 0.0) return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

void NormalizedUnits::validate(std::span<const int> mixing_frequencies) const {
    if (carrier <= 0) throw ConfigError("carrier", "must be a positive integer");
    if (sample_rate <= 0) throw ConfigError("sample_rate", "must be a positive integer");
    if (sample_rate < 8 * carrier)
        throw ConfigError("sample_rate", "must be at least 8 * carrier (" + std::to_string(8 * carrier) + ")");
    for (int f : mixing_frequencies) {
        if (f < 1 || f >= carrier)
            throw ConfigError("mixing_frequency",
                              std::to_string(f) + " outside [1, carrier=" + std::to_string(carrier) + ")");
    }
}

BasebandWaveform BasebandWaveform::slice(std::size_t first, std::size_t count) const {
    if (first + count > samples.size()) throw PreconditionError("slice exceeds waveform length");
    BasebandWaveform out;
    out.sample_rate = sample_rate;
    out.start_time = time(first);
    out.samples.assign(samples.begin() + std::ptrdiff_t(first), samples.begin() + std::ptrdiff_t(first + count));
    return out;
}

void SinglePathLink::validate() const {
    if (!(gain >= 0.0) || !std::isfinite(gain)) throw ConfigError("gain", "must be finite and >= 0");
    if (!(delay >= 0.0 && delay < 1.0)) throw ConfigError("delay", "must lie in [0, 1) symbol");
}

void ToneReadout::set(double offset, cplx value) {
    for (auto& [f, v] : entries_) {
        if (f == offset) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(offset, value);
}

cplx ToneReadout::at(double offset) const {
    for (const auto& [f, v] : entries_)
        if (f == offset) return v;
    throw std::out_of_range("no tone at offset " + std::to_string(offset));
}

bool ToneReadout::contains(double offset) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == offset; });
}

ToneSum carrier_tone(cplx x, int carrier) { return {Tone{std::abs(x), double(carrier), std::arg(x)}}; }

PassbandWaveform upconvert(cplx x, int carrier, int n_symbols, int sample_rate) {
    NormalizedUnits{carrier, sample_rate}.validate();
    if (std::abs(std::abs(x) - 1.0) > 1e-9) throw PreconditionError("upconvert expects a unit-modulus symbol");
    if (n_symbols < 1) throw ConfigError("n_symbols", "must be >= 1");
    return render(carrier_tone(x, carrier), sample_rate, n_symbols);
}

PassbandWaveform render(const ToneSum& tones, int sample_rate, int n_symbols, double start_time) {
    PassbandWaveform w;
    w.sample_rate = sample_rate;
    w.start_time = start_time;
    w.samples.assign(std::size_t(sample_rate) * std::size_t(n_symbols), 0.0);
    for (std::size_t k = 0; k < w.samples.size(); ++k) {
        const double t = w.time(k);
        double acc = 0.0;
        for (const Tone& tone : tones) acc += tone.amplitude * std::cos(kTwoPi * frac(tone.frequency * t) + tone.phase);
        w.samples[k] = acc;
    }
    return w;
}

ToneSum propagate_single_path(const ToneSum& source, const SinglePathLink& link) {
    link.validate();
    ToneSum out;
    out.reserve(source.size());
    for (const Tone& t : source)
        out.push_back({link.gain * t.amplitude, t.frequency, t.phase - kTwoPi * t.frequency * link.delay});
    return out;
}

ToneSum frm_reflect(const ToneSum& incident, int mixing_frequency, int carrier) {
    if (mixing_frequency == 0) return incident;
    if (mixing_frequency < 0 || mixing_frequency >= carrier)
        throw ConfigError("mixing_frequency", "must lie in [0, carrier)");
    ToneSum out;
    out.reserve(2 * incident.size());
    for (const Tone& t : incident) {
        out.push_back({0.5 * t.amplitude, t.frequency + mixing_frequency, t.phase});
        out.push_back({0.5 * t.amplitude, t.frequency - mixing_frequency, t.phase});
    }
    return out;
}

PassbandWaveform frm_reflect(const PassbandWaveform& incident, int mixing_frequency, int carrier) {
    if (mixing_frequency == 0) return incident;
    if (mixing_frequency < 0 || mixing_frequency >= carrier)
        throw ConfigError("mixing_frequency", "must lie in [0, carrier)");
    PassbandWaveform out = incident;
    for (std::size_t k = 0; k < out.samples.size(); ++k)
        out.samples[k] *= std::cos(kTwoPi * frac(double(mixing_frequency) * out.time(k)));
    return out;
}

std::vector<double> design_lowpass(int taps, double cutoff, int sample_rate) {
    if (taps < 3 || taps % 2 == 0) throw ConfigError("filter_taps", "must be odd and >= 3");
    if (!(cutoff > 0.0) || cutoff >= 0.5 * sample_rate) throw ConfigError("cutoff", "must lie in (0, rate/2)");
    const int half = (taps - 1) / 2;
    const double fc = cutoff / sample_rate;
    const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
    std::vector<double> h(static_cast<std::size_t>(taps));
    double sum = 0.0;
    for (int n = 0; n < taps; ++n) {
        const double m = n - half;
        const double r = m / half;
        const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / norm;
        h[std::size_t(n)] = 2.0 * fc * sinc(2.0 * fc * m) * window;
        sum += h[std::size_t(n)];
    }
    for (double& v : h) v /= sum;
    return h;
}

cplx lowpass_response(std::span<const double> taps, double frequency, int sample_rate) {
    const int half = int(taps.size() - 1) / 2;
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < taps.size(); ++j)
        acc += taps[j] * std::polar(1.0, -kTwoPi * frequency * double(int(j) - half) / sample_rate);
    return acc;
}

double default_cutoff(std::span<const int> mixing_frequencies) {
    int fmax = 0;
    for (int f : mixing_frequencies) fmax = std::max(fmax, f);
    return std::max(2.0 * fmax, fmax + kCutoffMargin);
}

BasebandWaveform iq_demod_lowpass(const PassbandWaveform& y, int carrier, double cutoff, int filter_taps) {
    if (cutoff >= carrier) throw ConfigError("cutoff", "must be below the carrier to reject the 2 f_c image");
    const std::vector<double> h = design_lowpass(filter_taps, cutoff, y.sample_rate);
    const std::size_t n = y.samples.size();
    const std::size_t taps = h.size();
    if (n < taps) throw PreconditionError("waveform shorter than the filter");

    std::vector<cplx> mixed(n);
    for (std::size_t k = 0; k < n; ++k)
        mixed[k] = 2.0 * y.samples[k] * std::polar(1.0, -kTwoPi * frac(double(carrier) * y.time(k)));

    // out[k - half] = sum_j h[j] mixed[k + half - j] for fully overlapped k.
    const std::size_t half = (taps - 1) / 2;
    BasebandWaveform out;
    out.sample_rate = y.sample_rate;
    out.start_time = y.time(half);
    out.samples.resize(n - 2 * half);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const cplx* src = mixed.data() + i;  // mixed[i .. i + taps)
        double re = 0.0, im = 0.0;
        for (std::size_t j = 0; j < taps; ++j) {
            re += h[taps - 1 - j] * src[j].real();
            im += h[taps - 1 - j] * src[j].imag();
        }
        out.samples[i] = {re, im};
    }
    return out;
}

ToneReadout extract_tones(const BasebandWaveform& b, std::span<const double> offsets) {
    const double n = double(b.samples.size());
    if (b.samples.empty()) throw PreconditionError("empty waveform");
    for (double f : offsets) {
        if (!is_integer(f * n / b.sample_rate))
            throw PreconditionError("window does not hold an integer number of periods of offset " +
                                    std::to_string(f));
    }
    for (std::size_t i = 0; i < offsets.size(); ++i)
        for (std::size_t j = i + 1; j < offsets.size(); ++j)
            if (std::abs(offsets[i] - offsets[j]) < 1.0 - 1e-12)
                throw PreconditionError("offsets closer than one cycle per symbol");

    ToneReadout readout;
    for (double f : offsets) {
        cplx acc{0.0, 0.0};
        for (std::size_t k = 0; k < b.samples.size(); ++k)
            acc += b.samples[k] * std::polar(1.0, -kTwoPi * frac(f * b.time(k)));
        readout.set(f, acc / n);
    }
    return readout;
}

std::vector<int> TwoPathScene::mixing_frequencies() const {
    std::vector<int> out;
    out.reserve(reflectors.size());
    for (const auto& r : reflectors) out.push_back(r.mixing_frequency);
    return out;
}

void TwoPathScene::validate() const {
    const auto freqs = mixing_frequencies();
    units.validate(freqs);
    direct.validate();
    for (const auto& r : reflectors) {
        r.user_to_frm.validate();
        r.frm_to_bs.validate();
    }
    for (std::size_t i = 0; i < freqs.size(); ++i)
        for (std::size_t j = i + 1; j < freqs.size(); ++j)
            if (freqs[i] == freqs[j]) throw ConfigError("mixing_frequency", "FRM frequencies must be distinct");
    const double c = cutoff > 0.0 ? cutoff : default_cutoff(freqs);
    const int fmax = freqs.empty() ? 0 : *std::max_element(freqs.begin(), freqs.end());
    if (c <= fmax) throw ConfigError("cutoff", "must exceed the largest mixing frequency");
    if (c >= units.carrier) throw ConfigError("cutoff", "must be below the carrier");
}

std::vector<double> readout_offsets(const TwoPathScene& scene) {
    std::vector<double> out{0.0};
    for (const auto& r : scene.reflectors) {
        out.push_back(double(r.mixing_frequency));
        out.push_back(-double(r.mixing_frequency));
    }
    return out;
}

ToneReadout simulate_link(const TwoPathScene& scene, cplx x) {
    scene.validate();
    const int fc = scene.units.carrier;
    const int rate = scene.units.sample_rate;
    const ToneSum tx = carrier_tone(x, fc);

    ToneSum received = propagate_single_path(tx, scene.direct);
    for (const auto& r : scene.reflectors) {
        const ToneSum at_frm = propagate_single_path(tx, r.user_to_frm);
        const ToneSum reflected = frm_reflect(at_frm, r.mixing_frequency, fc);
        const ToneSum at_bs = propagate_single_path(reflected, r.frm_to_bs);
        received.insert(received.end(), at_bs.begin(), at_bs.end());
    }

    // Discard one filter length of transient, then keep one symbol; the
    // filter needs half its length of look-ahead past the window.
    const std::size_t taps = std::size_t(scene.filter_taps);
    const std::size_t half = (taps - 1) / 2;
    const std::size_t needed = taps + std::size_t(rate) + half;
    const int n_symbols = int((needed + std::size_t(rate) - 1) / std::size_t(rate));
    const PassbandWaveform y = render(received, rate, n_symbols);

    const double cutoff = scene.cutoff > 0.0 ? scene.cutoff : default_cutoff(scene.mixing_frequencies());
    const BasebandWaveform b = iq_demod_lowpass(y, fc, cutoff, scene.filter_taps);
    const BasebandWaveform window = b.slice(taps - half, std::size_t(rate));
    return extract_tones(window, readout_offsets(scene));
}

ToneReadout closed_form_readout(const TwoPathScene& scene, cplx x) {
    const double fc = scene.units.carrier;
    ToneReadout out;
    const cplx hd = std::polar(scene.direct.gain, -kTwoPi * fc * scene.direct.delay);
    out.set(0.0, hd * x);
    for (const auto& r : scene.reflectors) {
        const double fr = r.mixing_frequency;
        const cplx h = std::polar(r.user_to_frm.gain, -kTwoPi * fc * r.user_to_frm.delay);
        const cplx gp = std::polar(r.frm_to_bs.gain, -kTwoPi * (fc + fr) * r.frm_to_bs.delay);
        const cplx gm = std::polar(r.frm_to_bs.gain, -kTwoPi * (fc - fr) * r.frm_to_bs.delay);
        out.set(fr, 0.5 * h * gp * x);
        out.set(-fr, 0.5 * h * gm * x);
    }
    return out;
}

TwoPathScene random_two_path_scene(Engine& rng, int reflectors, NormalizedUnits units, int max_mixing) {
    if (reflectors < 0 || reflectors > max_mixing / 8) throw ConfigError("reflectors", "too many for the frequency range");
    std::uniform_real_distribution<double> gain(0.1, 1.0);
    std::uniform_real_distribution<double> delay(0.0, 1.0);
    std::vector<int> pool;
    for (int f = 8; f <= max_mixing; f += 8) pool.push_back(f);
    std::shuffle(pool.begin(), pool.end(), rng);

    TwoPathScene scene;
    scene.units = units;
    scene.direct = {gain(rng), delay(rng)};
    for (int r = 0; r < reflectors; ++r) {
        Reflector refl;
        refl.user_to_frm = {gain(rng), delay(rng)};
        refl.frm_to_bs = {gain(rng), delay(rng)};
        refl.mixing_frequency = pool[std::size_t(r)];
        scene.reflectors.push_back(refl);
    }
    return scene;
}

}  // namespace fmx::sigcore
