// Deterministic synthetic speech generators shared by the test suites.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "vcmorph/lpc.hpp"
#include "vcmorph/wave.hpp"

namespace vctest {

inline std::vector<double> sawtooth(double f0, int sr, double dur_s) {
    const int n = static_cast<int>(dur_s * sr);
    const int harmonics = static_cast<int>(0.45 * sr / f0);
    std::vector<double> x(n, 0.0);
    for (int k = 1; k <= harmonics; ++k) {
        const double w = 2.0 * std::numbers::pi * k * f0 / sr;
        for (int i = 0; i < n; ++i) x[i] += std::sin(w * i) / k;
    }
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::fabs(v));
    for (double& v : x) v *= 0.8 / peak;
    return x;
}

inline std::vector<double> impulse_train(int period, int n, double amplitude = 1.0,
                                         int offset = 0) {
    std::vector<double> x(n, 0.0);
    for (int i = offset; i < n; i += period) x[i] = amplitude;
    return x;
}

/// One period of a Rosenberg-style glottal *derivative*: zeros over the
/// closed phase [0, (1-oq)·T), then the derivative of a raised-cosine flow
/// pulse over the open phase, ending in the sharp negative closure spike at
/// the period boundary.
inline std::vector<double> glottal_derivative_period(int period, double open_quotient = 0.5) {
    std::vector<double> flow(period, 0.0);
    const int open = std::max(2, static_cast<int>(open_quotient * period));
    const int start = period - open;
    for (int i = 0; i < open; ++i) {
        const double t = static_cast<double>(i + 1) / open;  // flow returns to 0 at period end
        flow[start + i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * t));
    }
    std::vector<double> deriv(period, 0.0);
    double prev = 0.0;
    for (int i = 0; i < period; ++i) {
        deriv[i] = flow[i] - prev;
        prev = flow[i];
    }
    return deriv;
}

inline std::vector<double> glottal_excitation(int period, int n, double open_quotient = 0.5) {
    const auto pulse = glottal_derivative_period(period, open_quotient);
    std::vector<double> e(n, 0.0);
    for (int i = 0; i < n; ++i) e[i] = pulse[i % period];
    return e;
}

/// Prediction-form LPC model from formant (frequency, bandwidth) pairs.
inline vc::LpcModel formant_model(const std::vector<std::pair<double, double>>& formants,
                                  int sr) {
    std::vector<double> a{1.0};
    for (const auto& [freq, bw] : formants) {
        const double r = std::exp(-std::numbers::pi * bw / sr);
        const double theta = 2.0 * std::numbers::pi * freq / sr;
        const std::vector<double> factor{1.0, -2.0 * r * std::cos(theta), r * r};
        std::vector<double> next(a.size() + 2, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < 3; ++j) next[i + j] += a[i] * factor[j];
        }
        a = std::move(next);
    }
    vc::LpcModel m;
    m.order = static_cast<int>(a.size()) - 1;
    m.gain = 1.0;
    m.coeffs.resize(m.order);
    for (int k = 1; k <= m.order; ++k) m.coeffs[k - 1] = -a[k];
    return m;
}

/// Sustained synthetic vowel: glottal-derivative excitation through an
/// all-pole formant filter.
inline vc::Waveform synth_vowel(const std::vector<std::pair<double, double>>& formants,
                                int period, int sr, double dur_s,
                                double open_quotient = 0.5) {
    const int n = static_cast<int>(dur_s * sr);
    const auto e = glottal_excitation(period, n, open_quotient);
    const auto m = formant_model(formants, sr);
    vc::Waveform w;
    w.sample_rate = sr;
    w.samples = vc::synthesize(m, e, {});
    double peak = 0.0;
    for (double v : w.samples) peak = std::max(peak, std::fabs(v));
    if (peak > 0.0) {
        for (double& v : w.samples) v *= 0.8 / peak;
    }
    return w;
}

// ----- two-"speaker" parallel utterance generator ------------------------

struct SpeakerVoice {
    // per-phone formant tables; both speakers index the same phone ids
    std::vector<std::vector<std::pair<double, double>>> phones;
};

inline SpeakerVoice speaker_a() {
    return {{
        {{730, 90}, {1090, 110}, {2440, 140}, {3400, 180}},   // /a/
        {{270, 60}, {2290, 110}, {3010, 150}, {3600, 200}},   // /i/
        {{300, 70}, {870, 100}, {2240, 130}, {3350, 180}},    // /u/
        {{530, 80}, {1840, 110}, {2480, 140}, {3500, 190}},   // /e/
        {{570, 90}, {840, 100}, {2410, 140}, {3300, 180}},    // /o/
        {{660, 90}, {1720, 120}, {2410, 140}, {3450, 190}},   // /ae/
        {{390, 70}, {1990, 110}, {2550, 140}, {3610, 200}},   // /I/
        {{440, 80}, {1020, 100}, {2240, 130}, {3390, 180}},   // /U/
        {{640, 90}, {1190, 110}, {2390, 140}, {3330, 180}},   // /^/
        {{500, 80}, {1450, 110}, {2450, 140}, {3350, 180}},   // schwa
    }};
}

inline SpeakerVoice speaker_b() {
    return {{
        {{850, 110}, {1220, 120}, {2810, 160}, {3700, 200}},  // /a/
        {{310, 70}, {2020, 120}, {2790, 160}, {3300, 190}},   // /i/
        {{350, 80}, {780, 110}, {2050, 140}, {3100, 170}},    // /u/
        {{610, 90}, {1650, 120}, {2680, 150}, {3250, 180}},   // /e/
        {{500, 80}, {920, 110}, {2200, 130}, {3550, 190}},    // /o/
        {{760, 100}, {1900, 130}, {2650, 150}, {3600, 200}},  // /ae/
        {{430, 80}, {2150, 120}, {2750, 150}, {3400, 190}},   // /I/
        {{470, 90}, {1110, 110}, {2390, 140}, {3200, 180}},   // /U/
        {{700, 100}, {1300, 120}, {2570, 150}, {3450, 190}},  // /^/
        {{540, 90}, {1480, 120}, {1850, 140}, {3500, 190}},   // /r/
    }};
}

/// Shared utterance "script": phone sequence and F0 contour derived from the
/// id, identical for both speakers of a parallel pair.
inline vc::Waveform synth_utterance(const SpeakerVoice& voice, std::uint64_t id_seed,
                                    double pitch_scale = 1.0, int sr = 16000,
                                    double open_quotient = 0.5) {
    std::mt19937_64 rng(id_seed * 0x9E3779B97F4A7C15ULL + 1);
    const int n_phones = 12 + static_cast<int>(rng() % 4);

    vc::Waveform w;
    w.sample_rate = sr;
    const int pad = sr / 50;
    w.samples.assign(pad, 0.0);

    double phase = 0.0;
    for (int ph = 0; ph < n_phones; ++ph) {
        const auto& formants = voice.phones[rng() % voice.phones.size()];
        const double dur = 0.2 + 0.15 * (rng() % 100) / 100.0;
        const double f0_base = (105.0 + 15.0 * (rng() % 100) / 100.0) * pitch_scale;
        const double f0_slope = -8.0 + 16.0 * (rng() % 100) / 100.0;

        const int len = static_cast<int>(dur * sr);
        const auto m = formant_model(formants, sr);

        // glottal excitation with a slowly varying pitch period
        std::vector<double> e(len, 0.0);
        int pos = 0;
        while (pos < len) {
            const double t = static_cast<double>(pos) / len;
            const double f0 = f0_base + f0_slope * t;
            const int period = std::max(20, static_cast<int>(sr / f0));
            const auto pulse = glottal_derivative_period(period, open_quotient);
            for (int i = 0; i < period && pos + i < len; ++i) e[pos + i] = pulse[i];
            pos += period;
        }
        // aspiration noise floor; without it LPC residuals of the purely
        // deterministic excitation collapse toward zero and the residual-RMS
        // gain becomes ill-conditioned
        {
            double pe = 0.0;
            for (double v : e) pe += v * v;
            const double sigma = 0.7 * std::sqrt(pe / len);
            std::normal_distribution<double> breath(0.0, sigma);
            for (double& v : e) v += breath(rng);
        }
        auto seg = vc::synthesize(m, e, {});
        // short raised-cosine edges: just enough to avoid boundary clicks.
        // Longer fades put whole analysis frames inside the taper, where the
        // residual level (and hence the per-frame gain) drops by tens of dB
        // and swamps level-sensitive spectral comparisons.
        const int ramp = sr / 200;
        for (int i = 0; i < ramp && i < len; ++i) {
            const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * i / ramp);
            seg[i] *= g;
            seg[len - 1 - i] *= g;
        }
        // crossfade into the previous phone so formant transitions are
        // gradual, as in natural speech; hard spectral jumps make converted
        // filters ring at the boundaries
        const int xfade = (ph == 0) ? 0 : std::min(len / 3, sr / 33);
        const std::size_t base = w.samples.size() - xfade;
        for (int i = 0; i < xfade; ++i) {
            const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * i / xfade);
            w.samples[base + i] = (1.0 - g) * w.samples[base + i] + g * seg[i];
        }
        w.samples.insert(w.samples.end(), seg.begin() + xfade, seg.end());
        (void)phase;
    }
    w.samples.insert(w.samples.end(), pad, 0.0);

    double peak = 0.0;
    for (double v : w.samples) peak = std::max(peak, std::fabs(v));
    if (peak > 0.0) {
        for (double& v : w.samples) v *= 0.8 / peak;
    }
    return w;
}

/// Writes an ARCTIC-style parallel corpus (same stems in two directories).
inline void write_parallel_corpus(const std::filesystem::path& src_dir,
                                  const std::filesystem::path& tgt_dir, int n_utts,
                                  double target_pitch_scale = 1.0, int sr = 16000) {
    std::filesystem::create_directories(src_dir);
    std::filesystem::create_directories(tgt_dir);
    const auto a = speaker_a();
    const auto b = speaker_b();
    for (int i = 0; i < n_utts; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "utt_%04d.wav", i);
        vc::save_wav(synth_utterance(a, 1000 + i, 1.0, sr), src_dir / name);
        vc::save_wav(synth_utterance(b, 1000 + i, target_pitch_scale, sr), tgt_dir / name);
    }
}

}  // namespace vctest
