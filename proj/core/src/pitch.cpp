#include "vcmorph/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vcmorph/errors.hpp"

namespace vc {

std::size_t PitchTrack::frame_at(std::size_t n, int sample_rate) const {
    if (f0.empty()) return 0;
    const double hop = hop_s * sample_rate;
    const double center0 = 0.5 * window_s * sample_rate;
    const long i = std::lround((static_cast<double>(n) - center0) / hop);
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(f0.size()) - 1));
}

PitchTrack estimate_pitch(const Waveform& w, const PitchConfig& cfg) {
    if (w.sample_rate < 8000) throw DataError("estimate_pitch: sample rate below 8 kHz");
    const int sr = w.sample_rate;
    const int hop = std::max(1, static_cast<int>(std::lround(cfg.hop_s * sr)));
    const int win = std::max(hop + 1, static_cast<int>(std::lround(cfg.window_s * sr)));
    const int n = static_cast<int>(w.samples.size());
    if (n < win) throw DataError("estimate_pitch: waveform shorter than one analysis window");

    const int lag_min = std::max(2, static_cast<int>(std::floor(sr / cfg.f_max)));
    const int lag_max = std::min(win - 1, static_cast<int>(std::ceil(sr / cfg.f_min)));

    PitchTrack track;
    track.hop_s = static_cast<double>(hop) / sr;
    track.window_s = static_cast<double>(win) / sr;

    const int n_hops = (n - win) / hop + 1;
    std::vector<double> ncc(lag_max + 1, 0.0);

    for (int h = 0; h < n_hops; ++h) {
        const double* x = w.samples.data() + static_cast<std::size_t>(h) * hop;

        double energy = 0.0;
        for (int i = 0; i < win; ++i) energy += x[i] * x[i];
        if (energy < 1e-12) {
            track.f0.push_back(0.0);
            track.voicing.push_back(false);
            continue;
        }

        double best = 0.0;
        for (int lag = lag_min; lag <= lag_max; ++lag) {
            double num = 0.0, e0 = 0.0, e1 = 0.0;
            const int m = win - lag;
            for (int i = 0; i < m; ++i) {
                num += x[i] * x[i + lag];
                e0 += x[i] * x[i];
                e1 += x[i + lag] * x[i + lag];
            }
            const double den = std::sqrt(e0 * e1);
            ncc[lag] = den > 0.0 ? num / den : 0.0;
            best = std::max(best, ncc[lag]);
        }

        if (best < cfg.voicing_threshold) {
            track.f0.push_back(0.0);
            track.voicing.push_back(false);
            continue;
        }

        // Smallest local maximum close to the global best avoids octave-down
        // errors on strongly periodic signals.
        int chosen = -1;
        const double accept = std::max(cfg.voicing_threshold, 0.85 * best);
        for (int lag = lag_min; lag <= lag_max; ++lag) {
            const bool local_max = (lag == lag_min || ncc[lag] >= ncc[lag - 1]) &&
                                   (lag == lag_max || ncc[lag] >= ncc[lag + 1]);
            if (local_max && ncc[lag] >= accept) {
                chosen = lag;
                break;
            }
        }
        if (chosen < 0) {
            track.f0.push_back(0.0);
            track.voicing.push_back(false);
            continue;
        }

        double lag_refined = chosen;
        if (chosen > lag_min && chosen < lag_max) {
            const double y0 = ncc[chosen - 1], y1 = ncc[chosen], y2 = ncc[chosen + 1];
            const double denom = y0 - 2.0 * y1 + y2;
            if (std::fabs(denom) > 1e-12) {
                const double delta = 0.5 * (y0 - y2) / denom;
                if (std::fabs(delta) <= 1.0) lag_refined += delta;
            }
        }

        double f0 = sr / lag_refined;
        f0 = std::clamp(f0, cfg.f_min, cfg.f_max);
        track.f0.push_back(f0);
        track.voicing.push_back(true);
    }
    return track;
}

}  // namespace vc
