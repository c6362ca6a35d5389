#include "vcmorph/glottal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <span>

#include "vcmorph/errors.hpp"

namespace vc {

namespace {

// Poles closer to the unit circle than this (a bandwidth under ~50 Hz at
// 16 kHz) are artifacts of a corrupted analysis window, not vocal-tract
// resonances; see cap_pole_radius.
constexpr double kMaxPoleRadius = 0.99;

// Residual of a coarse frame-by-frame LPC, for GCI peak picking.
std::vector<double> coarse_residual(const Waveform& w, const GciConfig& cfg) {
    const int sr = w.sample_rate;
    const int n = static_cast<int>(w.samples.size());
    const int frame = std::max(64, static_cast<int>(std::lround(cfg.frame_s * sr)));
    const int hop = std::max(32, static_cast<int>(std::lround(cfg.hop_s * sr)));
    const int order = cfg.coarse_order;

    std::vector<double> residual(w.samples.begin(), w.samples.end());
    const auto window = hann_window(frame);
    std::vector<double> buf(frame);

    for (int start = 0; start < n; start += hop) {
        const int f_start = std::min(start, std::max(0, n - frame));
        const int f_len = std::min(frame, n - f_start);
        if (f_len <= order + 1) break;

        double energy = 0.0;
        for (int i = 0; i < f_len; ++i) {
            buf[i] = w.samples[f_start + i] * window[i];
            energy += buf[i] * buf[i];
        }
        if (energy < 1e-14) continue;  // silence: residual stays = signal (zeros)

        auto r = autocorrelate(std::span<const double>(buf.data(), f_len), order);
        if (r[0] <= 0.0) continue;
        const LpcModel m = levinson_durbin(r, order);

        const int out_end = std::min(start + hop, n);
        const int h_start = std::max(0, start - order);
        std::span<const double> seg(w.samples.data() + start, out_end - start);
        std::span<const double> hist(w.samples.data() + h_start, start - h_start);
        auto e = inverse_filter(seg, m, hist);
        std::copy(e.begin(), e.end(), residual.begin() + start);
    }
    return residual;
}

struct VoicedRegion {
    int begin = 0;
    int end = 0;  // exclusive
};

std::vector<VoicedRegion> voiced_regions(const Waveform& w, const PitchTrack& track) {
    std::vector<VoicedRegion> regions;
    const int n = static_cast<int>(w.samples.size());
    int start = -1;
    for (int i = 0; i < n; ++i) {
        const bool v = !track.f0.empty() &&
                       track.voicing[track.frame_at(static_cast<std::size_t>(i), w.sample_rate)];
        if (v && start < 0) start = i;
        if (!v && start >= 0) {
            regions.push_back({start, i});
            start = -1;
        }
    }
    if (start >= 0) regions.push_back({start, n});
    return regions;
}

int argmin_in(std::span<const double> x, int begin, int end) {
    int best = begin;
    for (int i = begin + 1; i < end; ++i) {
        if (x[i] < x[best]) best = i;
    }
    return best;
}

}  // namespace

GciMarks detect_gci(const Waveform& w, const PitchTrack& track, const GciConfig& cfg) {
    GciMarks marks;
    if (w.empty() || track.f0.empty()) return marks;

    const auto residual = coarse_residual(w, cfg);
    const auto regions = voiced_regions(w, track);
    const int sr = w.sample_rate;

    auto period_at = [&](int n) -> double {
        const double f0 = track.f0[track.frame_at(static_cast<std::size_t>(n), sr)];
        return f0 > 0.0 ? sr / f0 : 0.0;
    };

    for (const auto& region : regions) {
        const double t0 = period_at(region.begin);
        if (t0 <= 0.0 || region.end - region.begin < static_cast<int>(t0)) continue;

        const int anchor = argmin_in(residual, region.begin, region.end);
        std::vector<int> local{anchor};

        // walk forward
        int last = anchor;
        while (true) {
            const double t = period_at(last);
            if (t <= 0.0) break;
            const int lo = last + static_cast<int>(std::floor(0.8 * t));
            const int hi = std::min(region.end, last + static_cast<int>(std::ceil(1.25 * t)) + 1);
            if (lo >= hi) break;
            last = argmin_in(residual, lo, hi);
            local.push_back(last);
        }
        // walk backward
        last = anchor;
        while (true) {
            const double t = period_at(last);
            if (t <= 0.0) break;
            const int hi = last - static_cast<int>(std::floor(0.8 * t)) + 1;
            const int lo = std::max(region.begin, last - static_cast<int>(std::ceil(1.25 * t)));
            if (lo >= hi) break;
            last = argmin_in(residual, lo, hi);
            local.push_back(last);
        }

        std::sort(local.begin(), local.end());
        local.erase(std::unique(local.begin(), local.end()), local.end());
        marks.instants.insert(marks.instants.end(), local.begin(), local.end());
    }
    std::sort(marks.instants.begin(), marks.instants.end());
    return marks;
}

std::vector<AnalysisFrame> frame_pitch_synchronous(const Waveform& w, const GciMarks& marks,
                                                   const PitchTrack& track,
                                                   const FramingConfig& cfg) {
    const int n = static_cast<int>(w.samples.size());
    const int sr = w.sample_rate;
    std::vector<AnalysisFrame> frames;
    std::vector<bool> covered(n, false);

    // Group marks into runs of consecutive pitch periods.
    std::vector<std::vector<int>> runs;
    for (int g : marks.instants) {
        const double f0 = track.f0.empty()
                              ? 0.0
                              : track.f0[track.frame_at(static_cast<std::size_t>(g), sr)];
        const double t0 = f0 > 0.0 ? sr / f0 : 0.0;
        if (!runs.empty() && t0 > 0.0 &&
            g - runs.back().back() <= static_cast<int>(std::ceil(1.5 * t0))) {
            runs.back().push_back(g);
        } else {
            runs.push_back({g});
        }
    }

    for (const auto& run : runs) {
        if (run.size() < 3) continue;  // too few GCIs: leave to unvoiced framing
        for (std::size_t k = 0; k + 2 < run.size(); ++k) {
            AnalysisFrame f;
            f.start = run[k];
            const int end = std::min(run[k + 2], n);
            if (end - f.start < 4) continue;
            f.samples.assign(w.samples.begin() + f.start, w.samples.begin() + end);
            f.gci = {run[k], run[k + 1], run[k + 2]};
            f.pitch_period = (run[k + 2] - run[k]) / 2;
            f.voiced = true;
            for (int i = f.start; i < end; ++i) covered[i] = true;
            frames.push_back(std::move(f));
        }
    }

    // Fixed-frame coverage of the uncovered stretches.
    const int uf = std::max(32, static_cast<int>(std::lround(cfg.unvoiced_frame_s * sr)));
    const int uh = std::max(16, static_cast<int>(std::lround(cfg.unvoiced_hop_s * sr)));
    int i = 0;
    while (i < n) {
        if (covered[i]) {
            ++i;
            continue;
        }
        int stretch_end = i;
        while (stretch_end < n && !covered[stretch_end]) ++stretch_end;
        for (int s = i; s < stretch_end; s += uh) {
            const int end = std::min(s + uf, n);
            if (end - s < 32 && s != i) break;
            AnalysisFrame f;
            f.start = s;
            f.samples.assign(w.samples.begin() + s, w.samples.begin() + end);
            f.pitch_period = 0;
            f.voiced = false;
            frames.push_back(std::move(f));
            if (end == n) break;
        }
        i = stretch_end;
    }

    std::sort(frames.begin(), frames.end(),
              [](const AnalysisFrame& a, const AnalysisFrame& b) { return a.start < b.start; });
    return frames;
}

LpcModel full_frame_lpc(const Waveform& w, const AnalysisFrame& f, int order) {
    const int len = f.length();
    if (len <= order) throw DataError("full_frame_lpc: frame shorter than LPC order");

    const auto window = hann_window(len);
    std::vector<double> buf(len);
    double energy = 0.0;
    for (int i = 0; i < len; ++i) {
        buf[i] = f.samples[i] * window[i];
        energy += buf[i] * buf[i];
    }

    LpcModel m;
    if (energy < 1e-14) {
        m.order = order;
        m.coeffs.assign(order, 0.0);
        m.gain = 0.0;
        return m;
    }

    auto r = autocorrelate(buf, order);
    m = cap_pole_radius(levinson_durbin(r, order), kMaxPoleRadius);

    const int h_start = std::max(0, f.start - order);
    std::span<const double> hist(w.samples.data() + h_start, f.start - h_start);
    const auto e = inverse_filter(f.samples, m, hist);
    double p = 0.0;
    for (double v : e) p += v * v;
    m.gain = std::sqrt(p / e.size());
    return m;
}

ClosedPhaseLpc closed_phase_lpc(const Waveform& w, const AnalysisFrame& f, int order,
                                const ClosedPhaseConfig& cfg) {
    if (!f.voiced) throw DataError("closed_phase_lpc: frame is not voiced");

    // Pool closed-phase sample indices (GCI, GCI + frac·T0] across periods.
    std::vector<int> idx;
    for (std::size_t k = 0; k + 1 < f.gci.size(); ++k) {
        const int g = f.gci[k];
        const int t0 = f.gci[k + 1] - f.gci[k];
        const int stop = g + static_cast<int>(std::floor(cfg.closed_fraction * t0));
        for (int i = g + 1; i <= stop; ++i) {
            if (i >= order && i < static_cast<int>(w.samples.size())) idx.push_back(i);
        }
    }

    ClosedPhaseLpc out;
    if (static_cast<int>(idx.size()) < 2 * order) {
        out.model = full_frame_lpc(w, f, order);
        out.used_fallback = true;
        return out;
    }

    // Covariance-method normal equations over the pooled interval.
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(order, order);
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(order);
    const auto& x = w.samples;
    for (int n : idx) {
        for (int j = 1; j <= order; ++j) {
            psi(j - 1) += x[n] * x[n - j];
            for (int k = j; k <= order; ++k) {
                phi(j - 1, k - 1) += x[n - j] * x[n - k];
            }
        }
    }
    for (int j = 0; j < order; ++j) {
        for (int k = 0; k < j; ++k) phi(j, k) = phi(k, j);
    }
    auto solve_with = [&](double ridge) -> std::optional<LpcModel> {
        Eigen::MatrixXd damped = phi;
        for (int j = 0; j < order; ++j) damped(j, j) += ridge;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(damped);
        if (ldlt.info() != Eigen::Success) return std::nullopt;
        const Eigen::VectorXd a = ldlt.solve(psi);
        if (!a.allFinite()) return std::nullopt;
        LpcModel m;
        m.order = order;
        m.coeffs.assign(a.data(), a.data() + order);
        return m;
    };

    // The pooled normal equations cover only ~100 samples for an order-18
    // solve and can be severely ill-conditioned. When the window really is a
    // noise-free filter decay the plain least-squares solution is exact and
    // must not be perturbed, so try it first and accept it only when it fits
    // the window essentially perfectly. Any appreciable residual means the
    // window carries noise or excitation leakage; an undamped ill-conditioned
    // solve then sprouts spurious razor-thin resonances that ring for
    // hundreds of milliseconds when synthesized, so re-solve with a
    // Tikhonov-damped system and cap any pole still hugging the unit circle.
    std::optional<LpcModel> m_opt = solve_with(0.0);
    if (m_opt) {
        double resid = 0.0, signal = 0.0;
        for (int n : idx) {
            double e = x[n];
            for (int j = 1; j <= order; ++j) e -= m_opt->coeffs[j - 1] * x[n - j];
            resid += e * e;
            signal += x[n] * x[n];
        }
        if (resid > 1e-9 * signal) m_opt.reset();
    }
    bool damped = false;
    if (!m_opt || max_root_radius(*m_opt) >= kMaxPoleRadius) {
        damped = true;
        m_opt = solve_with(1e-4 * phi.trace() / order);
        if (m_opt) *m_opt = cap_pole_radius(std::move(*m_opt), kMaxPoleRadius);
    }
    if (!m_opt || !is_stable(*m_opt)) {
        out.model = full_frame_lpc(w, f, order);
        out.used_fallback = true;
        return out;
    }
    LpcModel m = std::move(*m_opt);

    const int h_start = std::max(0, f.start - order);
    std::span<const double> hist(w.samples.data() + h_start, f.start - h_start);
    const auto e = inverse_filter(f.samples, m, hist);
    double p = 0.0;
    for (double v : e) p += v * v;
    m.gain = std::sqrt(p / e.size());

    // For noisy windows, sanity-check the damped solution against the
    // full-frame fit: when the window is badly corrupted (mislocated closure
    // instants, a transition straddling the frame) the closed-phase model's
    // whole-frame residual dwarfs the ordinary one, and such a model is
    // worse than useless for synthesis. The comparison is meaningless for
    // exactly-fit noise-free windows, whose true-filter residual is the raw
    // excitation and legitimately exceeds the whitening minimum.
    if (damped) {
        LpcModel ff = full_frame_lpc(w, f, order);
        if (ff.gain > 0.0 && m.gain > 1.5 * ff.gain) {
            out.model = std::move(ff);
            out.used_fallback = true;
            return out;
        }
    }

    out.model = std::move(m);
    return out;
}

std::vector<double> separate_glottal(const Waveform& w, const AnalysisFrame& f,
                                     const LpcModel& m) {
    const int h_start = std::max(0, f.start - m.order);
    std::span<const double> hist(w.samples.data() + h_start, f.start - h_start);
    return inverse_filter(f.samples, m, hist);
}

}  // namespace vc
