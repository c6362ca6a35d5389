#pragma once

#include <optional>
#include <vector>

#include "vcmorph/lpc.hpp"
#include "vcmorph/pitch.hpp"
#include "vcmorph/wave.hpp"

namespace vc {

/// Strictly increasing sample indices of glottal closure.
struct GciMarks {
    std::vector<int> instants;

    std::size_t size() const { return instants.size(); }
    bool empty() const { return instants.empty(); }
};

/// Pitch-synchronous analysis frame. Voiced frames span two pitch periods
/// [gci_k, gci_k+2); unvoiced stretches are covered by fixed 20 ms frames.
struct AnalysisFrame {
    int start = 0;
    std::vector<double> samples;
    std::vector<int> gci;  // global sample indices inside the frame
    int pitch_period = 0;  // samples; half the frame length when voiced
    bool voiced = false;
    std::optional<LpcModel> lpc;
    std::optional<std::vector<double>> residual;

    int length() const { return static_cast<int>(samples.size()); }
    int end() const { return start + length(); }
};

struct GciConfig {
    int coarse_order = 12;     // LPC order for the detection residual
    double frame_s = 0.032;    // coarse analysis frame
    double hop_s = 0.016;
};

/// Locates one closure instant per pitch period in voiced regions, at the
/// dominant negative peak of a coarse LPC residual. Empty for unvoiced input.
GciMarks detect_gci(const Waveform& w, const PitchTrack& track,
                    const GciConfig& cfg = {});

struct FramingConfig {
    double unvoiced_frame_s = 0.020;
    double unvoiced_hop_s = 0.010;
};

/// Tiles the utterance: voiced frames of two pitch periods overlapping by
/// one period, fixed frames elsewhere. Voiced regions with fewer than three
/// GCIs fall back to unvoiced framing.
std::vector<AnalysisFrame> frame_pitch_synchronous(const Waveform& w,
                                                   const GciMarks& marks,
                                                   const PitchTrack& track,
                                                   const FramingConfig& cfg = {});

struct ClosedPhaseConfig {
    double closed_fraction = 0.4;  // analysis interval (GCI, GCI + frac·T0]
};

struct ClosedPhaseLpc {
    LpcModel model;
    bool used_fallback = false;  // full-frame autocorrelation fallback
};

/// Covariance-method LPC restricted to closed-phase samples, pooled across
/// the frame's periods. Falls back to full-frame autocorrelation analysis
/// when the pooled interval is shorter than 2p samples.
/// Throws DataError on unvoiced frames.
ClosedPhaseLpc closed_phase_lpc(const Waveform& w, const AnalysisFrame& f,
                                int order, const ClosedPhaseConfig& cfg = {});

/// Inverse filters the frame with the closed-phase vocal-tract model; the
/// residual approximates the glottal derivative.
std::vector<double> separate_glottal(const Waveform& w, const AnalysisFrame& f,
                                     const LpcModel& m);

/// Full-frame autocorrelation LPC with Hann window; gain from the unwindowed
/// residual RMS. Works for voiced and unvoiced frames alike.
LpcModel full_frame_lpc(const Waveform& w, const AnalysisFrame& f, int order);

}  // namespace vc
