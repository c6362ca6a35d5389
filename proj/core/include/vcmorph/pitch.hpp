#pragma once

#include <vector>

#include "vcmorph/wave.hpp"

namespace vc {

struct PitchConfig {
    double f_min = 50.0;
    double f_max = 500.0;
    double hop_s = 0.010;
    double window_s = 0.040;
    double voicing_threshold = 0.3;
};

/// Frame-rate pitch track; f0 == 0 marks unvoiced frames.
struct PitchTrack {
    double hop_s = 0.010;
    double window_s = 0.040;
    std::vector<double> f0;
    std::vector<bool> voicing;

    std::size_t size() const { return f0.size(); }
    /// Frame index covering sample n at the given rate.
    std::size_t frame_at(std::size_t n, int sample_rate) const;
};

/// Normalized-autocorrelation pitch estimation per hop.
/// Throws DataError when the waveform is shorter than one analysis window.
PitchTrack estimate_pitch(const Waveform& w, const PitchConfig& cfg = {});

}  // namespace vc
