#pragma once

#include <string>
#include <vector>

#include "vcmorph/conversion.hpp"
#include "vcmorph/corpus.hpp"

namespace vc {

struct EvalReport {
    double snr_db = 0.0;
    double avg_spectral_distortion = 0.0;  // dB
    std::size_t frames_compared = 0;
    std::size_t flagged_frames = 0;
};

/// 10·log10(Σr² / Σ(r−t)²) after best cross-correlation lag (±20 ms) and
/// RMS-matched scaling of the test signal. Capped at +100 dB.
/// Throws DataError on a zero-energy reference.
double snr_db(const Waveform& reference, const Waveform& test);

struct SpectralDistortionConfig {
    int lpc_order = 18;
    int envelope_points = 512;
    PitchConfig pitch;
    GciConfig gci;
    FramingConfig framing;
    ClosedPhaseConfig closed_phase;
};

/// RMS log-spectral distance between LPC envelopes of DTW-aligned voiced
/// frames, averaged over aligned voiced-voiced pairs.
/// Throws DataError when either signal has no voiced frame.
double avg_spectral_distortion(const Waveform& a, const Waveform& b,
                               const SpectralDistortionConfig& cfg = {});

struct ExperimentRow {
    std::size_t training_pairs = 0;
    int gaussians = 0;
    double time_s = 0.0;
    double snr_db = 0.0;
    double avg_sd = 0.0;
    bool failed = false;
    std::string error;
};

struct ExperimentGrid {
    std::vector<ExperimentRow> rows;
};

/// One cell per (training_pairs × gaussians): train on the first
/// `training_pairs` pairs, convert `eval_count` pairs, average the metrics.
/// Cell failures are recorded, not propagated.
ExperimentGrid run_experiment(const ParallelCorpus& corpus,
                              const std::vector<std::size_t>& training_pairs,
                              const std::vector<int>& gaussians,
                              std::size_t eval_count,
                              const ConversionConfig& base_cfg);

/// CSV with header `training_pairs,gaussians,time_s,snr_db,avg_sd`
/// (RFC 4180; failed cells carry empty metric fields).
std::string grid_to_csv(const ExperimentGrid& grid);
ExperimentGrid grid_from_csv(const std::string& csv);

}  // namespace vc
