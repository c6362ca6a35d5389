#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vcmorph/corpus.hpp"
#include "vcmorph/dtw.hpp"
#include "vcmorph/glottal.hpp"
#include "vcmorph/gmm.hpp"
#include "vcmorph/lsf.hpp"

namespace vc {

struct FeatureConfig {
    int lpc_order = 18;
    bool include_gain = false;  // append log residual RMS to the feature vector
};

enum class ExcitationMode { Predicted, Passthrough };

struct ConversionConfig {
    FeatureConfig features;
    EmConfig em;
    std::size_t pair_limit = 0;  // 0 = use the whole corpus
    ExcitationMode excitation = ExcitationMode::Predicted;
    std::uint64_t seed = 0;
    PitchConfig pitch;
    GciConfig gci;
    FramingConfig framing;
    ClosedPhaseConfig closed_phase;
    DtwOptions dtw;
    int prototype_length = 256;
    double lsf_min_gap = 3.141592653589793 / 1024.0;
};

/// Trained conversion rule plus excitation prediction rule.
struct ConversionModel {
    static constexpr int kFormatVersion = 1;

    JointGmm joint;
    std::vector<Eigen::VectorXd> prototypes;  // unit-RMS, one per component
    std::vector<double> prototype_period;     // mean pitch period (samples)
    std::vector<double> prototype_gain;       // mean residual RMS
    FeatureConfig features;
    ExcitationMode excitation = ExcitationMode::Predicted;
    int sample_rate = 16000;
    double lsf_min_gap = 3.141592653589793 / 1024.0;
};

/// Per-utterance analysis shared by training, conversion and evaluation.
struct UtteranceAnalysis {
    PitchTrack track;
    GciMarks marks;
    std::vector<AnalysisFrame> frames;   // lpc and residual populated
    FeatureSequence features;            // one vector per usable frame
    std::vector<int> frame_index;        // features[i] <- frames[frame_index[i]]
};

UtteranceAnalysis analyze_utterance(const Waveform& w,
                                    const ConversionConfig& cfg);

struct TrainReport {
    std::size_t pairs_used = 0;
    std::size_t training_vectors = 0;
    double final_avg_loglik = 0.0;
    int em_iterations = 0;
};

/// Full phase-1 pipeline: analysis, DTW alignment, joint EM fit, excitation
/// prototype extraction. Throws DataError when fewer than 10·K aligned
/// voiced vector pairs are available.
ConversionModel train(const ParallelCorpus& corpus, const ConversionConfig& cfg,
                      TrainReport* report = nullptr);

struct ConvertResult {
    Waveform audio;
    std::size_t flagged_frames = 0;  // synthesis fallbacks to the source frame
};

/// Full phase-2 pipeline: per-frame feature conversion, excitation
/// prediction, synthesis with state continuity and one-period crossfade.
ConvertResult convert(const ConversionModel& model, const Waveform& src,
                      const ConversionConfig& cfg = {});

/// e = RMS(source_residual) · unit_rms(resample(Σ_k h_k prototype_k, 2·T0)).
std::vector<double> predict_excitation(const ConversionModel& model,
                                       const Eigen::VectorXd& responsibilities,
                                       const std::vector<double>& source_residual,
                                       int pitch_period);

/// Versioned JSON container; round trip is lossless at double precision.
void save_model(const ConversionModel& model, const std::filesystem::path& path);
ConversionModel load_model(const std::filesystem::path& path);

/// Linear-interpolation resampling to a fixed length.
std::vector<double> resample_to(std::span<const double> x, int length);

double rms(std::span<const double> x);

}  // namespace vc
