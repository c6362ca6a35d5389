#pragma once

#include <filesystem>
#include <vector>

namespace vc {

/// Mono audio signal, samples normalized to [-1, 1].
struct Waveform {
    std::vector<double> samples;
    int sample_rate = 16000;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

/// Reads a RIFF/WAVE file. Supports PCM 16-bit and IEEE float 32-bit.
/// Multichannel files are reduced to channel 0 (with a warning on stderr).
/// Throws DataError on malformed headers, unsupported codecs or empty data.
Waveform load_wav(const std::filesystem::path& path);

/// Writes 16-bit PCM mono. Values outside [-1, 1] are clipped.
void save_wav(const Waveform& w, const std::filesystem::path& path);

/// Scales the waveform so its absolute peak equals `peak` (no-op on silence).
Waveform peak_normalize(const Waveform& w, double peak = 0.9);

}  // namespace vc
