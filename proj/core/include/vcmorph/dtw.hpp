#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

namespace vc {

/// Per-utterance feature track (LSF vectors, optionally + log-gain).
struct FeatureSequence {
    std::vector<Eigen::VectorXd> frames;
    std::vector<int> timing;        // frame start indices, strictly increasing
    std::vector<bool> voiced;       // per-frame voicing class

    std::size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }
    int dim() const { return frames.empty() ? 0 : static_cast<int>(frames[0].size()); }
};

struct WarpPath {
    std::vector<std::pair<int, int>> pairs;
    double total_cost = 0.0;
};

struct DtwOptions {
    double vu_penalty = 1.0;  // added cost for voiced/unvoiced cross pairs
    int band = -1;            // Sakoe-Chiba radius; <0 disables the band
};

/// Minimum-cost monotone alignment under steps {(1,0),(0,1),(1,1)} with
/// Euclidean local distance. Ties broken preferring diagonal, then (1,0).
WarpPath dtw_align(const FeatureSequence& src, const FeatureSequence& tgt,
                   const DtwOptions& opts = {});

/// Stacked [x; y] vectors, one per path pair.
std::vector<Eigen::VectorXd> paired_vectors(const FeatureSequence& src,
                                            const FeatureSequence& tgt,
                                            const WarpPath& path);

}  // namespace vc
