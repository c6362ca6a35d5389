#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vcmorph/wave.hpp"

namespace vc {

struct UtterancePair {
    std::string id;
    Waveform source;
    Waveform target;
};

struct ParallelCorpus {
    std::vector<UtterancePair> pairs;
    std::string source_speaker;
    std::string target_speaker;
};

struct IngestOptions {
    std::optional<std::size_t> limit;
    bool normalize = true;  // peak-normalize each utterance to 0.9
};

/// Pairs WAV files from two directories by file stem, sorted by id.
/// Unmatched stems are reported on stderr. Throws DataError when no pair
/// matches or when a pair mixes sample rates.
ParallelCorpus ingest_corpus(const std::filesystem::path& src_dir,
                             const std::filesystem::path& tgt_dir,
                             const IngestOptions& opts = {});

}  // namespace vc
