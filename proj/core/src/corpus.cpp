#include "vcmorph/corpus.hpp"

#include <algorithm>
#include <iostream>
#include <map>

#include "vcmorph/errors.hpp"

namespace vc {

namespace {

std::map<std::string, std::filesystem::path> scan_wavs(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("not a directory: " + dir.string());
    }
    std::map<std::string, std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        auto ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (ext == ".wav") out[entry.path().stem().string()] = entry.path();
    }
    return out;
}

}  // namespace

ParallelCorpus ingest_corpus(const std::filesystem::path& src_dir,
                             const std::filesystem::path& tgt_dir,
                             const IngestOptions& opts) {
    auto src_files = scan_wavs(src_dir);
    auto tgt_files = scan_wavs(tgt_dir);

    ParallelCorpus corpus;
    corpus.source_speaker = src_dir.filename().string();
    corpus.target_speaker = tgt_dir.filename().string();

    for (const auto& [stem, path] : src_files) {
        if (!tgt_files.count(stem)) {
            std::cerr << "warning: unmatched source utterance " << stem << "\n";
        }
    }
    for (const auto& [stem, path] : tgt_files) {
        if (!src_files.count(stem)) {
            std::cerr << "warning: unmatched target utterance " << stem << "\n";
        }
    }

    for (const auto& [stem, src_path] : src_files) {
        auto it = tgt_files.find(stem);
        if (it == tgt_files.end()) continue;
        if (opts.limit && corpus.pairs.size() >= *opts.limit) break;

        UtterancePair pair;
        pair.id = stem;
        pair.source = load_wav(src_path);
        pair.target = load_wav(it->second);
        if (pair.source.sample_rate != pair.target.sample_rate) {
            throw DataError("sample-rate mismatch in pair " + stem + ": " +
                            std::to_string(pair.source.sample_rate) + " vs " +
                            std::to_string(pair.target.sample_rate));
        }
        if (opts.normalize) {
            pair.source = peak_normalize(pair.source);
            pair.target = peak_normalize(pair.target);
        }
        corpus.pairs.push_back(std::move(pair));
    }

    if (corpus.pairs.empty()) {
        throw DataError("no matched utterance pairs between " + src_dir.string() +
                        " and " + tgt_dir.string());
    }
    return corpus;
}

}  // namespace vc
