#include "vcmorph/eval.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "vcmorph/errors.hpp"

namespace vc {

namespace {

constexpr double kSnrCapDb = 100.0;

std::vector<double> shifted(const std::vector<double>& t, int lag, std::size_t n) {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const long j = static_cast<long>(i) - lag;
        if (j >= 0 && j < static_cast<long>(t.size())) out[i] = t[j];
    }
    return out;
}

}  // namespace

double snr_db(const Waveform& reference, const Waveform& test) {
    if (reference.empty() || test.empty()) throw DataError("snr_db: empty signal");
    if (reference.sample_rate != test.sample_rate) {
        throw DataError("snr_db: sample-rate mismatch");
    }
    const auto& r = reference.samples;
    double ref_energy = 0.0;
    for (double v : r) ref_energy += v * v;
    if (ref_energy <= 0.0) throw DataError("snr_db: zero-energy reference");

    // best global lag within ±20 ms
    const int max_lag = static_cast<int>(std::lround(0.020 * reference.sample_rate));
    int best_lag = 0;
    double best_corr = -std::numeric_limits<double>::infinity();
    for (int lag = -max_lag; lag <= max_lag; ++lag) {
        double corr = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const long j = static_cast<long>(i) - lag;
            if (j >= 0 && j < static_cast<long>(test.samples.size())) {
                corr += r[i] * test.samples[j];
            }
        }
        if (corr > best_corr) {
            best_corr = corr;
            best_lag = lag;
        }
    }

    auto t = shifted(test.samples, best_lag, r.size());

    // RMS-matched scaling of the test signal
    double test_energy = 0.0;
    for (double v : t) test_energy += v * v;
    if (test_energy > 0.0) {
        const double s = std::sqrt(ref_energy / test_energy);
        for (double& v : t) v *= s;
    }

    double noise = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double d = r[i] - t[i];
        noise += d * d;
    }
    if (noise <= ref_energy * 1e-10) return kSnrCapDb;
    return std::min(kSnrCapDb, 10.0 * std::log10(ref_energy / noise));
}

double avg_spectral_distortion(const Waveform& a, const Waveform& b,
                               const SpectralDistortionConfig& cfg) {
    ConversionConfig ccfg;
    ccfg.features.lpc_order = cfg.lpc_order;
    ccfg.pitch = cfg.pitch;
    ccfg.gci = cfg.gci;
    ccfg.framing = cfg.framing;
    ccfg.closed_phase = cfg.closed_phase;

    const UtteranceAnalysis ua = analyze_utterance(a, ccfg);
    const UtteranceAnalysis ub = analyze_utterance(b, ccfg);

    auto has_voiced = [](const UtteranceAnalysis& u) {
        for (bool v : u.features.voiced) {
            if (v) return true;
        }
        return false;
    };
    if (ua.features.empty() || ub.features.empty() || !has_voiced(ua) || !has_voiced(ub)) {
        throw DataError("avg_spectral_distortion: no voiced frames to compare");
    }

    const WarpPath path = dtw_align(ua.features, ub.features);

    double total = 0.0;
    std::size_t count = 0;
    for (const auto& [i, j] : path.pairs) {
        if (!ua.features.voiced[i] || !ub.features.voiced[j]) continue;
        const auto& fa = ua.frames[ua.frame_index[i]];
        const auto& fb = ub.frames[ub.frame_index[j]];
        const auto ea = spectral_envelope(*fa.lpc, cfg.envelope_points);
        const auto eb = spectral_envelope(*fb.lpc, cfg.envelope_points);
        double acc = 0.0;
        for (int k = 0; k < cfg.envelope_points; ++k) {
            const double d = ea[k] - eb[k];
            acc += d * d;
        }
        total += std::sqrt(acc / cfg.envelope_points);
        ++count;
    }
    if (count == 0) throw DataError("avg_spectral_distortion: no aligned voiced pairs");
    return total / count;
}

ExperimentGrid run_experiment(const ParallelCorpus& corpus,
                              const std::vector<std::size_t>& training_pairs,
                              const std::vector<int>& gaussians,
                              std::size_t eval_count,
                              const ConversionConfig& base_cfg) {
    ExperimentGrid grid;
    const std::size_t n_eval = std::min(eval_count, corpus.pairs.size());

    for (std::size_t tp : training_pairs) {
        for (int k : gaussians) {
            ExperimentRow row;
            row.training_pairs = tp;
            row.gaussians = k;
            try {
                ConversionConfig cfg = base_cfg;
                cfg.pair_limit = tp;
                cfg.em.num_components = k;

                const auto t0 = std::chrono::steady_clock::now();
                const ConversionModel model = train(corpus, cfg);

                double snr_sum = 0.0, sd_sum = 0.0;
                for (std::size_t e = 0; e < n_eval; ++e) {
                    const auto& pair = corpus.pairs[e];
                    const ConvertResult converted = convert(model, pair.source, cfg);
                    snr_sum += snr_db(pair.target, converted.audio);
                    SpectralDistortionConfig sd_cfg;
                    sd_cfg.lpc_order = cfg.features.lpc_order;
                    sd_sum += avg_spectral_distortion(converted.audio, pair.target, sd_cfg);
                }
                const auto t1 = std::chrono::steady_clock::now();

                row.time_s = std::chrono::duration<double>(t1 - t0).count();
                row.snr_db = snr_sum / n_eval;
                row.avg_sd = sd_sum / n_eval;
            } catch (const Error& e) {
                row.failed = true;
                row.error = e.what();
                std::cerr << "experiment cell (" << tp << ", " << k << ") failed: " << e.what()
                          << "\n";
            }
            grid.rows.push_back(std::move(row));
        }
    }
    return grid;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

std::string grid_to_csv(const ExperimentGrid& grid) {
    std::string out = "training_pairs,gaussians,time_s,snr_db,avg_sd\r\n";
    for (const auto& row : grid.rows) {
        out += std::to_string(row.training_pairs) + "," + std::to_string(row.gaussians) + ",";
        if (row.failed) {
            out += ",," + csv_quote(row.error);
        } else {
            out += fmt_double(row.time_s) + "," + fmt_double(row.snr_db) + "," +
                   fmt_double(row.avg_sd);
        }
        out += "\r\n";
    }
    return out;
}

ExperimentGrid grid_from_csv(const std::string& csv) {
    ExperimentGrid grid;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) {
            if (line != "training_pairs,gaussians,time_s,snr_db,avg_sd") {
                throw DataError("grid_from_csv: unexpected header: " + line);
            }
            header = false;
            continue;
        }
        const auto fields = csv_split(line);
        if (fields.size() != 5) throw DataError("grid_from_csv: malformed row: " + line);
        ExperimentRow row;
        row.training_pairs = std::stoul(fields[0]);
        row.gaussians = std::stoi(fields[1]);
        if (fields[2].empty()) {
            row.failed = true;
            row.error = fields[4];
        } else {
            row.time_s = std::stod(fields[2]);
            row.snr_db = std::stod(fields[3]);
            row.avg_sd = std::stod(fields[4]);
        }
        grid.rows.push_back(std::move(row));
    }
    if (header) throw DataError("grid_from_csv: empty input");
    return grid;
}

}  // namespace vc
