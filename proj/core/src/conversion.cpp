#include "vcmorph/conversion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>

#include "vcmorph/errors.hpp"

namespace vc {

double rms(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc / x.size());
}

std::vector<double> resample_to(std::span<const double> x, int length) {
    std::vector<double> out(length);
    if (x.empty() || length <= 0) return out;
    if (x.size() == 1) {
        std::fill(out.begin(), out.end(), x[0]);
        return out;
    }
    const double scale = static_cast<double>(x.size() - 1) / std::max(1, length - 1);
    for (int i = 0; i < length; ++i) {
        const double pos = i * scale;
        const int lo = std::min(static_cast<int>(pos), static_cast<int>(x.size()) - 2);
        const double frac = pos - lo;
        out[i] = x[lo] * (1.0 - frac) + x[lo + 1] * frac;
    }
    return out;
}

namespace {

constexpr double kSilenceRms = 1e-9;

// Raised-cosine analysis/overlap weight: rises over the first half of the
// frame and falls over the second, so one-period-overlapped voiced frames
// sum to ~1.
double frame_weight(int i, int len) {
    const int half = len / 2;
    double t;
    if (i < half) {
        t = (i + 0.5) / half;
    } else {
        t = (len - i - 0.5) / (len - half);
    }
    const double s = std::sin(0.5 * std::numbers::pi * std::clamp(t, 0.0, 1.0));
    return s * s;
}

Eigen::VectorXd frame_feature(const AnalysisFrame& f, const FeatureConfig& fc) {
    const LsfVector lsf = lpc_to_lsf(*f.lpc);
    const int p = lsf.order();
    Eigen::VectorXd v(fc.include_gain ? p + 1 : p);
    for (int i = 0; i < p; ++i) v[i] = lsf.freqs[i];
    if (fc.include_gain) v[p] = std::log(std::max(f.lpc->gain, 1e-12));
    return v;
}

}  // namespace

UtteranceAnalysis analyze_utterance(const Waveform& w, const ConversionConfig& cfg) {
    UtteranceAnalysis ua;
    ua.track = estimate_pitch(w, cfg.pitch);
    ua.marks = detect_gci(w, ua.track, cfg.gci);
    ua.frames = frame_pitch_synchronous(w, ua.marks, ua.track, cfg.framing);

    const int order = cfg.features.lpc_order;
    for (std::size_t i = 0; i < ua.frames.size(); ++i) {
        AnalysisFrame& f = ua.frames[i];
        if (rms(f.samples) < kSilenceRms) {
            f.lpc = LpcModel{order, std::vector<double>(order, 0.0), 0.0};
            f.residual = std::vector<double>(f.samples.size(), 0.0);
            continue;
        }
        if (f.length() <= order) {
            // gap frame too short to analyze: keep it, but flag as unusable
            f.lpc = LpcModel{order, std::vector<double>(order, 0.0), 0.0};
            f.residual = f.samples;
            continue;
        }
        if (f.voiced) {
            f.lpc = closed_phase_lpc(w, f, order, cfg.closed_phase).model;
        } else {
            f.lpc = full_frame_lpc(w, f, order);
        }
        f.residual = separate_glottal(w, f, *f.lpc);

        if (f.lpc->gain <= kSilenceRms) continue;
        try {
            ua.features.frames.push_back(frame_feature(f, cfg.features));
        } catch (const NumericalError&) {
            continue;  // unconvertible frame: excluded from features
        }
        ua.features.timing.push_back(f.start);
        ua.features.voiced.push_back(f.voiced);
        ua.frame_index.push_back(static_cast<int>(i));
    }
    return ua;
}

ConversionModel train(const ParallelCorpus& corpus, const ConversionConfig& cfg,
                      TrainReport* report) {
    if (corpus.pairs.empty()) throw DataError("train: empty corpus");
    std::size_t n_pairs = corpus.pairs.size();
    if (cfg.pair_limit > 0) n_pairs = std::min(n_pairs, cfg.pair_limit);

    const int proto_len = cfg.prototype_length;
    std::vector<Eigen::VectorXd> stacked;
    // Per training vector: length-normalized unit-RMS target residual, its
    // pitch period and residual RMS (voiced pairs only; index kept parallel).
    std::vector<Eigen::VectorXd> tgt_residuals;
    std::vector<double> tgt_periods, tgt_gains;
    std::vector<bool> is_voiced_vec;

    for (std::size_t pi = 0; pi < n_pairs; ++pi) {
        const auto& pair = corpus.pairs[pi];
        const UtteranceAnalysis src = analyze_utterance(pair.source, cfg);
        const UtteranceAnalysis tgt = analyze_utterance(pair.target, cfg);
        if (src.features.empty() || tgt.features.empty()) {
            std::cerr << "warning: pair " << pair.id << " yields no features, skipped\n";
            continue;
        }
        const WarpPath path = dtw_align(src.features, tgt.features, cfg.dtw);
        for (const auto& [i, j] : path.pairs) {
            // cross-class pairs are excluded from training
            if (src.features.voiced[i] != tgt.features.voiced[j]) continue;
            if (!src.features.voiced[i]) continue;  // the mapping is trained on voiced speech

            Eigen::VectorXd z(src.features.dim() * 2);
            z.head(src.features.dim()) = src.features.frames[i];
            z.tail(tgt.features.dim()) = tgt.features.frames[j];
            stacked.push_back(std::move(z));

            const AnalysisFrame& tf = tgt.frames[tgt.frame_index[j]];
            const auto res = resample_to(*tf.residual, proto_len);
            const double r = rms(res);
            Eigen::VectorXd rn = Eigen::Map<const Eigen::VectorXd>(res.data(), proto_len);
            if (r > 1e-12) rn /= r;
            tgt_residuals.push_back(std::move(rn));
            tgt_periods.push_back(tf.pitch_period);
            tgt_gains.push_back(rms(*tf.residual));
        }
    }

    const int k_count = cfg.em.num_components;
    if (static_cast<int>(stacked.size()) < 10 * k_count) {
        throw DataError("train: only " + std::to_string(stacked.size()) +
                        " aligned voiced vector pairs, need at least " +
                        std::to_string(10 * k_count));
    }

    EmConfig em_cfg = cfg.em;
    em_cfg.seed = cfg.em.seed ^ cfg.seed;
    const EmResult em = em_fit(stacked, em_cfg);

    const int feat_dim = static_cast<int>(stacked[0].size()) / 2;

    ConversionModel model;
    model.joint = JointGmm(em.model, feat_dim);
    model.features = cfg.features;
    model.excitation = cfg.excitation;
    model.sample_rate = corpus.pairs[0].source.sample_rate;
    model.lsf_min_gap = cfg.lsf_min_gap;

    // Excitation prototypes: responsibility-weighted averages of the
    // length-normalized target residuals.
    std::vector<Eigen::VectorXd> proto(k_count, Eigen::VectorXd::Zero(proto_len));
    std::vector<double> wsum(k_count, 0.0), period(k_count, 0.0), gain(k_count, 0.0);
    Eigen::VectorXd global = Eigen::VectorXd::Zero(proto_len);
    double global_period = 0.0, global_gain = 0.0;

    for (std::size_t i = 0; i < stacked.size(); ++i) {
        const Eigen::VectorXd h = model.joint.base().posterior(stacked[i]);
        for (int k = 0; k < k_count; ++k) {
            proto[k] += h[k] * tgt_residuals[i];
            period[k] += h[k] * tgt_periods[i];
            gain[k] += h[k] * tgt_gains[i];
            wsum[k] += h[k];
        }
        global += tgt_residuals[i];
        global_period += tgt_periods[i];
        global_gain += tgt_gains[i];
    }
    const double n_vec = static_cast<double>(stacked.size());
    global /= n_vec;
    global_period /= n_vec;
    global_gain /= n_vec;

    for (int k = 0; k < k_count; ++k) {
        Eigen::VectorXd p = wsum[k] > 1e-8 ? Eigen::VectorXd(proto[k] / wsum[k]) : global;
        const double r = std::sqrt(p.squaredNorm() / proto_len);
        if (r > 1e-12) p /= r;
        model.prototypes.push_back(std::move(p));
        model.prototype_period.push_back(wsum[k] > 1e-8 ? period[k] / wsum[k] : global_period);
        model.prototype_gain.push_back(wsum[k] > 1e-8 ? gain[k] / wsum[k] : global_gain);
    }

    if (report) {
        report->pairs_used = n_pairs;
        report->training_vectors = stacked.size();
        report->final_avg_loglik = em.avg_loglik.back();
        report->em_iterations = em.iterations;
    }
    return model;
}

std::vector<double> predict_excitation(const ConversionModel& model,
                                       const Eigen::VectorXd& responsibilities,
                                       const std::vector<double>& source_residual,
                                       int pitch_period) {
    if (pitch_period <= 0) throw DataError("predict_excitation: pitch_period must be > 0");
    const int proto_len = static_cast<int>(model.prototypes[0].size());
    Eigen::VectorXd blend = Eigen::VectorXd::Zero(proto_len);
    for (std::size_t k = 0; k < model.prototypes.size(); ++k) {
        blend += responsibilities[static_cast<int>(k)] * model.prototypes[k];
    }
    std::vector<double> e =
        resample_to(std::span<const double>(blend.data(), proto_len), 2 * pitch_period);
    const double r = rms(e);
    if (r > 1e-12) {
        const double target = rms(source_residual);
        for (double& v : e) v *= target / r;
    }
    return e;
}

ConvertResult convert(const ConversionModel& model, const Waveform& src,
                      const ConversionConfig& cfg_in) {
    if (src.sample_rate != model.sample_rate) {
        throw DataError("convert: sample rate " + std::to_string(src.sample_rate) +
                        " does not match model rate " + std::to_string(model.sample_rate));
    }

    ConversionConfig cfg = cfg_in;
    cfg.features = model.features;

    const UtteranceAnalysis ua = analyze_utterance(src, cfg);
    const int n = static_cast<int>(src.samples.size());

    std::vector<double> num(n, 0.0), den(n, 0.0);
    ConvertResult result;

    // features are sparse over frames; map back
    std::vector<int> feature_of_frame(ua.frames.size(), -1);
    for (std::size_t fi = 0; fi < ua.frame_index.size(); ++fi) {
        feature_of_frame[ua.frame_index[fi]] = static_cast<int>(fi);
    }

    auto add_frame = [&](const AnalysisFrame& f, const std::vector<double>& y) {
        const int len = std::min<int>(static_cast<int>(y.size()), n - f.start);
        for (int i = 0; i < len; ++i) {
            const double w = frame_weight(i, static_cast<int>(y.size()));
            num[f.start + i] += w * y[i];
            den[f.start + i] += w;
        }
    };
    auto history_before = [&](int start, int p) {
        std::vector<double> h(p, 0.0);
        for (int i = 0; i < p; ++i) {
            const int idx = start - p + i;
            if (idx >= 0 && den[idx] > 1e-6) h[i] = num[idx] / den[idx];
        }
        return h;
    };

    for (std::size_t i = 0; i < ua.frames.size(); ++i) {
        const AnalysisFrame& f = ua.frames[i];
        const int feat = feature_of_frame[i];

        if (rms(f.samples) < kSilenceRms) {
            add_frame(f, std::vector<double>(f.samples.size(), 0.0));
            continue;
        }
        if (feat < 0) {
            // unconvertible frame: source passthrough
            add_frame(f, f.samples);
            ++result.flagged_frames;
            continue;
        }

        try {
            Eigen::VectorXd h;
            const Eigen::VectorXd x = ua.features.frames[feat];
            const Eigen::VectorXd yhat =
                model.joint.regress(x.head(model.joint.split()), h);

            const int p = model.features.lpc_order;
            std::vector<double> freqs(yhat.data(), yhat.data() + p);
            const LsfVector lsf = enforce_lsf_ordering(std::move(freqs), model.lsf_min_gap);
            // ordering makes the rebuilt filter stable; the radius cap keeps
            // regression outliers from ringing audibly when synthesized
            const LpcModel converted =
                cap_pole_radius(lsf_to_lpc(lsf, f.lpc->gain), 0.99);

            std::vector<double> excitation;
            if (f.voiced && model.excitation == ExcitationMode::Predicted) {
                excitation = predict_excitation(model, h, *f.residual, f.pitch_period);
                if (static_cast<int>(excitation.size()) != f.length()) {
                    excitation = resample_to(excitation, f.length());
                }
            } else {
                excitation = *f.residual;
            }

            const auto hist = history_before(f.start, p);
            const auto y = synthesize(converted, excitation, hist);
            add_frame(f, y);
        } catch (const NumericalError&) {
            add_frame(f, f.samples);
            ++result.flagged_frames;
        }
    }

    result.audio.sample_rate = src.sample_rate;
    result.audio.samples.resize(n, 0.0);
    for (int i = 0; i < n; ++i) {
        result.audio.samples[i] = den[i] > 1e-6 ? num[i] / den[i] : 0.0;
    }

    // match the source peak
    double src_peak = 0.0, out_peak = 0.0;
    for (double v : src.samples) src_peak = std::max(src_peak, std::fabs(v));
    for (double v : result.audio.samples) out_peak = std::max(out_peak, std::fabs(v));
    if (out_peak > 1e-12 && src_peak > 0.0) {
        const double s = src_peak / out_peak;
        for (double& v : result.audio.samples) v *= s;
    }
    return result;
}

void save_model(const ConversionModel& model, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "vcmorph-model";
    j["version"] = ConversionModel::kFormatVersion;
    j["sample_rate"] = model.sample_rate;
    j["excitation"] =
        model.excitation == ExcitationMode::Predicted ? "predicted" : "passthrough";
    j["lpc_order"] = model.features.lpc_order;
    j["include_gain"] = model.features.include_gain;
    j["lsf_min_gap"] = model.lsf_min_gap;
    j["joint"] = joint_gmm_to_json(model.joint);
    j["prototype_period"] = model.prototype_period;
    j["prototype_gain"] = model.prototype_gain;
    j["prototypes"] = nlohmann::json::array();
    for (const auto& p : model.prototypes) {
        nlohmann::json row = nlohmann::json::array();
        for (int i = 0; i < p.size(); ++i) row.push_back(p[i]);
        j["prototypes"].push_back(std::move(row));
    }

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw DataError("cannot write model file: " + path.string());
        out << j.dump(1) << "\n";
        if (!out) throw DataError("short write: " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

ConversionModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("corrupt model file " + path.string() + ": " + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "vcmorph-model") {
            throw DataError("not a vcmorph model: " + path.string());
        }
        if (j.at("version").get<int>() != ConversionModel::kFormatVersion) {
            throw DataError("incompatible model version " +
                            std::to_string(j.at("version").get<int>()) + " in " + path.string());
        }
        ConversionModel model;
        model.sample_rate = j.at("sample_rate").get<int>();
        model.excitation = j.at("excitation").get<std::string>() == "predicted"
                               ? ExcitationMode::Predicted
                               : ExcitationMode::Passthrough;
        model.features.lpc_order = j.at("lpc_order").get<int>();
        model.features.include_gain = j.at("include_gain").get<bool>();
        model.lsf_min_gap = j.at("lsf_min_gap").get<double>();
        model.joint = joint_gmm_from_json(j.at("joint"));
        model.prototype_period = j.at("prototype_period").get<std::vector<double>>();
        model.prototype_gain = j.at("prototype_gain").get<std::vector<double>>();
        for (const auto& row : j.at("prototypes")) {
            Eigen::VectorXd p(row.size());
            for (std::size_t i = 0; i < row.size(); ++i) {
                p[static_cast<int>(i)] = row[i].get<double>();
            }
            model.prototypes.push_back(std::move(p));
        }
        if (model.prototypes.size() !=
            static_cast<std::size_t>(model.joint.base().num_components)) {
            throw DataError("model prototypes inconsistent with component count");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("corrupt model file " + path.string() + ": " + e.what());
    }
}

}  // namespace vc
