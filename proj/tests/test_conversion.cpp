#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "support/synth.hpp"
#include "vcmorph/conversion.hpp"
#include "vcmorph/errors.hpp"
#include "vcmorph/eval.hpp"

using namespace vc;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) {
        path = std::filesystem::temp_directory_path() / ("vcmorph_" + name);
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

ParallelCorpus self_corpus(int n_utts) {
    // target == source: the mapping to learn is the identity
    ParallelCorpus c;
    const auto voice = vctest::speaker_a();
    for (int i = 0; i < n_utts; ++i) {
        UtterancePair p;
        p.id = "u" + std::to_string(i);
        p.source = vctest::synth_utterance(voice, 100 + i);
        p.target = p.source;
        c.pairs.push_back(std::move(p));
    }
    return c;
}

ParallelCorpus cross_corpus(int n_utts) {
    ParallelCorpus c;
    const auto a = vctest::speaker_a();
    const auto b = vctest::speaker_b();
    for (int i = 0; i < n_utts; ++i) {
        UtterancePair p;
        p.id = "u" + std::to_string(i);
        p.source = vctest::synth_utterance(a, 300 + i);
        p.target = vctest::synth_utterance(b, 300 + i);
        c.pairs.push_back(std::move(p));
    }
    return c;
}

}  // namespace

TEST_CASE("analyze_utterance produces aligned features and frames") {
    auto w = vctest::synth_utterance(vctest::speaker_a(), 7);
    // append a fricative-like noise burst so the analysis sees unvoiced
    // material as well (the utterance generator itself is all-voiced)
    {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> noise(0.0, 0.05);
        for (int i = 0; i < w.sample_rate / 5; ++i) w.samples.push_back(noise(rng));
    }
    ConversionConfig cfg;
    const auto a = analyze_utterance(w, cfg);
    REQUIRE(!a.frames.empty());
    REQUIRE(!a.features.empty());
    REQUIRE(a.frame_index.size() == a.features.size());
    const int want_dim = cfg.features.lpc_order + (cfg.features.include_gain ? 1 : 0);
    CHECK(a.features.dim() == want_dim);
    for (std::size_t i = 0; i < a.features.size(); ++i) {
        const auto& f = a.frames[a.frame_index[i]];
        CHECK(a.features.voiced[i] == f.voiced);
        CHECK(a.features.timing[i] == f.start);
        REQUIRE(f.lpc.has_value());
        REQUIRE(f.residual.has_value());
        // feature vector is the LSF of the frame model
        const auto lsf = lpc_to_lsf(*f.lpc);
        for (int k = 0; k < cfg.features.lpc_order; ++k) {
            CHECK(a.features.frames[i][k] == doctest::Approx(lsf.freqs[k]));
        }
    }
    // both voiced and unvoiced material present
    bool any_voiced = false, any_unvoiced = false;
    for (bool v : a.features.voiced) (v ? any_voiced : any_unvoiced) = true;
    CHECK(any_voiced);
    CHECK(any_unvoiced);
}

TEST_CASE("analyze_utterance on silence yields only silent frames") {
    Waveform w{std::vector<double>(8000, 0.0), 16000};
    ConversionConfig cfg;
    const auto a = analyze_utterance(w, cfg);
    CHECK(a.features.empty());  // silent frames carry no usable model
}

TEST_CASE("train fits a joint model and prototypes") {
    ConversionConfig cfg;
    cfg.em.num_components = 2;
    cfg.features.lpc_order = 12;
    TrainReport report;
    const auto model = train(cross_corpus(3), cfg, &report);
    CHECK(report.pairs_used == 3);
    CHECK(report.training_vectors >= 20);
    CHECK(report.em_iterations >= 1);
    CHECK(model.joint.base().num_components == 2);
    CHECK(model.joint.split() == 12);
    REQUIRE(model.prototypes.size() == 2);
    for (int k = 0; k < 2; ++k) {
        REQUIRE(model.prototypes[k].size() == cfg.prototype_length);
        // prototypes are stored at unit RMS
        CHECK(rms({model.prototypes[k].data(),
                   static_cast<std::size_t>(model.prototypes[k].size())}) ==
              doctest::Approx(1.0).epsilon(1e-9));
        CHECK(model.prototype_period[k] > 0.0);
        CHECK(model.prototype_gain[k] > 0.0);
    }
    CHECK(model.sample_rate == 16000);
}

TEST_CASE("train rejects an undersized corpus") {
    ConversionConfig cfg;
    cfg.em.num_components = 64;
    CHECK_THROWS_AS(train(self_corpus(1), cfg), DataError);
}

TEST_CASE("self-conversion reconstructs the source waveform") {
    ConversionConfig cfg;
    cfg.em.num_components = 1;
    cfg.features.lpc_order = 14;
    cfg.excitation = ExcitationMode::Passthrough;
    const auto corpus = self_corpus(4);
    const auto model = train(corpus, cfg);

    const auto& src = corpus.pairs[0].source;
    const auto res = convert(model, src, cfg);
    REQUIRE(res.audio.size() == src.size());
    CHECK(res.audio.sample_rate == src.sample_rate);
    CHECK(snr_db(src, res.audio) >= 15.0);
}

TEST_CASE("convert of silence is silence") {
    ConversionConfig cfg;
    cfg.em.num_components = 1;
    const auto model = train(cross_corpus(2), cfg);
    Waveform silence{std::vector<double>(6400, 0.0), 16000};
    const auto res = convert(model, silence, cfg);
    REQUIRE(res.audio.size() == silence.size());
    for (double v : res.audio.samples) CHECK(v == 0.0);
}

TEST_CASE("convert output stays bounded and finite") {
    ConversionConfig cfg;
    cfg.em.num_components = 3;
    const auto model = train(cross_corpus(4), cfg);
    const auto src = vctest::synth_utterance(vctest::speaker_a(), 900);
    const auto res = convert(model, src, cfg);
    REQUIRE(res.audio.size() == src.size());
    double peak = 0.0;
    for (double v : res.audio.samples) {
        REQUIRE(std::isfinite(v));
        peak = std::max(peak, std::fabs(v));
    }
    CHECK(peak <= 1.0);
    CHECK(peak > 0.01);
    CHECK(res.flagged_frames < 1000);
}

TEST_CASE("predict_excitation blends prototypes and matches source energy") {
    ConversionModel model;
    model.prototypes.resize(2);
    const int n = 8;
    Eigen::VectorXd p0(n), p1(n);
    for (int i = 0; i < n; ++i) {
        p0[i] = (i % 2 == 0) ? 1.0 : -1.0;  // unit RMS square wave
        p1[i] = (i < n / 2) ? 1.0 : -1.0;
    }
    model.prototypes[0] = p0;
    model.prototypes[1] = p1;
    model.prototype_period = {8.0, 8.0};
    model.prototype_gain = {1.0, 1.0};

    Eigen::VectorXd h(2);

    SUBCASE("single responsibility returns that prototype") {
        h << 1.0, 0.0;
        const std::vector<double> residual(8, 2.0);  // RMS 2
        const auto e = predict_excitation(model, h, residual, 4);
        REQUIRE(static_cast<int>(e.size()) == 8);  // 2 * T0
        CHECK(rms(e) == doctest::Approx(2.0).epsilon(1e-9));
        // same length as the prototype: resampling is the identity
        for (int i = 0; i < 8; ++i) CHECK(e[i] == doctest::Approx(2.0 * p0[i]).epsilon(1e-9));
    }

    SUBCASE("equal responsibilities average the prototypes") {
        h << 0.5, 0.5;
        const std::vector<double> residual(8, 1.0);
        const auto e = predict_excitation(model, h, residual, 4);
        Eigen::VectorXd blend = 0.5 * p0 + 0.5 * p1;
        const double brms = std::sqrt(blend.squaredNorm() / n);
        for (int i = 0; i < 8; ++i) {
            CHECK(e[i] == doctest::Approx(blend[i] / brms).epsilon(1e-9));
        }
    }

    SUBCASE("output length tracks the requested pitch period") {
        h << 1.0, 0.0;
        const std::vector<double> residual(40, 1.0);
        CHECK(predict_excitation(model, h, residual, 20).size() == 40);
        CHECK(predict_excitation(model, h, residual, 5).size() == 10);
    }
}

TEST_CASE("resample_to endpoints and linearity") {
    const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
    const auto y = resample_to(x, 7);
    REQUIRE(y.size() == 7);
    CHECK(y.front() == doctest::Approx(0.0));
    CHECK(y.back() == doctest::Approx(3.0));
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y[i] == doctest::Approx(3.0 * i / 6.0));  // linear ramp stays linear
    }
    CHECK(resample_to(x, 4) == x);
}

TEST_CASE("model save/load round trip preserves behavior exactly") {
    TempDir dir("model_rt");
    ConversionConfig cfg;
    cfg.em.num_components = 2;
    cfg.features.lpc_order = 10;
    const auto model = train(cross_corpus(3), cfg);
    const auto path = dir.path / "model.json";
    save_model(model, path);
    const auto back = load_model(path);

    CHECK(back.sample_rate == model.sample_rate);
    CHECK(back.excitation == model.excitation);
    CHECK(back.features.lpc_order == model.features.lpc_order);
    CHECK(back.features.include_gain == model.features.include_gain);
    CHECK(back.lsf_min_gap == model.lsf_min_gap);
    REQUIRE(back.prototypes.size() == model.prototypes.size());
    for (std::size_t k = 0; k < model.prototypes.size(); ++k) {
        CHECK((back.prototypes[k] - model.prototypes[k]).norm() == 0.0);
        CHECK(back.prototype_period[k] == model.prototype_period[k]);
        CHECK(back.prototype_gain[k] == model.prototype_gain[k]);
    }

    const auto src = vctest::synth_utterance(vctest::speaker_a(), 55);
    const auto a = convert(model, src, cfg);
    const auto b = convert(back, src, cfg);
    REQUIRE(a.audio.size() == b.audio.size());
    for (std::size_t i = 0; i < a.audio.size(); ++i) {
        CHECK(a.audio.samples[i] == b.audio.samples[i]);
    }
}

TEST_CASE("load_model rejects damaged files") {
    TempDir dir("model_bad");
    const auto path = dir.path / "model.json";
    {
        std::ofstream out(path);
        out << "{\"format\": \"vcmorph-model\", \"version\": 1";  // truncated
    }
    CHECK_THROWS_AS(load_model(path), DataError);
    {
        std::ofstream out(path);
        out << "{\"format\": \"something-else\", \"version\": 1}";
    }
    CHECK_THROWS_AS(load_model(path), DataError);
    CHECK_THROWS_AS(load_model(dir.path / "missing.json"), DataError);
}

TEST_CASE("training and conversion are deterministic for a fixed seed") {
    ConversionConfig cfg;
    cfg.em.num_components = 2;
    cfg.seed = 77;
    const auto corpus = cross_corpus(3);
    const auto m1 = train(corpus, cfg);
    const auto m2 = train(corpus, cfg);
    const auto src = vctest::synth_utterance(vctest::speaker_a(), 42);
    const auto a = convert(m1, src, cfg);
    const auto b = convert(m2, src, cfg);
    REQUIRE(a.audio.size() == b.audio.size());
    for (std::size_t i = 0; i < a.audio.size(); ++i) {
        CHECK(a.audio.samples[i] == b.audio.samples[i]);
    }
    CHECK(a.flagged_frames == b.flagged_frames);
}
