#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "vcmorph/config.hpp"
#include "vcmorph/conversion.hpp"
#include "vcmorph/corpus.hpp"
#include "vcmorph/errors.hpp"
#include "vcmorph/eval.hpp"
#include "vcmorph/wave.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

// Atomic file write: everything goes to <path>.tmp first.
void save_wav_atomic(const vc::Waveform& w, const std::filesystem::path& path) {
    const auto tmp = path.string() + ".tmp";
    vc::save_wav(w, tmp);
    std::filesystem::rename(tmp, path);
}

void write_text_atomic(const std::string& text, const std::filesystem::path& path) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw vc::DataError("cannot write " + path.string());
        out << text;
        if (!out) throw vc::DataError("short write: " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

vc::CliConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
    vc::CliConfig cfg = vc::parse_config_file(path);
    if (seed) cfg.conversion.seed = *seed;
    return cfg;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              std::optional<std::string> output) {
    const vc::CliConfig cfg = load_config(config_path, seed);
    const vc::ParallelCorpus corpus = vc::ingest_corpus(
        cfg.source_dir, cfg.target_dir, {.limit = std::nullopt, .normalize = cfg.normalize});
    for (const auto& pair : corpus.pairs) {
        if (pair.source.sample_rate != cfg.sample_rate) {
            throw vc::DataError("pair " + pair.id + " has rate " +
                                std::to_string(pair.source.sample_rate) + ", config expects " +
                                std::to_string(cfg.sample_rate));
        }
    }

    vc::TrainReport report;
    const vc::ConversionModel model = vc::train(corpus, cfg.conversion, &report);
    const std::filesystem::path model_path =
        output ? std::filesystem::path(*output) : cfg.model_path;
    vc::save_model(model, model_path);

    std::cout << "model_path=" << model_path.string() << "\n"
              << "pairs_used=" << report.pairs_used << "\n"
              << "training_vectors=" << report.training_vectors << "\n"
              << "gaussians=" << cfg.conversion.em.num_components << "\n"
              << "em_iterations=" << report.em_iterations << "\n"
              << "final_avg_loglik=" << report.final_avg_loglik << "\n";
    return kExitOk;
}

int cmd_convert(const std::string& model_path, const std::string& input,
                const std::string& output) {
    const vc::ConversionModel model = vc::load_model(model_path);
    const vc::Waveform src = vc::load_wav(input);
    const vc::ConvertResult result = vc::convert(model, src);
    save_wav_atomic(result.audio, output);
    std::cout << "output=" << output << "\n"
              << "flagged_frames=" << result.flagged_frames << "\n";
    return kExitOk;
}

int cmd_evaluate(const std::string& converted_path, const std::string& target_path,
                 bool csv) {
    const vc::Waveform converted = vc::load_wav(converted_path);
    const vc::Waveform target = vc::load_wav(target_path);

    vc::EvalReport report;
    report.snr_db = vc::snr_db(target, converted);
    report.avg_spectral_distortion = vc::avg_spectral_distortion(converted, target);

    if (csv) {
        std::printf("snr_db,avg_sd\r\n%.6f,%.6f\r\n", report.snr_db,
                    report.avg_spectral_distortion);
    } else {
        std::printf("snr_db=%.6f\navg_sd=%.6f\n", report.snr_db,
                    report.avg_spectral_distortion);
    }
    return kExitOk;
}

int cmd_experiment(const std::string& config_path, std::optional<std::uint64_t> seed,
                   std::optional<std::string> output) {
    const vc::CliConfig cfg = load_config(config_path, seed);
    const vc::ParallelCorpus corpus = vc::ingest_corpus(
        cfg.source_dir, cfg.target_dir, {.limit = std::nullopt, .normalize = cfg.normalize});

    const vc::ExperimentGrid grid =
        vc::run_experiment(corpus, cfg.experiment_training_pairs, cfg.experiment_gaussians,
                           cfg.experiment_eval_count, cfg.conversion);

    const std::filesystem::path csv_path =
        output ? std::filesystem::path(*output) : cfg.experiment_csv;
    write_text_atomic(vc::grid_to_csv(grid), csv_path);

    std::printf("%-15s %-10s %-10s %-10s %-10s %s\n", "training_pairs", "gaussians", "time_s",
                "snr_db", "avg_sd", "mos_quality");
    for (const auto& row : grid.rows) {
        if (row.failed) {
            std::printf("%-15zu %-10d FAILED: %s\n", row.training_pairs, row.gaussians,
                        row.error.c_str());
        } else {
            // MOS quality needs human listeners; not computable here.
            std::printf("%-15zu %-10d %-10.2f %-10.4f %-10.4f n/a\n", row.training_pairs,
                        row.gaussians, row.time_s, row.snr_db, row.avg_sd);
        }
    }
    std::cout << "csv=" << csv_path.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vcmorph: GMM-based voice conversion with glottal waveform separation"};
    app.require_subcommand(1);

    std::string config_path, model_path, input_path, output_path, target_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_override;
    bool eval_csv = false;

    auto* train_cmd = app.add_subcommand("train", "train a conversion model from a parallel corpus");
    train_cmd->add_option("--config", config_path, "configuration file")->required();
    train_cmd->add_option("--seed", seed, "override the training seed");
    train_cmd->add_option("--output", output_override, "model output path");

    auto* convert_cmd = app.add_subcommand("convert", "convert a source utterance");
    convert_cmd->add_option("--model", model_path, "trained model file")->required();
    convert_cmd->add_option("input", input_path, "source WAV")->required();
    convert_cmd->add_option("output", output_path, "converted WAV")->required();

    auto* evaluate_cmd = app.add_subcommand("evaluate", "objective metrics for a converted/target pair");
    evaluate_cmd->add_option("converted", input_path, "converted WAV")->required();
    evaluate_cmd->add_option("target", target_path, "target recording WAV")->required();
    evaluate_cmd->add_flag("--csv", eval_csv, "emit a CSV row instead of key=value lines");

    auto* experiment_cmd = app.add_subcommand("experiment", "run the training-size × gaussians grid");
    experiment_cmd->add_option("--config", config_path, "configuration file")->required();
    experiment_cmd->add_option("--seed", seed, "override the training seed");
    experiment_cmd->add_option("--output", output_override, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(config_path, seed, output_override);
        if (convert_cmd->parsed()) return cmd_convert(model_path, input_path, output_path);
        if (evaluate_cmd->parsed()) return cmd_evaluate(input_path, target_path, eval_csv);
        if (experiment_cmd->parsed()) return cmd_experiment(config_path, seed, output_override);
    } catch (const vc::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const vc::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const vc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
