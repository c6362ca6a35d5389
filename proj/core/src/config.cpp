#include "vcmorph/config.hpp"

#include <fstream>
#include <sstream>

#include "vcmorph/errors.hpp"

namespace vc {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw UsageError("config: bad boolean for " + key + ": " + v);
}

template <typename T>
std::vector<T> parse_list(const std::string& v, const std::string& key) {
    std::vector<T> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            if constexpr (std::is_same_v<T, std::size_t>) {
                out.push_back(std::stoul(item));
            } else {
                out.push_back(std::stoi(item));
            }
        } catch (const std::exception&) {
            throw UsageError("config: bad list entry for " + key + ": " + item);
        }
    }
    if (out.empty()) throw UsageError("config: empty list for " + key);
    return out;
}

}  // namespace

CliConfig parse_config_text(const std::string& text) {
    CliConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;

    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            if (section != "corpus" && section != "features" && section != "model" &&
                section != "em" && section != "output" && section != "experiment") {
                throw UsageError("config line " + std::to_string(lineno) +
                                 ": unknown section [" + section + "]");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        try {
            if (key == "corpus.source_dir") {
                cfg.source_dir = val;
            } else if (key == "corpus.target_dir") {
                cfg.target_dir = val;
            } else if (key == "corpus.sample_rate") {
                cfg.sample_rate = std::stoi(val);
            } else if (key == "corpus.pair_limit") {
                cfg.pair_limit = std::stoul(val);
                cfg.conversion.pair_limit = cfg.pair_limit;
            } else if (key == "corpus.normalize") {
                cfg.normalize = parse_bool(val, key);
            } else if (key == "features.lpc_order") {
                cfg.conversion.features.lpc_order = std::stoi(val);
            } else if (key == "features.include_gain") {
                cfg.conversion.features.include_gain = parse_bool(val, key);
            } else if (key == "model.gaussians") {
                cfg.conversion.em.num_components = std::stoi(val);
            } else if (key == "model.excitation") {
                if (val == "predicted") {
                    cfg.conversion.excitation = ExcitationMode::Predicted;
                } else if (val == "passthrough") {
                    cfg.conversion.excitation = ExcitationMode::Passthrough;
                } else {
                    throw UsageError("config: excitation must be predicted|passthrough");
                }
            } else if (key == "model.seed") {
                cfg.conversion.seed = std::stoull(val);
            } else if (key == "em.max_iters") {
                cfg.conversion.em.max_iters = std::stoi(val);
            } else if (key == "em.tolerance") {
                cfg.conversion.em.tolerance = std::stod(val);
            } else if (key == "em.variance_floor") {
                cfg.conversion.em.variance_floor_rel = std::stod(val);
            } else if (key == "em.covariance") {
                if (val == "full") {
                    cfg.conversion.em.cov_type = CovarianceType::Full;
                } else if (val == "diagonal") {
                    cfg.conversion.em.cov_type = CovarianceType::Diagonal;
                } else {
                    throw UsageError("config: covariance must be full|diagonal");
                }
            } else if (key == "output.model_path") {
                cfg.model_path = val;
            } else if (key == "output.output_dir") {
                cfg.output_dir = val;
            } else if (key == "output.verbosity") {
                cfg.verbosity = std::stoi(val);
            } else if (key == "experiment.training_pairs") {
                cfg.experiment_training_pairs = parse_list<std::size_t>(val, key);
            } else if (key == "experiment.gaussians") {
                cfg.experiment_gaussians = parse_list<int>(val, key);
            } else if (key == "experiment.eval_count") {
                cfg.experiment_eval_count = std::stoul(val);
            } else if (key == "experiment.csv_path") {
                cfg.experiment_csv = val;
            } else {
                throw UsageError("config line " + std::to_string(lineno) + ": unknown key " + key);
            }
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception& e) {
            throw UsageError("config line " + std::to_string(lineno) + ": bad value for " + key +
                             ": " + val);
        }
    }

    if (cfg.conversion.em.num_components < 1 || cfg.conversion.em.max_iters < 1 ||
        cfg.conversion.features.lpc_order < 1) {
        throw UsageError("config: counts must be positive");
    }
    return cfg;
}

CliConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace vc
