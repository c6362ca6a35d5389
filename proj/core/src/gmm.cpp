#include "vcmorph/gmm.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>

#include "vcmorph/errors.hpp"

namespace vc {

namespace {

double average_variance(const std::vector<Eigen::VectorXd>& data) {
    const int d = static_cast<int>(data[0].size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& x : data) mean += x;
    mean /= static_cast<double>(data.size());
    double acc = 0.0;
    for (const auto& x : data) acc += (x - mean).squaredNorm();
    return acc / (static_cast<double>(data.size()) * d);
}

// Clamps eigenvalues from below so the matrix stays safely PD.
Eigen::MatrixXd floor_covariance(const Eigen::MatrixXd& cov, double floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

struct ComponentDensity {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double log_norm = 0.0;  // -d/2 log(2π) - 1/2 log|Σ|

    explicit ComponentDensity(const Eigen::MatrixXd& cov) : llt(cov) {
        if (llt.info() != Eigen::Success) {
            throw NumericalError("covariance not positive definite");
        }
        double log_det = 0.0;
        const auto& L = llt.matrixLLT();
        for (int i = 0; i < cov.rows(); ++i) log_det += 2.0 * std::log(L(i, i));
        log_norm = -0.5 * (cov.rows() * std::log(2.0 * std::numbers::pi) + log_det);
    }

    double log_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean) const {
        Eigen::VectorXd diff = x - mean;
        const double maha = llt.matrixL().solve(diff).squaredNorm();
        return log_norm - 0.5 * maha;
    }
};

std::vector<ComponentDensity> make_densities(const Gmm& g) {
    std::vector<ComponentDensity> out;
    out.reserve(g.num_components);
    for (int k = 0; k < g.num_components; ++k) out.emplace_back(g.covariances[k]);
    return out;
}

Eigen::VectorXd log_joint(const Gmm& g, const std::vector<ComponentDensity>& dens,
                          const Eigen::VectorXd& x) {
    Eigen::VectorXd lj(g.num_components);
    for (int k = 0; k < g.num_components; ++k) {
        lj[k] = std::log(std::max(g.weights[k], 1e-300)) + dens[k].log_pdf(x, g.means[k]);
    }
    return lj;
}

double log_sum_exp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

}  // namespace

double Gmm::log_density(const Eigen::VectorXd& x) const {
    const auto dens = make_densities(*this);
    return log_sum_exp(log_joint(*this, dens, x));
}

Eigen::VectorXd Gmm::posterior(const Eigen::VectorXd& x) const {
    const auto dens = make_densities(*this);
    Eigen::VectorXd lj = log_joint(*this, dens, x);
    const double lse = log_sum_exp(lj);
    return (lj.array() - lse).exp();
}

Gmm kmeans_init(const std::vector<Eigen::VectorXd>& data, int num_components,
                std::uint64_t seed, double variance_floor_rel) {
    const int n = static_cast<int>(data.size());
    const int k_count = num_components;
    if (n < k_count) throw DataError("kmeans_init: fewer points than components");
    const int d = static_cast<int>(data[0].size());

    // k-means++ needs K distinct points.
    {
        std::vector<Eigen::VectorXd> distinct;
        for (const auto& x : data) {
            bool found = false;
            for (const auto& y : distinct) {
                if ((x - y).norm() < 1e-14) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                distinct.push_back(x);
                if (static_cast<int>(distinct.size()) >= k_count) break;
            }
        }
        if (static_cast<int>(distinct.size()) < k_count) {
            throw DataError("kmeans_init: fewer than K distinct data points");
        }
    }

    std::mt19937_64 rng(seed);
    std::vector<Eigen::VectorXd> centers;
    centers.reserve(k_count);

    // k-means++ seeding
    centers.push_back(data[rng() % n]);
    std::vector<double> d2(n);
    while (static_cast<int>(centers.size()) < k_count) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) best = std::min(best, (data[i] - c).squaredNorm());
            d2[i] = best;
            total += best;
        }
        double u = std::uniform_real_distribution<double>(0.0, total)(rng);
        int pick = n - 1;
        for (int i = 0; i < n; ++i) {
            u -= d2[i];
            if (u <= 0.0) {
                pick = i;
                break;
            }
        }
        centers.push_back(data[pick]);
    }

    // Lloyd iterations
    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 10; ++iter) {
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int k = 0; k < k_count; ++k) {
                const double dist = (data[i] - centers[k]).squaredNorm();
                if (dist < best) {
                    best = dist;
                    assign[i] = k;
                }
            }
        }
        std::vector<Eigen::VectorXd> sums(k_count, Eigen::VectorXd::Zero(d));
        std::vector<int> counts(k_count, 0);
        for (int i = 0; i < n; ++i) {
            sums[assign[i]] += data[i];
            counts[assign[i]]++;
        }
        for (int k = 0; k < k_count; ++k) {
            if (counts[k] > 0) {
                centers[k] = sums[k] / counts[k];
            } else {
                // revive an empty cluster at the point farthest from its center
                int far = 0;
                double best = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double dist = (data[i] - centers[assign[i]]).squaredNorm();
                    if (dist > best) {
                        best = dist;
                        far = i;
                    }
                }
                centers[k] = data[far];
                assign[far] = k;
            }
        }
    }

    const double floor = variance_floor_rel * average_variance(data);

    Gmm g;
    g.num_components = k_count;
    g.dim = d;
    g.weights.resize(k_count);
    g.means = centers;
    g.covariances.assign(k_count, Eigen::MatrixXd::Zero(d, d));
    std::vector<int> counts(k_count, 0);
    for (int i = 0; i < n; ++i) counts[assign[i]]++;
    for (int k = 0; k < k_count; ++k) {
        g.weights[k] = static_cast<double>(counts[k]) / n;
    }
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd diff = data[i] - centers[assign[i]];
        g.covariances[assign[i]] += diff * diff.transpose();
    }
    for (int k = 0; k < k_count; ++k) {
        if (counts[k] > 0) g.covariances[k] /= counts[k];
        g.covariances[k] = floor_covariance(g.covariances[k], std::max(floor, 1e-12));
    }
    return g;
}

EmResult em_fit(const std::vector<Eigen::VectorXd>& data, const EmConfig& cfg) {
    const int n = static_cast<int>(data.size());
    const int k_count = cfg.num_components;
    if (n < 10 * k_count) {
        std::cerr << "warning: em_fit with only " << n << " points for " << k_count
                  << " components\n";
    }

    EmResult res;
    res.model = kmeans_init(data, k_count, cfg.seed, cfg.variance_floor_rel);
    if (cfg.cov_type == CovarianceType::Diagonal) {
        for (auto& cov : res.model.covariances) {
            const Eigen::VectorXd diag = cov.diagonal();
            cov = diag.asDiagonal();
        }
        res.model.cov_type = CovarianceType::Diagonal;
    }

    const int d = res.model.dim;
    const double floor = cfg.variance_floor_rel * average_variance(data);
    Eigen::MatrixXd resp(n, k_count);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        // E-step
        const auto dens = make_densities(res.model);
        double ll = 0.0;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd lj = log_joint(res.model, dens, data[i]);
            const double lse = log_sum_exp(lj);
            if (!std::isfinite(lse)) {
                throw NumericalError("em_fit: non-finite likelihood at iteration " +
                                     std::to_string(iter));
            }
            resp.row(i) = (lj.array() - lse).exp();
            ll += lse;
        }
        ll /= n;

        if (ll + 1e-9 < prev_ll) {
            throw NumericalError("em_fit: log-likelihood decreased at iteration " +
                                 std::to_string(iter) + " (" + std::to_string(prev_ll) +
                                 " -> " + std::to_string(ll) + ")");
        }
        res.avg_loglik.push_back(ll);
        res.iterations = iter + 1;

        const bool converged =
            iter > 0 && std::fabs(ll - prev_ll) <= cfg.tolerance * (1.0 + std::fabs(prev_ll));
        prev_ll = ll;

        // M-step
        for (int k = 0; k < k_count; ++k) {
            const double nk = resp.col(k).sum();
            res.model.weights[k] = nk / n;
            Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
            for (int i = 0; i < n; ++i) mu += resp(i, k) * data[i];
            mu /= std::max(nk, 1e-300);
            Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
            for (int i = 0; i < n; ++i) {
                const Eigen::VectorXd diff = data[i] - mu;
                cov += resp(i, k) * (diff * diff.transpose());
            }
            cov /= std::max(nk, 1e-300);
            if (cfg.cov_type == CovarianceType::Diagonal) {
                const Eigen::VectorXd diag = cov.diagonal();
                cov = diag.asDiagonal();
            }
            res.model.means[k] = mu;
            res.model.covariances[k] = floor_covariance(cov, std::max(floor, 1e-12));
        }
        res.model.weights /= res.model.weights.sum();

        if (converged) break;
    }
    return res;
}

JointGmm::JointGmm(Gmm base, int split) : base_(std::move(base)), split_(split) {
    const int d = base_.dim;
    const int q = d - split_;
    if (split_ <= 0 || q <= 0) throw DataError("JointGmm: bad split index");

    x_marginal_.num_components = base_.num_components;
    x_marginal_.dim = split_;
    x_marginal_.weights = base_.weights;
    x_marginal_.cov_type = base_.cov_type;
    for (int k = 0; k < base_.num_components; ++k) {
        x_marginal_.means.push_back(base_.means[k].head(split_));
        x_marginal_.covariances.push_back(base_.covariances[k].topLeftCorner(split_, split_));

        const Eigen::MatrixXd sxx = base_.covariances[k].topLeftCorner(split_, split_);
        const Eigen::MatrixXd sxy = base_.covariances[k].topRightCorner(split_, q);
        Eigen::LLT<Eigen::MatrixXd> llt(sxx);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("JointGmm: singular x-covariance in component " +
                                 std::to_string(k));
        }
        const Eigen::MatrixXd reg = llt.solve(sxy).transpose();  // Σ_yx Σ_xx⁻¹
        if (!reg.allFinite()) {
            throw NumericalError("JointGmm: ill-conditioned x-covariance in component " +
                                 std::to_string(k));
        }
        reg_.push_back(reg);
        offset_.push_back(base_.means[k].tail(q) - reg * base_.means[k].head(split_));
    }
}

Eigen::VectorXd JointGmm::responsibilities(const Eigen::VectorXd& x) const {
    return x_marginal_.posterior(x);
}

Eigen::VectorXd JointGmm::regress(const Eigen::VectorXd& x) const {
    Eigen::VectorXd h;
    return regress(x, h);
}

Eigen::VectorXd JointGmm::regress(const Eigen::VectorXd& x,
                                  Eigen::VectorXd& responsibilities_out) const {
    if (static_cast<int>(x.size()) != split_) {
        throw DataError("regress: input dimension " + std::to_string(x.size()) +
                        " != split " + std::to_string(split_));
    }
    responsibilities_out = x_marginal_.posterior(x);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(base_.dim - split_);
    for (int k = 0; k < base_.num_components; ++k) {
        y += responsibilities_out[k] * (offset_[k] + reg_[k] * x);
    }
    if (!y.allFinite()) throw NumericalError("regress: non-finite output");
    return y;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows > 0 ? static_cast<int>(j[0].size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
    return v;
}

}  // namespace

nlohmann::json gmm_to_json(const Gmm& g) {
    nlohmann::json j;
    j["components"] = g.num_components;
    j["dim"] = g.dim;
    j["covariance_type"] = g.cov_type == CovarianceType::Full ? "full" : "diagonal";
    j["weights"] = vector_to_json(g.weights);
    j["means"] = nlohmann::json::array();
    j["covariances"] = nlohmann::json::array();
    for (int k = 0; k < g.num_components; ++k) {
        j["means"].push_back(vector_to_json(g.means[k]));
        j["covariances"].push_back(matrix_to_json(g.covariances[k]));
    }
    return j;
}

Gmm gmm_from_json(const nlohmann::json& j) {
    Gmm g;
    g.num_components = j.at("components").get<int>();
    g.dim = j.at("dim").get<int>();
    g.cov_type = j.at("covariance_type").get<std::string>() == "full" ? CovarianceType::Full
                                                                      : CovarianceType::Diagonal;
    g.weights = vector_from_json(j.at("weights"));
    for (const auto& m : j.at("means")) g.means.push_back(vector_from_json(m));
    for (const auto& c : j.at("covariances")) g.covariances.push_back(matrix_from_json(c));
    if (static_cast<int>(g.means.size()) != g.num_components ||
        static_cast<int>(g.covariances.size()) != g.num_components) {
        throw DataError("gmm_from_json: inconsistent component counts");
    }
    return g;
}

nlohmann::json joint_gmm_to_json(const JointGmm& j) {
    nlohmann::json out;
    out["gmm"] = gmm_to_json(j.base());
    out["split"] = j.split();
    return out;
}

JointGmm joint_gmm_from_json(const nlohmann::json& j) {
    return JointGmm(gmm_from_json(j.at("gmm")), j.at("split").get<int>());
}

}  // namespace vc
