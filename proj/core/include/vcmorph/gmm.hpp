#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <vector>

namespace vc {

enum class CovarianceType { Full, Diagonal };

/// Gaussian mixture over R^dim with floored covariances.
struct Gmm {
    int num_components = 0;
    int dim = 0;
    Eigen::VectorXd weights;
    std::vector<Eigen::VectorXd> means;
    std::vector<Eigen::MatrixXd> covariances;
    CovarianceType cov_type = CovarianceType::Full;

    /// log p(x) under the mixture (log-sum-exp over components).
    double log_density(const Eigen::VectorXd& x) const;

    /// Component responsibilities h_k(x); nonnegative, sum to 1.
    Eigen::VectorXd posterior(const Eigen::VectorXd& x) const;
};

struct EmConfig {
    int num_components = 1;
    int max_iters = 100;
    double tolerance = 1e-6;  // relative change of average log-likelihood
    CovarianceType cov_type = CovarianceType::Full;
    std::uint64_t seed = 0;
    double variance_floor_rel = 1e-6;  // × average feature variance
};

/// k-means++ seeding plus 10 Lloyd iterations; covariances are the floored
/// within-cluster covariances. Deterministic for a fixed seed.
Gmm kmeans_init(const std::vector<Eigen::VectorXd>& data, int num_components,
                std::uint64_t seed, double variance_floor_rel = 1e-6);

struct EmResult {
    Gmm model;
    std::vector<double> avg_loglik;  // per-iteration average log-likelihood
    int iterations = 0;
};

/// EM in the log domain. Average log-likelihood is asserted non-decreasing
/// (1e-9 slack); covariances floored each M-step.
EmResult em_fit(const std::vector<Eigen::VectorXd>& data, const EmConfig& cfg);

/// Mixture over stacked [x; y] vectors with recorded split index, plus the
/// conditional-expectation regression ŷ = Σ_k h_k(x)(μ_y^k + Σ_yx^k Σ_xx^k⁻¹(x − μ_x^k)).
class JointGmm {
public:
    JointGmm() = default;
    /// Precomputes the x-marginal and per-component affine terms.
    /// Throws NumericalError if any Σ_xx is singular.
    JointGmm(Gmm base, int split);

    const Gmm& base() const { return base_; }
    const Gmm& x_marginal() const { return x_marginal_; }
    int split() const { return split_; }

    /// Responsibilities of x under the x-marginal.
    Eigen::VectorXd responsibilities(const Eigen::VectorXd& x) const;

    Eigen::VectorXd regress(const Eigen::VectorXd& x) const;
    Eigen::VectorXd regress(const Eigen::VectorXd& x,
                            Eigen::VectorXd& responsibilities_out) const;

private:
    Gmm base_;
    Gmm x_marginal_;
    int split_ = 0;
    std::vector<Eigen::MatrixXd> reg_;      // Σ_yx Σ_xx⁻¹
    std::vector<Eigen::VectorXd> offset_;   // μ_y − Σ_yx Σ_xx⁻¹ μ_x
};

// Lossless (shortest-round-trip double) JSON serialization.
nlohmann::json gmm_to_json(const Gmm& g);
Gmm gmm_from_json(const nlohmann::json& j);
nlohmann::json joint_gmm_to_json(const JointGmm& j);
JointGmm joint_gmm_from_json(const nlohmann::json& j);

}  // namespace vc
