#pragma once

#include "stlpi/adaptation.hpp"
#include "stlpi/scenarios.hpp"

#include <cstdint>
#include <vector>

namespace stlpi {

// Per-timestep exploration covariances plus the Nesterov lookahead state.
struct ExplorationState {
    std::vector<Eigen::MatrixXd> cov; // steps() symmetric matrices, >= cov_min
    Eigen::MatrixXd cov_min;
    double nesterov_alpha = 1.0;
    PolicyParams theta_prev;
    PolicyParams theta_hat; // sampling/lookahead point
};

struct Pi2Config {
    int N = 100;               // samples per iteration
    int K = 50;                // iterations
    double eps_quantile = 0.5; // nearest-rank quantile for cost normalization
    double h = 3.0;            // normalization range
    double lambda_start = 0.5;
    double lambda_end = 5000.0;
    double cov_init_scale = 2e-4;
    double cov_min_scale = 2e-7;
    bool adapt_funnels = true;
    AdaptationConfig adaptation;
    bool early_exit = false;
    double early_exit_eps = 1e-3;
};

struct IterRecord {
    int k = 0;
    double lambda = 0.0;
    double best_cost = 0.0;   // min C(tau) over the sampled batch
    double best_rho = 0.0;    // max rho^phi over the sampled batch
    double median_J = 0.0;    // median sampled J
    double mean_cost = 0.0;   // C(tau) of the mean-policy rollout
    double mean_rho = 0.0;    // rho^phi of the mean-policy rollout
    std::vector<Funnel> funnels; // snapshot after this iteration's adaptation
};

struct RunResult {
    std::vector<IterRecord> history;
    Trajectory solution; // rollout under theta^(K) with the final funnels
    double final_cost = 0.0;
    double final_rho = 0.0;
    double final_J = 0.0; // final_cost + penalty at lambda_end
    PolicyParams theta;
    std::vector<Funnel> funnels;
};

// lambda * (rho_min - rho)^3 below rho_min, zero otherwise.
double penalty(double rho, double lambda, double rho_min);

// Cosine anneal lo -> hi over K iterations.
double lambda_schedule(int k, int K, double lo, double hi);

// Jbar_i = h * (J_i - min J) / (J_eps - min J) with J_eps the nearest-rank
// eps-quantile; all zeros in the degenerate J_eps == min case.
std::vector<double> normalize_costs(const std::vector<double>& J,
                                    double eps_quantile, double h);

// Softmax of -Jbar.
std::vector<double> weights(const std::vector<double>& Jbar);

// Gaussian draw around theta_hat with the per-step covariances.
PolicyParams sample_params(const PolicyParams& theta_hat,
                           const std::vector<Eigen::MatrixXd>& cov_chol,
                           Rng& rng);

// Probability-weighted parameter mean and covariance scatter with floor.
void update(PolicyParams& theta, ExplorationState& expl,
            const std::vector<PolicyParams>& samples,
            const std::vector<double>& w);

// alpha' = (1 + sqrt(4 alpha^2 + 1)) / 2;
// theta_hat = theta_k + (alpha - 1)(theta_k - theta_km1) / alpha'.
void nesterov_step(double& alpha, const PolicyParams& theta_k,
                   const PolicyParams& theta_km1, PolicyParams& theta_hat);

// The guided PI2 learning loop.
RunResult run(const Scenario& scenario, const Pi2Config& cfg, uint64_t seed);

} // namespace stlpi
