#pragma once

#include "stlpi/dynamics.hpp"
#include "stlpi/funnels.hpp"
#include "stlpi/stl.hpp"

#include <vector>

namespace stlpi {

enum class Combiner { Simple, Improved };

struct ControllerConfig {
    double K = 1.0;     // gain scale for individual laws
    double Delta = 0.05; // regularization
    GainParams gains;
    double nu = 5.0; // exponential weight decay for the second unicycle stage
    Combiner combiner = Combiner::Improved;
};

// One channel per atomic predicate: the predicate and its funnel.
struct PredicateChannel {
    PredicateDef pred;
    Funnel funnel;
};

// v^T = (d rho / dx) g(x). For the unicycle this is the scalar first-stage
// coefficient built from the position columns of g only. A gradient within
// 1e-9 of the predicate's singular point yields a flagged zero vector.
Eigen::VectorXd v_vector(const SystemModel& model, const PredicateDef& pred,
                         const Eigen::VectorXd& x, bool* singular = nullptr);

// u = kappa(xi) * K / (|v|^2 + Delta) * v; zero above the funnel or at a
// singular gradient.
Eigen::VectorXd individual_control(const ControllerConfig& cfg,
                                   const SystemModel& model,
                                   const PredicateChannel& channel,
                                   const Eigen::VectorXd& x, int t_index);

// alpha_i = max(0, xi_i), normalized to sum 1 (all-zero stays all-zero).
std::vector<double> combination_weights(const std::vector<PredicateChannel>& channels,
                                        const Eigen::VectorXd& x, int t_index);

// Weighted sum of individual laws with unnormalized weights max(0, xi_i).
Eigen::VectorXd simple_combination(const ControllerConfig& cfg,
                                   const SystemModel& model,
                                   const std::vector<PredicateChannel>& channels,
                                   const Eigen::VectorXd& x, int t_index);

// Solves (sum alpha_i v_i v_i^T + Delta I) u = sum alpha_i kappa_i v_i with
// normalized weights (per-channel K = 1).
Eigen::VectorXd improved_combination(const ControllerConfig& cfg,
                                     const SystemModel& model,
                                     const std::vector<PredicateChannel>& channels,
                                     const Eigen::VectorXd& x, int t_index);

// Two-stage nonholonomic law (v, omega) for the unicycle model.
Eigen::VectorXd unicycle_guidance(const ControllerConfig& cfg,
                                  const SystemModel& model,
                                  const std::vector<PredicateChannel>& channels,
                                  const Eigen::VectorXd& x, int t_index);

// Base law dispatch: combination for holonomic models, the two-stage law for
// the unicycle. Stateless; safe for concurrent rollouts.
class GuidingLaw {
public:
    GuidingLaw(const ControllerConfig& cfg, const SystemModel& model,
               std::vector<PredicateChannel> channels)
        : cfg_(cfg), model_(model), channels_(std::move(channels)) {}

    Eigen::VectorXd operator()(const Eigen::VectorXd& x, int t_index) const;

    const std::vector<PredicateChannel>& channels() const { return channels_; }
    std::vector<PredicateChannel>& channels() { return channels_; }

private:
    ControllerConfig cfg_;
    SystemModel model_;
    std::vector<PredicateChannel> channels_;
};

} // namespace stlpi
