#pragma once

#include "stlpi/controllers.hpp"
#include "stlpi/stl.hpp"

#include <utility>
#include <vector>

namespace stlpi {

struct AdaptationConfig {
    double xi_target = 0.8; // transformed robustness the funnel is pulled to
    double beta = 0.2;      // blend aggressiveness
};

// Per-timestep feedforward increments; the applied feedforward is the prefix
// sum k(t) = sum_{tau<=t} theta_tau.
struct PolicyParams {
    std::vector<Eigen::VectorXd> theta; // steps() entries of dim m

    static PolicyParams zeros(int steps, int m);
    int steps() const { return static_cast<int>(theta.size()); }

    // k(t) for all t, as running prefix sums.
    std::vector<Eigen::VectorXd> feedforward() const;
};

// Solves (Gamma~ - rho) / (Gamma~ - gamma~) = xi_target for the chosen mode.
std::pair<double, double> adapt_targets(AdaptMode mode, double gamma, double Gamma,
                                        double rho, double xi_target);

// Exponential blend followed by clipping gamma' into [gamma_lim, rho_min];
// Gamma' is lifted if needed to keep the funnel separated.
std::pair<double, double> blend_and_clip(double gamma, double Gamma,
                                         double gamma_tilde, double Gamma_tilde,
                                         double gamma_lim, double rho_min,
                                         double beta);

// Transfers the base-law difference along the candidate trajectory into the
// feedforward so the pre-saturation total control is unchanged.
PolicyParams compensate_feedforward(const PolicyParams& theta,
                                    const GuidingLaw& base_old,
                                    const GuidingLaw& base_new,
                                    const Trajectory& candidate);

struct AdaptResult {
    std::vector<Funnel> funnels;
    PolicyParams theta;
    std::vector<Eigen::VectorXd> theta_delta; // theta' - theta, per step
};

// Full funnel adaptation pass: retarget every non-frozen funnel toward the
// candidate trajectory's robustness evolution, then compensate the
// feedforward once against old vs new funnels.
AdaptResult adapt(const std::vector<Funnel>& funnels, const PolicyParams& theta,
                  const Trajectory& candidate,
                  const std::vector<PredicateDef>& predicates, double rho_min,
                  const AdaptationConfig& cfg, const ControllerConfig& ctrl_cfg,
                  const SystemModel& model);

} // namespace stlpi
