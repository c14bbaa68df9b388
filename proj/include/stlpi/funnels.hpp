#pragma once

#include <vector>

namespace stlpi {

enum class AdaptMode { Frozen, GammaOnlyFixedGamma, ConstantWidth };

// Robustness funnel gamma(t) <= rho <= Gamma(t), sampled on the simulation
// grid, plus the adaptation floor gamma_lim(t).
struct Funnel {
    std::vector<double> gamma;     // lower bound
    std::vector<double> Gamma;     // upper bound
    std::vector<double> gamma_lim; // adaptation floor
    AdaptMode mode = AdaptMode::Frozen;

    static constexpr double kMinSeparation = 1e-6;

    static Funnel constant(int n_grid, double gamma, double Gamma,
                           double gamma_lim, AdaptMode mode);

    int grid_size() const { return static_cast<int>(gamma.size()); }

    // Checks Gamma >= gamma + eps and gamma_lim <= gamma at every grid point.
    void validate() const;
};

struct GainParams {
    double m = 0.8;       // linear slope
    double theta1 = 2.4;  // sigmoid height
    double theta2 = 24.0; // sigmoid steepness
};

// Normalized violation measure (Gamma - rho) / (Gamma - gamma). Values > 1
// mean the specification rho >= gamma is violated; <= 0 means x lies in the
// uncontrolled region above Gamma.
double xi(const Funnel& f, double rho, int t_index);

// Linear-sigmoid gain m*xi + theta1 / (1 + exp(-theta2*(xi - 1))), clamped to
// 0 for xi <= 0 (no control above the funnel).
double kappa(const GainParams& p, double xi);

} // namespace stlpi
