#include "stlpi/funnels.hpp"

#include <cmath>
#include <stdexcept>

namespace stlpi {

Funnel Funnel::constant(int n_grid, double gamma, double Gamma, double gamma_lim,
                        AdaptMode mode) {
    Funnel f;
    f.gamma.assign(n_grid, gamma);
    f.Gamma.assign(n_grid, Gamma);
    f.gamma_lim.assign(n_grid, gamma_lim);
    f.mode = mode;
    f.validate();
    return f;
}

void Funnel::validate() const {
    if (gamma.size() != Gamma.size() || gamma.size() != gamma_lim.size())
        throw std::runtime_error("funnel curve sizes disagree");
    for (size_t i = 0; i < gamma.size(); ++i) {
        if (!(Gamma[i] >= gamma[i] + kMinSeparation))
            throw std::runtime_error("funnel violates Gamma >= gamma + eps");
        if (!(gamma_lim[i] <= gamma[i]))
            throw std::runtime_error("funnel violates gamma_lim <= gamma");
    }
}

double xi(const Funnel& f, double rho, int t_index) {
    return (f.Gamma[t_index] - rho) / (f.Gamma[t_index] - f.gamma[t_index]);
}

double kappa(const GainParams& p, double xi) {
    if (xi <= 0.0)
        return 0.0;
    return p.m * xi + p.theta1 / (1.0 + std::exp(-p.theta2 * (xi - 1.0)));
}

} // namespace stlpi
