#include "stlpi/adaptation.hpp"

#include <algorithm>
#include <stdexcept>

namespace stlpi {

PolicyParams PolicyParams::zeros(int steps, int m) {
    PolicyParams p;
    p.theta.assign(steps, Eigen::VectorXd::Zero(m));
    return p;
}

std::vector<Eigen::VectorXd> PolicyParams::feedforward() const {
    std::vector<Eigen::VectorXd> k(theta.size());
    Eigen::VectorXd acc;
    for (size_t t = 0; t < theta.size(); ++t) {
        acc = (t == 0) ? theta[0] : Eigen::VectorXd(acc + theta[t]);
        k[t] = acc;
    }
    return k;
}

std::pair<double, double> adapt_targets(AdaptMode mode, double gamma, double Gamma,
                                        double rho, double xi_target) {
    switch (mode) {
    case AdaptMode::GammaOnlyFixedGamma:
        return {Gamma - (Gamma - rho) / xi_target, Gamma};
    case AdaptMode::ConstantWidth: {
        double width = Gamma - gamma;
        double Gamma_tilde = rho + xi_target * width;
        return {Gamma_tilde - width, Gamma_tilde};
    }
    case AdaptMode::Frozen:
        break;
    }
    throw std::runtime_error("adapt_targets called on a frozen funnel");
}

std::pair<double, double> blend_and_clip(double gamma, double Gamma,
                                         double gamma_tilde, double Gamma_tilde,
                                         double gamma_lim, double rho_min,
                                         double beta) {
    double g = beta * gamma_tilde + (1.0 - beta) * gamma;
    double G = beta * Gamma_tilde + (1.0 - beta) * Gamma;
    g = std::clamp(g, gamma_lim, rho_min);
    G = std::max(G, g + Funnel::kMinSeparation);
    return {g, G};
}

PolicyParams compensate_feedforward(const PolicyParams& theta,
                                    const GuidingLaw& base_old,
                                    const GuidingLaw& base_new,
                                    const Trajectory& candidate) {
    if (candidate.steps() != theta.steps())
        throw std::runtime_error("candidate trajectory grid mismatch");
    PolicyParams out = theta;
    Eigen::VectorXd delta_prev = Eigen::VectorXd::Zero(theta.theta.empty() ? 0 : theta.theta[0].size());
    for (int t = 0; t < theta.steps(); ++t) {
        const Eigen::VectorXd& x = candidate.states[t];
        Eigen::VectorXd delta = base_old(x, t) - base_new(x, t);
        out.theta[t] += delta - delta_prev;
        delta_prev = std::move(delta);
    }
    return out;
}

AdaptResult adapt(const std::vector<Funnel>& funnels, const PolicyParams& theta,
                  const Trajectory& candidate,
                  const std::vector<PredicateDef>& predicates, double rho_min,
                  const AdaptationConfig& cfg, const ControllerConfig& ctrl_cfg,
                  const SystemModel& model) {
    if (funnels.size() != predicates.size())
        throw std::runtime_error("funnel/predicate count mismatch");

    AdaptResult res;
    res.funnels = funnels;
    bool any_adapted = false;
    for (size_t i = 0; i < funnels.size(); ++i) {
        Funnel& f = res.funnels[i];
        if (f.mode == AdaptMode::Frozen)
            continue;
        any_adapted = true;
        for (int t = 0; t < f.grid_size(); ++t) {
            double rho = predicates[i].value(candidate.states[std::min(
                t, static_cast<int>(candidate.states.size()) - 1)]);
            auto [gt, Gt] =
                adapt_targets(f.mode, f.gamma[t], f.Gamma[t], rho, cfg.xi_target);
            std::tie(f.gamma[t], f.Gamma[t]) =
                blend_and_clip(f.gamma[t], f.Gamma[t], gt, Gt, f.gamma_lim[t],
                               rho_min, cfg.beta);
        }
        f.validate();
    }

    if (!any_adapted) {
        res.theta = theta;
        res.theta_delta.assign(theta.steps(),
                               Eigen::VectorXd::Zero(model.m));
        return res;
    }

    auto make_channels = [&](const std::vector<Funnel>& fs) {
        std::vector<PredicateChannel> ch;
        ch.reserve(predicates.size());
        for (size_t i = 0; i < predicates.size(); ++i)
            ch.push_back({predicates[i], fs[i]});
        return ch;
    };
    GuidingLaw base_old(ctrl_cfg, model, make_channels(funnels));
    GuidingLaw base_new(ctrl_cfg, model, make_channels(res.funnels));
    res.theta = compensate_feedforward(theta, base_old, base_new, candidate);
    res.theta_delta.resize(theta.steps());
    for (int t = 0; t < theta.steps(); ++t)
        res.theta_delta[t] = res.theta.theta[t] - theta.theta[t];
    return res;
}

} // namespace stlpi
