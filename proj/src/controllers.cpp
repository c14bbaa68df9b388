#include "stlpi/controllers.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace stlpi {

Eigen::VectorXd v_vector(const SystemModel& model, const PredicateDef& pred,
                         const Eigen::VectorXd& x, bool* singular) {
    Eigen::VectorXd grad;
    bool ok = pred.gradient(x, grad);
    if (singular)
        *singular = !ok;
    switch (model.kind) {
    case ModelKind::SingleIntegrator:
    case ModelKind::ConsensusNetwork:
        // g = I, so v = grad
        return ok ? grad : Eigen::VectorXd::Zero(model.n);
    case ModelKind::Unicycle: {
        // first-stage scalar coefficient from g11 = [cos, sin]^T
        Eigen::VectorXd v(1);
        v[0] = ok ? grad[0] * std::cos(x[2]) + grad[1] * std::sin(x[2]) : 0.0;
        return v;
    }
    }
    return Eigen::VectorXd::Zero(model.n);
}

Eigen::VectorXd individual_control(const ControllerConfig& cfg,
                                   const SystemModel& model,
                                   const PredicateChannel& channel,
                                   const Eigen::VectorXd& x, int t_index) {
    double rho = channel.pred.value(x);
    double k = kappa(cfg.gains, xi(channel.funnel, rho, t_index));
    if (k == 0.0)
        return Eigen::VectorXd::Zero(model.m);
    bool singular = false;
    Eigen::VectorXd v = v_vector(model, channel.pred, x, &singular);
    if (singular)
        return Eigen::VectorXd::Zero(model.m);
    return (k * cfg.K / (v.squaredNorm() + cfg.Delta)) * v;
}

std::vector<double> combination_weights(const std::vector<PredicateChannel>& channels,
                                        const Eigen::VectorXd& x, int t_index) {
    std::vector<double> alpha(channels.size(), 0.0);
    double sum = 0.0;
    for (size_t i = 0; i < channels.size(); ++i) {
        double rho = channels[i].pred.value(x);
        alpha[i] = std::max(0.0, xi(channels[i].funnel, rho, t_index));
        sum += alpha[i];
    }
    if (sum > 0.0)
        for (double& a : alpha)
            a /= sum;
    return alpha;
}

Eigen::VectorXd simple_combination(const ControllerConfig& cfg,
                                   const SystemModel& model,
                                   const std::vector<PredicateChannel>& channels,
                                   const Eigen::VectorXd& x, int t_index) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(model.m);
    for (const PredicateChannel& ch : channels) {
        double alpha = std::max(0.0, xi(ch.funnel, ch.pred.value(x), t_index));
        if (alpha > 0.0)
            u += alpha * individual_control(cfg, model, ch, x, t_index);
    }
    return u;
}

namespace {

// Shared SPD solve for (sum alpha v v^T + Delta I) u = sum alpha kappa v.
Eigen::VectorXd solve_combined(const std::vector<Eigen::VectorXd>& v,
                               const std::vector<double>& alpha,
                               const std::vector<double>& kap, double Delta,
                               int dim) {
    Eigen::MatrixXd A = Delta * Eigen::MatrixXd::Identity(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    bool any = false;
    for (size_t i = 0; i < v.size(); ++i) {
        if (alpha[i] <= 0.0)
            continue;
        any = true;
        A.selfadjointView<Eigen::Lower>().rankUpdate(v[i], alpha[i]);
        rhs.noalias() += (alpha[i] * kap[i]) * v[i];
    }
    if (!any)
        return Eigen::VectorXd::Zero(dim);
    Eigen::LLT<Eigen::MatrixXd> llt(A.selfadjointView<Eigen::Lower>());
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("combined controller system not SPD");
    return llt.solve(rhs);
}

} // namespace

Eigen::VectorXd improved_combination(const ControllerConfig& cfg,
                                     const SystemModel& model,
                                     const std::vector<PredicateChannel>& channels,
                                     const Eigen::VectorXd& x, int t_index) {
    std::vector<double> alpha = combination_weights(channels, x, t_index);
    std::vector<Eigen::VectorXd> v(channels.size());
    std::vector<double> kap(channels.size(), 0.0);
    for (size_t i = 0; i < channels.size(); ++i) {
        if (alpha[i] <= 0.0)
            continue;
        v[i] = v_vector(model, channels[i].pred, x);
        kap[i] = kappa(cfg.gains,
                       xi(channels[i].funnel, channels[i].pred.value(x), t_index));
    }
    return solve_combined(v, alpha, kap, cfg.Delta, model.m);
}

Eigen::VectorXd unicycle_guidance(const ControllerConfig& cfg,
                                  const SystemModel& model,
                                  const std::vector<PredicateChannel>& channels,
                                  const Eigen::VectorXd& x, int t_index) {
    const size_t M = channels.size();
    const double ct = std::cos(x[2]), st = std::sin(x[2]);

    std::vector<double> v1(M, 0.0), dv1_dtheta(M, 0.0), kap(M, 0.0), xi_pos(M, 0.0);
    for (size_t i = 0; i < M; ++i) {
        double rho = channels[i].pred.value(x);
        xi_pos[i] = std::max(0.0, xi(channels[i].funnel, rho, t_index));
        if (xi_pos[i] <= 0.0)
            continue;
        kap[i] = kappa(cfg.gains, xi(channels[i].funnel, rho, t_index));
        Eigen::VectorXd grad;
        if (!channels[i].pred.gradient(x, grad))
            continue; // singular: channel contributes nothing
        v1[i] = grad[0] * ct + grad[1] * st;
        dv1_dtheta[i] = -grad[0] * st + grad[1] * ct;
    }

    // Stage 1: scalar improved combination over the v1 coefficients.
    double sum1 = 0.0;
    for (double a : xi_pos)
        sum1 += a;
    double A1 = cfg.Delta, b1 = 0.0;
    if (sum1 > 0.0) {
        for (size_t i = 0; i < M; ++i) {
            double a = xi_pos[i] / sum1;
            A1 += a * v1[i] * v1[i];
            b1 += a * kap[i] * v1[i];
        }
    }
    double u1 = b1 / A1;

    // Stage 2: steer using v2 = u1 * dv1/dtheta * steer_gain, weights damped
    // where u1 already drives the robustness up.
    double sum2 = 0.0;
    std::vector<double> alpha2(M, 0.0), v2(M, 0.0);
    for (size_t i = 0; i < M; ++i) {
        if (xi_pos[i] <= 0.0)
            continue;
        v2[i] = u1 * dv1_dtheta[i] * model.steer_gain;
        alpha2[i] = std::exp(-cfg.nu * u1 * v1[i]) * xi_pos[i];
        sum2 += alpha2[i];
    }
    double A2 = cfg.Delta, b2 = 0.0;
    if (sum2 > 0.0) {
        for (size_t i = 0; i < M; ++i) {
            double a = alpha2[i] / sum2;
            A2 += a * v2[i] * v2[i];
            b2 += a * kap[i] * v2[i];
        }
    }
    double u2 = b2 / A2;

    Eigen::VectorXd u(2);
    u << u1, u2;
    return u;
}

Eigen::VectorXd GuidingLaw::operator()(const Eigen::VectorXd& x, int t_index) const {
    if (model_.kind == ModelKind::Unicycle)
        return unicycle_guidance(cfg_, model_, channels_, x, t_index);
    if (cfg_.combiner == Combiner::Simple)
        return simple_combination(cfg_, model_, channels_, x, t_index);
    return improved_combination(cfg_, model_, channels_, x, t_index);
}

} // namespace stlpi
