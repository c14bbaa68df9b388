#include "stlpi/pi2.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stlpi {

double penalty(double rho, double lambda, double rho_min) {
    if (lambda < 0.0)
        throw std::runtime_error("penalty weight must be non-negative");
    if (rho >= rho_min)
        return 0.0;
    double d = rho_min - rho;
    return lambda * d * d * d;
}

double lambda_schedule(int k, int K, double lo, double hi) {
    if (k < 0 || k > K)
        throw std::runtime_error("schedule index out of range");
    return lo + (hi - lo) * (1.0 - std::cos(M_PI * k / K)) / 2.0;
}

std::vector<double> normalize_costs(const std::vector<double>& J,
                                    double eps_quantile, double h) {
    const size_t n = J.size();
    if (n < 2)
        throw std::runtime_error("cost normalization needs at least 2 samples");
    for (double j : J)
        if (!std::isfinite(j))
            throw std::runtime_error("non-finite sampled cost");

    std::vector<double> sorted = J;
    std::sort(sorted.begin(), sorted.end());
    double j_min = sorted.front();
    // nearest-rank quantile: the ceil(eps * n)-th smallest value
    size_t rank = static_cast<size_t>(std::ceil(eps_quantile * n));
    rank = std::clamp<size_t>(rank, 1, n);
    double j_eps = sorted[rank - 1];

    std::vector<double> out(n, 0.0);
    if (j_eps > j_min)
        for (size_t i = 0; i < n; ++i)
            out[i] = h * (J[i] - j_min) / (j_eps - j_min);
    return out;
}

std::vector<double> weights(const std::vector<double>& Jbar) {
    std::vector<double> w(Jbar.size());
    double sum = 0.0;
    for (size_t i = 0; i < Jbar.size(); ++i) {
        w[i] = std::exp(-Jbar[i]);
        sum += w[i];
    }
    for (double& x : w)
        x /= sum;
    return w;
}

PolicyParams sample_params(const PolicyParams& theta_hat,
                           const std::vector<Eigen::MatrixXd>& cov_chol,
                           Rng& rng) {
    PolicyParams out = theta_hat;
    const int m = theta_hat.theta.empty() ? 0 : static_cast<int>(theta_hat.theta[0].size());
    Eigen::VectorXd z(m);
    for (int t = 0; t < theta_hat.steps(); ++t) {
        for (int j = 0; j < m; ++j)
            z[j] = rng.normal();
        out.theta[t] += cov_chol[t].triangularView<Eigen::Lower>() * z;
    }
    return out;
}

void update(PolicyParams& theta, ExplorationState& expl,
            const std::vector<PolicyParams>& samples,
            const std::vector<double>& w) {
    const int steps = theta.steps();
    const int m = static_cast<int>(expl.cov_min.rows());
    for (int t = 0; t < steps; ++t) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
        for (size_t i = 0; i < samples.size(); ++i)
            mean.noalias() += w[i] * samples[i].theta[t];
        Eigen::MatrixXd cov = expl.cov_min;
        for (size_t i = 0; i < samples.size(); ++i) {
            Eigen::VectorXd d = samples[i].theta[t] - mean;
            cov.selfadjointView<Eigen::Lower>().rankUpdate(d, w[i]);
        }
        cov.triangularView<Eigen::StrictlyUpper>() =
            cov.transpose().triangularView<Eigen::StrictlyUpper>();
        theta.theta[t] = std::move(mean);
        expl.cov[t] = std::move(cov);
    }
}

void nesterov_step(double& alpha, const PolicyParams& theta_k,
                   const PolicyParams& theta_km1, PolicyParams& theta_hat) {
    if (alpha < 1.0)
        throw std::runtime_error("nesterov alpha must be >= 1");
    double alpha_prev = alpha;
    alpha = (1.0 + std::sqrt(4.0 * alpha_prev * alpha_prev + 1.0)) / 2.0;
    double momentum = (alpha_prev - 1.0) / alpha;
    theta_hat = theta_k;
    for (int t = 0; t < theta_k.steps(); ++t)
        theta_hat.theta[t] += momentum * (theta_k.theta[t] - theta_km1.theta[t]);
}

namespace {

struct SampleOutcome {
    double C = 0.0;
    double rho = 0.0;
    double J = 0.0;
};

double median_of(std::vector<double> v) {
    size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    double hi = v[n / 2];
    if (n % 2 == 1)
        return hi;
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    return 0.5 * (v[n / 2 - 1] + hi);
}

} // namespace

RunResult run(const Scenario& scenario, const Pi2Config& cfg, uint64_t seed) {
    const int steps = scenario.steps();
    const int m = scenario.model.m;
    const std::vector<PredicateDef> preds = scenario.predicates();
    const PredicateDef* goal = scenario.cost.goal_pred.empty()
                                   ? nullptr
                                   : &scenario.registry.at(scenario.cost.goal_pred);

    std::vector<Funnel> funnels = scenario.initial_funnels();
    PolicyParams theta = PolicyParams::zeros(steps, m);
    ExplorationState expl;
    expl.cov.assign(steps, cfg.cov_init_scale * Eigen::MatrixXd::Identity(m, m));
    expl.cov_min = cfg.cov_min_scale * Eigen::MatrixXd::Identity(m, m);
    expl.theta_prev = theta;
    expl.theta_hat = theta;

    auto make_channels = [&]() {
        std::vector<PredicateChannel> ch;
        ch.reserve(preds.size());
        for (size_t i = 0; i < preds.size(); ++i)
            ch.push_back({preds[i], funnels[i]});
        return ch;
    };

    auto guided_rollout = [&](const GuidingLaw& base, const PolicyParams& params,
                              Rng& rng) {
        std::vector<Eigen::VectorXd> k_ff = params.feedforward();
        Policy policy = [&](const Eigen::VectorXd& x, int t) {
            return Eigen::VectorXd(base(x, t) + k_ff[t]);
        };
        return rollout(scenario.model, policy, scenario.x0, scenario.T, scenario.dt,
                       scenario.noise, scenario.input_constraint, rng);
    };

    auto score = [&](const Trajectory& tr, double lambda) {
        SampleOutcome o;
        o.C = trajectory_cost(scenario.cost, tr, goal, scenario.dt,
                              scenario.model.kind);
        o.rho = robustness(*scenario.formula, scenario.registry, tr, 0);
        o.J = o.C + penalty(o.rho, lambda, scenario.rho_min);
        return o;
    };

    auto apply_adaptation = [&](const Trajectory& candidate) {
        AdaptResult res = adapt(funnels, theta, candidate, preds, scenario.rho_min,
                                cfg.adaptation, scenario.ctrl, scenario.model);
        funnels = std::move(res.funnels);
        theta = std::move(res.theta);
        // The lookahead and previous iterates describe the same feedforward
        // frame; shift them by the same compensation.
        for (int t = 0; t < steps; ++t) {
            expl.theta_hat.theta[t] += res.theta_delta[t];
            expl.theta_prev.theta[t] += res.theta_delta[t];
        }
    };

    // Initial funnel adaptation against a rollout of the initial mean policy.
    if (cfg.adapt_funnels) {
        GuidingLaw base(scenario.ctrl, scenario.model, make_channels());
        Rng rng = substream(seed, 0, 0, 2);
        apply_adaptation(guided_rollout(base, theta, rng));
    }

    RunResult result;
    result.history.reserve(cfg.K);

    std::vector<PolicyParams> samples(cfg.N);
    std::vector<SampleOutcome> outcomes(cfg.N);

    for (int k = 1; k <= cfg.K; ++k) {
        GuidingLaw base(scenario.ctrl, scenario.model, make_channels());
        double lambda = lambda_schedule(k - 1, cfg.K, cfg.lambda_start,
                                        cfg.lambda_end);

        std::vector<Eigen::MatrixXd> chol(steps);
        for (int t = 0; t < steps; ++t) {
            Eigen::LLT<Eigen::MatrixXd> llt(expl.cov[t]);
            if (llt.info() != Eigen::Success)
                throw std::runtime_error("exploration covariance not SPD at iteration " +
                                         std::to_string(k));
            chol[t] = llt.matrixL();
        }

        int best = 0;
        Trajectory best_traj;
        for (int i = 0; i < cfg.N; ++i) {
            Rng rng = substream(seed, k, i, 0);
            samples[i] = sample_params(expl.theta_hat, chol, rng);
            Trajectory tr = guided_rollout(base, samples[i], rng);
            outcomes[i] = score(tr, lambda);
            if (i == 0 || outcomes[i].J < outcomes[best].J) {
                best = i;
                best_traj = std::move(tr);
            }
        }

        std::vector<double> J(cfg.N);
        for (int i = 0; i < cfg.N; ++i)
            J[i] = outcomes[i].J;
        std::vector<double> w = weights(normalize_costs(J, cfg.eps_quantile, cfg.h));

        PolicyParams theta_km1 = theta;
        update(theta, expl, samples, w);
        nesterov_step(expl.nesterov_alpha, theta, theta_km1, expl.theta_hat);
        expl.theta_prev = theta_km1;

        if (cfg.adapt_funnels)
            apply_adaptation(best_traj);

        IterRecord rec;
        rec.k = k;
        rec.lambda = lambda;
        rec.best_cost = outcomes[0].C;
        rec.best_rho = outcomes[0].rho;
        for (const SampleOutcome& o : outcomes) {
            rec.best_cost = std::min(rec.best_cost, o.C);
            rec.best_rho = std::max(rec.best_rho, o.rho);
        }
        rec.median_J = median_of(J);
        {
            GuidingLaw eval_base(scenario.ctrl, scenario.model, make_channels());
            Rng rng = substream(seed, k, cfg.N, 1);
            SampleOutcome o =
                score(guided_rollout(eval_base, theta, rng), lambda);
            rec.mean_cost = o.C;
            rec.mean_rho = o.rho;
        }
        // Momentum restart: if the mean policy got worse under the same
        // penalty weight, drop the accelerated lookahead back onto it.
        // Without this the momentum accumulates selection noise once the
        // penalty flattens and the late iterations drift off the optimum.
        if (k >= 2) {
            const IterRecord& prev = result.history.back();
            double j_prev = prev.mean_cost +
                            penalty(prev.mean_rho, lambda, scenario.rho_min);
            double j_now = rec.mean_cost +
                           penalty(rec.mean_rho, lambda, scenario.rho_min);
            if (j_now > j_prev) {
                expl.nesterov_alpha = 1.0;
                expl.theta_hat = theta;
            }
        }
        rec.funnels = funnels;
        result.history.push_back(std::move(rec));

        if (cfg.early_exit && k >= 2) {
            double dn = 0.0, n = 0.0;
            for (int t = 0; t < steps; ++t) {
                dn += (theta.theta[t] - expl.theta_prev.theta[t]).squaredNorm();
                n += theta.theta[t].squaredNorm();
            }
            if (n > 0.0 && std::sqrt(dn / n) <= cfg.early_exit_eps)
                break;
        }
    }

    GuidingLaw base(scenario.ctrl, scenario.model, make_channels());
    Rng rng = substream(seed, cfg.K + 1, 0, 3);
    result.solution = guided_rollout(base, theta, rng);
    SampleOutcome o = score(result.solution, cfg.lambda_end);
    result.final_cost = o.C;
    result.final_rho = o.rho;
    result.final_J = o.J;
    result.theta = std::move(theta);
    result.funnels = std::move(funnels);
    return result;
}

} // namespace stlpi
