#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stlpi/pi2.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace stlpi;

TEST_CASE("penalty examples and monotonicity") {
    CHECK(penalty(0.15, 5000.0, 0.05) == 0.0);
    CHECK(penalty(-0.98, 5000.0, 0.02) == doctest::Approx(5000.0));
    CHECK(penalty(0.05, 0.5, 0.05) == 0.0);
    CHECK_THROWS(penalty(0.0, -1.0, 0.05));

    double prev = penalty(1.0, 100.0, 0.05);
    for (double rho = 1.0; rho >= -2.0; rho -= 0.01) {
        double p = penalty(rho, 100.0, 0.05);
        CHECK(p >= prev);
        prev = p;
    }
    CHECK(penalty(-1.0, 200.0, 0.05) > penalty(-1.0, 100.0, 0.05));
}

TEST_CASE("lambda schedule") {
    CHECK(lambda_schedule(0, 50, 0.5, 5000.0) == doctest::Approx(0.5));
    CHECK(lambda_schedule(50, 50, 0.5, 5000.0) == doctest::Approx(5000.0));
    CHECK(lambda_schedule(25, 50, 0.5, 5000.0) == doctest::Approx(2500.25));
    double prev = 0.0;
    for (int k = 0; k <= 50; ++k) {
        double l = lambda_schedule(k, 50, 0.5, 5000.0);
        CHECK(l > prev);
        prev = l;
    }
    CHECK_THROWS(lambda_schedule(-1, 50, 0.5, 5000.0));
    CHECK_THROWS(lambda_schedule(51, 50, 0.5, 5000.0));
}

TEST_CASE("cost normalization") {
    std::vector<double> out = normalize_costs({1, 2, 3, 4}, 0.5, 3.0);
    CHECK(out[0] == doctest::Approx(0.0));
    CHECK(out[1] == doctest::Approx(3.0));
    CHECK(out[2] == doctest::Approx(6.0));
    CHECK(out[3] == doctest::Approx(9.0));

    // degenerate: all equal
    std::vector<double> flat = normalize_costs({7, 7, 7}, 0.5, 3.0);
    for (double v : flat)
        CHECK(v == 0.0);

    // scale invariance of the spread
    for (double c : {0.1, 1.0, 50.0}) {
        std::vector<double> s = normalize_costs({5, 5 + c, 5 + 2 * c}, 0.5, 3.0);
        CHECK(s[0] == doctest::Approx(0.0));
        CHECK(s[1] == doctest::Approx(3.0));
        CHECK(s[2] == doctest::Approx(6.0));
    }

    CHECK_THROWS(normalize_costs({1.0}, 0.5, 3.0));
    CHECK_THROWS(normalize_costs({1.0, std::nan("")}, 0.5, 3.0));
}

TEST_CASE("softmax weights") {
    std::vector<double> u = weights({2.0, 2.0, 2.0});
    for (double w : u)
        CHECK(w == doctest::Approx(1.0 / 3.0));

    std::vector<double> w = weights({0.0, 3.0});
    CHECK(w[0] == doctest::Approx(1.0 / (1.0 + std::exp(-3.0))).epsilon(1e-6));
    CHECK(w[1] == doctest::Approx(std::exp(-3.0) / (1.0 + std::exp(-3.0))).epsilon(1e-6));
    CHECK(w[0] == doctest::Approx(0.9526).epsilon(1e-3));
    CHECK(w[0] + w[1] == doctest::Approx(1.0));

    // shift invariance
    std::vector<double> a = weights({0.4, 1.7, 2.9});
    std::vector<double> b = weights({10.4, 11.7, 12.9});
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(a[i] - b[i]) <= 1e-12);

    // strict ordering: lower normalized cost, higher weight
    std::vector<double> o = weights({0.5, 0.1, 2.0});
    CHECK(o[1] > o[0]);
    CHECK(o[0] > o[2]);
}

TEST_CASE("argmax invariance under cost scaling") {
    std::vector<double> J = {3.2, 1.1, 7.4, 2.0, 5.6, 1.9};
    std::vector<double> w1 = weights(normalize_costs(J, 0.5, 3.0));
    std::vector<double> Js = J;
    for (double& j : Js)
        j *= 17.5;
    std::vector<double> w2 = weights(normalize_costs(Js, 0.5, 3.0));
    for (size_t i = 0; i < J.size(); ++i)
        CHECK(std::abs(w1[i] - w2[i]) <= 1e-12);
}

TEST_CASE("sample_params") {
    const int steps = 4, m = 2;
    PolicyParams hat = PolicyParams::zeros(steps, m);
    hat.theta[1] = Eigen::Vector2d(0.3, -0.7);

    SUBCASE("deterministic per seed") {
        std::vector<Eigen::MatrixXd> chol(steps,
                                          0.1 * Eigen::MatrixXd::Identity(m, m));
        Rng r1(99), r2(99);
        PolicyParams a = sample_params(hat, chol, r1);
        PolicyParams b = sample_params(hat, chol, r2);
        for (int t = 0; t < steps; ++t)
            CHECK(a.theta[t] == b.theta[t]);
    }

    SUBCASE("vanishing covariance returns theta_hat") {
        std::vector<Eigen::MatrixXd> chol(steps, Eigen::MatrixXd::Zero(m, m));
        Rng rng(1);
        PolicyParams a = sample_params(hat, chol, rng);
        for (int t = 0; t < steps; ++t)
            CHECK((a.theta[t] - hat.theta[t]).norm() == doctest::Approx(0.0));
    }

    SUBCASE("Monte-Carlo mean matches theta_hat") {
        const double sigma = 0.5;
        std::vector<Eigen::MatrixXd> chol(steps,
                                          sigma * Eigen::MatrixXd::Identity(m, m));
        Rng rng(7);
        const int n = 100000;
        std::vector<Eigen::Vector2d> sum(steps, Eigen::Vector2d::Zero());
        for (int i = 0; i < n; ++i) {
            PolicyParams s = sample_params(hat, chol, rng);
            for (int t = 0; t < steps; ++t)
                sum[t] += s.theta[t];
        }
        double tol = 4.0 * sigma / std::sqrt(static_cast<double>(n));
        for (int t = 0; t < steps; ++t)
            for (int j = 0; j < m; ++j)
                CHECK(std::abs(sum[t][j] / n - hat.theta[t][j]) <= tol);
    }
}

TEST_CASE("update") {
    const int steps = 3, m = 2;
    ExplorationState expl;
    expl.cov_min = 2e-7 * Eigen::MatrixXd::Identity(m, m);
    expl.cov.assign(steps, 2e-4 * Eigen::MatrixXd::Identity(m, m));
    PolicyParams theta = PolicyParams::zeros(steps, m);

    SUBCASE("single sample with weight 1") {
        PolicyParams s = PolicyParams::zeros(steps, m);
        s.theta[0] = Eigen::Vector2d(1.0, -2.0);
        update(theta, expl, {s}, {1.0});
        CHECK((theta.theta[0] - s.theta[0]).norm() == doctest::Approx(0.0));
        for (int t = 0; t < steps; ++t)
            CHECK((expl.cov[t] - expl.cov_min).norm() == doctest::Approx(0.0));
    }

    SUBCASE("symmetric pair") {
        Eigen::Vector2d d(0.4, 0.1);
        PolicyParams p = PolicyParams::zeros(steps, m), q = p;
        for (int t = 0; t < steps; ++t) {
            p.theta[t] = d;
            q.theta[t] = -d;
        }
        update(theta, expl, {p, q}, {0.5, 0.5});
        for (int t = 0; t < steps; ++t) {
            CHECK(theta.theta[t].norm() == doctest::Approx(0.0));
            CHECK((expl.cov[t] - (expl.cov_min + d * d.transpose())).norm() <=
                  1e-14);
        }
    }

    SUBCASE("random instance against a direct-summation oracle") {
        Rng rng(13);
        const int N = 12;
        std::vector<PolicyParams> samples(N, PolicyParams::zeros(steps, m));
        std::vector<double> raw(N);
        double sum = 0.0;
        for (int i = 0; i < N; ++i) {
            for (int t = 0; t < steps; ++t)
                samples[i].theta[t] = Eigen::Vector2d(rng.normal(), rng.normal());
            raw[i] = rng.uniform() + 0.01;
            sum += raw[i];
        }
        for (double& w : raw)
            w /= sum;
        update(theta, expl, samples, raw);
        for (int t = 0; t < steps; ++t) {
            Eigen::Vector2d mean = Eigen::Vector2d::Zero();
            for (int i = 0; i < N; ++i)
                mean += raw[i] * samples[i].theta[t];
            Eigen::Matrix2d cov = expl.cov_min;
            for (int i = 0; i < N; ++i) {
                Eigen::Vector2d dd = samples[i].theta[t] - mean;
                cov += raw[i] * dd * dd.transpose();
            }
            CHECK((theta.theta[t] - mean).norm() <= 1e-12);
            CHECK((expl.cov[t] - cov).norm() <= 1e-12);
            // symmetry and floor
            CHECK((expl.cov[t] - expl.cov[t].transpose()).norm() <= 1e-14);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(expl.cov[t]);
            CHECK(es.eigenvalues().minCoeff() >= 2e-7 - 1e-12);
        }
    }
}

TEST_CASE("nesterov step") {
    const int steps = 2, m = 2;
    PolicyParams k0 = PolicyParams::zeros(steps, m), km1 = k0, hat = k0;
    k0.theta[0] = Eigen::Vector2d(1.0, 0.0);
    km1.theta[0] = Eigen::Vector2d(0.5, 0.0);

    double alpha = 1.0;
    nesterov_step(alpha, k0, km1, hat);
    CHECK(alpha == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0));
    // alpha_prev = 1 -> zero momentum
    CHECK((hat.theta[0] - k0.theta[0]).norm() == doctest::Approx(0.0));

    // second step has momentum (alpha_prev - 1)/alpha'
    double alpha_prev = alpha;
    nesterov_step(alpha, k0, km1, hat);
    double mom = (alpha_prev - 1.0) / alpha;
    CHECK((hat.theta[0] - (k0.theta[0] + mom * (k0.theta[0] - km1.theta[0])))
              .norm() <= 1e-14);

    // fixed point: theta_k == theta_km1 leaves hat at theta_k
    nesterov_step(alpha, k0, k0, hat);
    CHECK((hat.theta[0] - k0.theta[0]).norm() == doctest::Approx(0.0));

    double bad = 0.5;
    CHECK_THROWS(nesterov_step(bad, k0, km1, hat));
}

TEST_CASE("run: K=0 gives an empty history and the initial-policy rollout") {
    Scenario s = simple_scenario(0.25, RobotKind::Integrator, 0.0);
    Pi2Config cfg;
    cfg.K = 0;
    cfg.N = 2;
    cfg.adapt_funnels = false;
    RunResult res = run(s, cfg, 5);
    CHECK(res.history.empty());
    REQUIRE(res.solution.states.size() == static_cast<size_t>(s.steps() + 1));
    // zero feedforward: the solution is the pure guidance rollout
    for (const auto& t : res.theta.theta)
        CHECK(t.isZero());
}

TEST_CASE("run: fixed seed reproduces the history bit-exactly") {
    Scenario s = simple_scenario(0.25, RobotKind::Integrator, 0.0);
    Pi2Config cfg;
    cfg.K = 2;
    cfg.N = 5;
    RunResult a = run(s, cfg, 21);
    RunResult b = run(s, cfg, 21);
    REQUIRE(a.history.size() == b.history.size());
    for (size_t k = 0; k < a.history.size(); ++k) {
        CHECK(a.history[k].median_J == b.history[k].median_J);
        CHECK(a.history[k].mean_cost == b.history[k].mean_cost);
        CHECK(a.history[k].best_rho == b.history[k].best_rho);
    }
    CHECK(a.final_cost == b.final_cost);
    CHECK(a.final_rho == b.final_rho);
    for (size_t t = 0; t < a.solution.states.size(); ++t)
        CHECK(a.solution.states[t] == b.solution.states[t]);

    RunResult c = run(s, cfg, 22);
    CHECK(c.final_cost != a.final_cost);
}
