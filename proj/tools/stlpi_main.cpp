// Experiment runner: seeded single runs, multi-seed sweeps, and on-demand
// property suites over the library.

#include "stlpi/io.hpp"
#include "stlpi/oracle.hpp"
#include "stlpi/pi2.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
    std::string scenario = "simple";
    std::string robot = "integrator";
    double theta = 0.25;
    double noise = 0.0;
    uint64_t seed = 0;
    int seeds = 20;
    std::vector<double> thetas{0.25, 0.6, 1.2};
    std::string adapt = "on";
    std::string combiner = "improved";
    std::string out = "out";
    stlpi::Pi2Config pi2;
};

json config_echo(const RunConfig& c) {
    json j;
    j["scenario"] = c.scenario;
    j["robot"] = c.robot;
    j["theta"] = c.theta;
    j["noise"] = c.noise;
    j["seed"] = c.seed;
    j["seeds"] = c.seeds;
    j["thetas"] = c.thetas;
    j["adapt"] = c.adapt;
    j["combiner"] = c.combiner;
    j["out"] = c.out;
    j["N"] = c.pi2.N;
    j["K"] = c.pi2.K;
    j["eps_quantile"] = c.pi2.eps_quantile;
    j["h"] = c.pi2.h;
    j["lambda_start"] = c.pi2.lambda_start;
    j["lambda_end"] = c.pi2.lambda_end;
    j["cov_init"] = c.pi2.cov_init_scale;
    j["cov_min"] = c.pi2.cov_min_scale;
    j["xi_target"] = c.pi2.adaptation.xi_target;
    j["beta"] = c.pi2.adaptation.beta;
    return j;
}

stlpi::Scenario make_scenario(const RunConfig& c) {
    stlpi::Scenario s;
    if (c.scenario == "simple") {
        stlpi::RobotKind robot = c.robot == "unicycle"
                                     ? stlpi::RobotKind::Unicycle
                                     : stlpi::RobotKind::Integrator;
        s = stlpi::simple_scenario(c.theta, robot, c.noise);
    } else if (c.scenario == "complex") {
        s = stlpi::complex_scenario(c.noise);
    } else {
        throw std::runtime_error("unknown scenario: " + c.scenario);
    }
    s.ctrl.combiner = c.combiner == "simple" ? stlpi::Combiner::Simple
                                             : stlpi::Combiner::Improved;
    return s;
}

stlpi::Pi2Config make_pi2(const RunConfig& c, bool beta_overridden) {
    stlpi::Pi2Config p = c.pi2;
    p.adapt_funnels = c.adapt == "on";
    if (!beta_overridden)
        p.adaptation.beta = c.scenario == "complex" ? 0.8 : 0.2;
    return p;
}

void write_run_outputs(const fs::path& dir, const RunConfig& c,
                       const stlpi::Scenario& s, const stlpi::RunResult& r) {
    fs::create_directories(dir);
    stlpi::write_history_csv((dir / "history.csv").string(), r.history);
    stlpi::write_trajectory_csv((dir / "solution_trajectory.csv").string(),
                                r.solution);
    stlpi::write_funnels_csv(
        (dir / ("funnels_k" + std::to_string(c.pi2.K) + ".csv")).string(),
        r.funnels, s.dt);
    json summary;
    summary["final_cost"] = r.final_cost;
    summary["final_rho"] = r.final_rho;
    summary["final_J"] = r.final_J;
    summary["seed"] = c.seed;
    summary["config"] = config_echo(c);
    std::ofstream out(dir / "summary.json", std::ios::binary);
    out << summary.dump(2) << '\n';
    if (!out)
        throw std::runtime_error("cannot write summary.json");
}

int cmd_run(const RunConfig& c, bool beta_overridden) {
    stlpi::Scenario s = make_scenario(c);
    stlpi::RunResult r = stlpi::run(s, make_pi2(c, beta_overridden), c.seed);
    write_run_outputs(c.out, c, s, r);
    std::printf("run done: final_cost=%.6g final_rho=%.6g final_J=%.6g\n",
                r.final_cost, r.final_rho, r.final_J);
    return 0;
}

double nearest_rank(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    size_t rank = static_cast<size_t>(std::ceil(q * v.size()));
    rank = std::clamp<size_t>(rank, 1, v.size());
    return v[rank - 1];
}

int cmd_sweep(RunConfig c, bool beta_overridden) {
    fs::create_directories(c.out);
    stlpi::CsvTable table;
    table.header = {"theta", "medianJ", "p10J", "p90J", "optimum"};
    const double D = stlpi::simple_scenario_path_length();
    for (size_t ti = 0; ti < c.thetas.size(); ++ti) {
        double theta = c.thetas[ti];
        std::vector<double> finals;
        for (int si = 0; si < c.seeds; ++si) {
            RunConfig rc = c;
            rc.theta = theta;
            rc.seed = stlpi::mix_key(stlpi::mix_key(c.seed, ti), si);
            stlpi::Scenario s = make_scenario(rc);
            rc.out = (fs::path(c.out) /
                      ("theta_" + std::to_string(ti) + "_seed_" + std::to_string(si)))
                         .string();
            stlpi::RunResult r = stlpi::run(s, make_pi2(rc, beta_overridden), rc.seed);
            write_run_outputs(rc.out, rc, s, r);
            finals.push_back(r.final_J);
        }
        double opt = c.scenario == "simple"
                         ? stlpi::analytic_optimum(theta, D, 10.0).cost
                         : 0.0;
        table.rows.push_back({theta, nearest_rank(finals, 0.5),
                              nearest_rank(finals, 0.1), nearest_rank(finals, 0.9),
                              opt});
        std::printf("theta=%g medianJ=%.6g optimum=%.6g\n", theta,
                    table.rows.back()[1], opt);
    }
    stlpi::write_csv((fs::path(c.out) / "sweep.csv").string(), table);
    return 0;
}

// ---------------------------------------------------------------------------
// Property suites (cmd_check)

struct Report {
    json failures = json::array();

    void check(const std::string& suite, const std::string& property, bool ok,
               const std::string& detail = "") {
        if (ok)
            return;
        json f;
        f["suite"] = suite;
        f["property"] = property;
        if (!detail.empty())
            f["detail"] = detail;
        failures.push_back(f);
    }
};

void suite_stl(Report& rep, int cases, uint64_t seed) {
    for (int c = 0; c < cases; ++c) {
        stlpi::Rng rng = stlpi::substream(seed, 100, c);
        stlpi::PredicateRegistry reg = stlpi::random_registry(rng, 3);
        stlpi::Trajectory tr = stlpi::random_trajectory(
            rng, 18 + static_cast<int>(rng.next_u64() % 3), 0.5);
        stlpi::FormulaPtr f = stlpi::random_formula(rng, 3, 4, tr.dt);
        double prod = stlpi::robustness(*f, reg, tr, 0);
        double ref = stlpi::robustness_oracle(*f, reg, tr, 0);
        rep.check("stl", "oracle-equivalence", prod == ref,
                  "case " + std::to_string(c) + ": " + stlpi::to_string(*f));
    }
}

void suite_controllers(Report& rep, int cases, uint64_t seed) {
    for (int c = 0; c < cases; ++c) {
        stlpi::Rng rng = stlpi::substream(seed, 200, c);
        int n = 2 + static_cast<int>(rng.next_u64() % 3);
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i)
            v[i] = 2.0 * rng.normal();
        double Delta = 0.01 + rng.uniform();
        // Rank-one inverse identity vs a direct dense solve.
        Eigen::MatrixXd A =
            v * v.transpose() + Delta * Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd inv_sm =
            (Eigen::MatrixXd::Identity(n, n) -
             v * v.transpose() / (Delta + v.squaredNorm())) /
            Delta;
        double err = (A * inv_sm - Eigen::MatrixXd::Identity(n, n)).norm();
        rep.check("controllers", "rank-one-inverse-identity", err <= 1e-10,
                  "case " + std::to_string(c));
    }

    stlpi::SystemModel model = stlpi::SystemModel::single_integrator();
    stlpi::ControllerConfig cfg;
    for (int c = 0; c < cases; ++c) {
        stlpi::Rng rng = stlpi::substream(seed, 201, c);
        int n_ch = 1 + static_cast<int>(rng.next_u64() % 3);
        std::vector<stlpi::PredicateChannel> channels;
        for (int i = 0; i < n_ch; ++i) {
            stlpi::PredicateDef p;
            p.name = "q" + std::to_string(i);
            p.shape = (rng.next_u64() % 2) ? stlpi::PredicateShape::InsideBall
                                           : stlpi::PredicateShape::OutsideBall;
            p.sel_a = {0, 1};
            p.center = Eigen::Vector2d(2.0 * rng.normal(), 2.0 * rng.normal());
            p.radius = 0.3 + rng.uniform();
            channels.push_back(
                {p, stlpi::Funnel::constant(2, -3.0 - rng.uniform(),
                                            0.1 + 0.2 * rng.uniform(), -7.0,
                                            stlpi::AdaptMode::Frozen)});
        }
        Eigen::VectorXd x(2);
        x << 3.0 * rng.normal(), 3.0 * rng.normal();

        Eigen::VectorXd u = stlpi::improved_combination(cfg, model, channels, x, 0);
        std::vector<double> w = stlpi::combination_weights(channels, x, 0);
        Eigen::MatrixXd A = cfg.Delta * Eigen::MatrixXd::Identity(2, 2);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(2);
        for (int i = 0; i < n_ch; ++i) {
            bool singular = false;
            Eigen::VectorXd vi = stlpi::v_vector(model, channels[i].pred, x, &singular);
            if (singular)
                continue;
            double rho = channels[i].pred.value(x);
            double k = stlpi::kappa(cfg.gains, stlpi::xi(channels[i].funnel, rho, 0));
            A += w[i] * vi * vi.transpose();
            b += w[i] * k * vi;
        }
        rep.check("controllers", "combination-residual", (A * u - b).norm() <= 1e-9,
                  "case " + std::to_string(c));

        std::vector<stlpi::PredicateChannel> one{channels[0]};
        Eigen::VectorXd u1 = stlpi::improved_combination(cfg, model, one, x, 0);
        stlpi::ControllerConfig unit = cfg;
        unit.K = 1.0;
        Eigen::VectorXd u2 = stlpi::individual_control(unit, model, one[0], x, 0);
        rep.check("controllers", "single-channel-equivalence",
                  (u1 - u2).norm() <= 1e-10, "case " + std::to_string(c));
    }
}

void suite_weights(Report& rep, int cases, uint64_t seed, bool inject_sign) {
    for (int c = 0; c < cases; ++c) {
        stlpi::Rng rng = stlpi::substream(seed, 300, c);
        std::vector<double> J(10);
        for (double& j : J)
            j = 10.0 * rng.normal();
        std::vector<double> Jbar = stlpi::normalize_costs(J, 0.5, 3.0);
        if (inject_sign)
            for (double& j : Jbar)
                j = -j; // fault injection: flips the softmax sign
        std::vector<double> w = stlpi::weights(Jbar);

        double sum = 0.0;
        bool ordered = true;
        for (size_t i = 0; i < w.size(); ++i) {
            sum += w[i];
            for (size_t j = 0; j < w.size(); ++j)
                if (J[i] < J[j] && w[i] < w[j])
                    ordered = false;
        }
        rep.check("weights", "normalization", std::abs(sum - 1.0) <= 1e-12,
                  "case " + std::to_string(c));
        rep.check("weights", "weight-ordering", ordered,
                  "case " + std::to_string(c));
    }
}

int cmd_check(const std::string& suite, int cases, uint64_t seed,
              const std::string& inject) {
    Report rep;
    if (suite == "all" || suite == "stl")
        suite_stl(rep, cases, seed);
    if (suite == "all" || suite == "controllers")
        suite_controllers(rep, cases, seed);
    if (suite == "all" || suite == "weights")
        suite_weights(rep, cases, seed, inject == "weights-sign");

    json out;
    out["suite"] = suite;
    out["cases"] = cases;
    out["seed"] = seed;
    out["failures"] = rep.failures;
    out["status"] = rep.failures.empty() ? "pass" : "fail";
    std::cout << out.dump(2) << '\n';
    return rep.failures.empty() ? 0 : 1;
}

bool load_config_file(const std::string& path, RunConfig& c) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file: " + path);
    json j = json::parse(in);
    c.scenario = j.value("scenario", c.scenario);
    c.robot = j.value("robot", c.robot);
    c.theta = j.value("theta", c.theta);
    c.noise = j.value("noise", c.noise);
    c.seed = j.value("seed", c.seed);
    c.seeds = j.value("seeds", c.seeds);
    if (j.contains("thetas"))
        c.thetas = j["thetas"].get<std::vector<double>>();
    c.adapt = j.value("adapt", c.adapt);
    c.combiner = j.value("combiner", c.combiner);
    c.out = j.value("out", c.out);
    c.pi2.N = j.value("N", c.pi2.N);
    c.pi2.K = j.value("K", c.pi2.K);
    c.pi2.eps_quantile = j.value("eps_quantile", c.pi2.eps_quantile);
    c.pi2.h = j.value("h", c.pi2.h);
    c.pi2.lambda_start = j.value("lambda_start", c.pi2.lambda_start);
    c.pi2.lambda_end = j.value("lambda_end", c.pi2.lambda_end);
    c.pi2.cov_init_scale = j.value("cov_init", c.pi2.cov_init_scale);
    c.pi2.cov_min_scale = j.value("cov_min", c.pi2.cov_min_scale);
    c.pi2.adaptation.xi_target = j.value("xi_target", c.pi2.adaptation.xi_target);
    c.pi2.adaptation.beta = j.value("beta", c.pi2.adaptation.beta);
    return j.contains("beta");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Funnel-guided policy search for temporal-logic control tasks"};
    app.require_subcommand(1);

    RunConfig c;
    if (const char* root = std::getenv("STLPI_OUT"))
        c.out = root;
    std::string config_path;
    double beta_flag = -1.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--scenario", c.scenario, "simple|complex");
        sub->add_option("--robot", c.robot, "integrator|unicycle");
        sub->add_option("--theta", c.theta, "time/effort trade-off");
        sub->add_option("--noise", c.noise, "process-noise variance");
        sub->add_option("--seed", c.seed, "master seed");
        sub->add_option("--adapt", c.adapt, "on|off")
            ->check(CLI::IsMember({"on", "off"}));
        sub->add_option("--combiner", c.combiner, "simple|improved")
            ->check(CLI::IsMember({"simple", "improved"}));
        sub->add_option("--out", c.out, "output directory");
        sub->add_option("--iterations", c.pi2.K, "learning iterations");
        sub->add_option("--samples", c.pi2.N, "rollouts per iteration");
        sub->add_option("--lambda-start", c.pi2.lambda_start, "");
        sub->add_option("--lambda-end", c.pi2.lambda_end, "");
        sub->add_option("--beta", beta_flag, "funnel adaptation blend factor");
    };

    CLI::App* run = app.add_subcommand("run", "single seeded learning run");
    add_common(run);

    CLI::App* sweep = app.add_subcommand("sweep", "multi-seed sweep over theta");
    add_common(sweep);
    sweep->add_option("--seeds", c.seeds, "seeds per theta");
    sweep->add_option("--thetas", c.thetas, "theta list");

    std::string suite = "all", inject;
    int cases = 200;
    uint64_t check_seed = 1;
    CLI::App* check = app.add_subcommand("check", "property suites");
    check->add_option("--suite", suite, "all|stl|controllers|weights")
        ->check(CLI::IsMember({"all", "stl", "controllers", "weights"}));
    check->add_option("--cases", cases, "cases per suite");
    check->add_option("--seed", check_seed, "suite seed");
    check->add_option("--inject", inject, "fault injection hook (weights-sign)");

    CLI11_PARSE(app, argc, argv);

    try {
        bool file_beta = false;
        if (!config_path.empty()) {
            // Flags override file values: reload the file into defaults, then
            // reparse the command line on top.
            RunConfig fresh;
            if (const char* root = std::getenv("STLPI_OUT"))
                fresh.out = root;
            file_beta = load_config_file(config_path, fresh);
            c = fresh;
            beta_flag = -1.0;
            app.clear();
            CLI11_PARSE(app, argc, argv);
        }
        if (beta_flag >= 0.0)
            c.pi2.adaptation.beta = beta_flag;
        bool beta_set = beta_flag >= 0.0 || file_beta;
        if (run->parsed())
            return cmd_run(c, beta_set);
        if (sweep->parsed())
            return cmd_sweep(c, beta_set);
        if (check->parsed())
            return cmd_check(suite, cases, check_seed, inject);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
