#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stlpi/rng.hpp"
#include "stlpi/scenarios.hpp"

#include <cmath>
#include <queue>
#include <vector>

using namespace stlpi;

namespace {

// Independent discretized shortest-path oracle: Dijkstra over start, goal
// center, and a dense ring of points on the clearance circle; segments that
// cut into the circle are forbidden; the goal-disk radius is subtracted at
// the end (final approach is radial).
double dijkstra_path_oracle(const Eigen::Vector2d& start,
                            const Eigen::Vector2d& obstacle, double r,
                            const Eigen::Vector2d& goal_center,
                            double goal_radius) {
    const int n = 2000;
    std::vector<Eigen::Vector2d> nodes = {start, goal_center};
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * M_PI * i / n;
        nodes.push_back(obstacle + r * Eigen::Vector2d(std::cos(a), std::sin(a)));
    }
    auto clear = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        Eigen::Vector2d d = b - a;
        double len2 = d.squaredNorm();
        double t = len2 > 0 ? std::clamp((obstacle - a).dot(d) / len2, 0.0, 1.0)
                            : 0.0;
        return (a + t * d - obstacle).norm() >= r - 1e-9;
    };
    const int V = static_cast<int>(nodes.size());
    std::vector<std::vector<std::pair<int, double>>> adj(V);
    auto link = [&](int i, int j) {
        double w = (nodes[i] - nodes[j]).norm();
        adj[i].push_back({j, w});
        adj[j].push_back({i, w});
    };
    if (clear(start, goal_center))
        link(0, 1);
    for (int i = 0; i < n; ++i) {
        int u = 2 + i;
        link(u, 2 + (i + 1) % n); // arc chord
        if (clear(start, nodes[u]))
            link(0, u);
        if (clear(goal_center, nodes[u]))
            link(1, u);
    }
    std::vector<double> dist(V, std::numeric_limits<double>::infinity());
    std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                        std::greater<>>
        pq;
    dist[0] = 0.0;
    pq.push({0.0, 0});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u])
            continue;
        for (auto [v, w] : adj[u])
            if (d + w < dist[v]) {
                dist[v] = d + w;
                pq.push({dist[v], v});
            }
    }
    return dist[1] - goal_radius;
}

} // namespace

TEST_CASE("simple scenario construction") {
    Scenario s = simple_scenario(1.2, RobotKind::Integrator, 0.0);
    CHECK(s.rho_min == doctest::Approx(0.05));
    CHECK(s.T == doctest::Approx(10.0));
    CHECK(s.dt == doctest::Approx(0.02));
    CHECK(s.steps() == 500);
    CHECK(s.model.kind == ModelKind::SingleIntegrator);
    REQUIRE(s.channels.size() == 2);

    // goal predicate at its own center has robustness r_g
    const PredicateDef& mu1 = s.registry.at("mu1");
    Eigen::Vector2d xg(1.0, 3.5);
    CHECK(mu1.value(xg) == doctest::Approx(0.2));

    // obstacle predicate at the start
    const PredicateDef& mu2 = s.registry.at("mu2");
    CHECK(mu2.value(s.x0) == doctest::Approx(std::sqrt(1.0 + 2.89) - 1.2));
    CHECK(mu2.value(s.x0) == doctest::Approx(0.7720).epsilon(1e-3));

    // funnels: goal channel adapts, obstacle channel is frozen at rho_min
    const Funnel& f1 = s.channels[0].funnel;
    CHECK(f1.gamma[0] == doctest::Approx(-5.0));
    CHECK(f1.Gamma[0] == doctest::Approx(0.2));
    CHECK(f1.gamma_lim[0] == doctest::Approx(-7.0));
    CHECK(f1.mode != AdaptMode::Frozen);
    const Funnel& f2 = s.channels[1].funnel;
    CHECK(f2.gamma[0] == doctest::Approx(0.05));
    CHECK(f2.Gamma[0] == doctest::Approx(0.5));
    CHECK(f2.mode == AdaptMode::Frozen);

    Scenario u = simple_scenario(0.25, RobotKind::Unicycle, 0.0);
    CHECK(u.model.kind == ModelKind::Unicycle);
    REQUIRE(u.x0.size() == 3);
    CHECK(u.x0[2] == doctest::Approx(0.0));
    CHECK(u.cost.theta == doctest::Approx(0.25));
}

TEST_CASE("complex scenario construction") {
    Scenario s = complex_scenario(0.0);
    CHECK(s.rho_min == doctest::Approx(0.02));
    CHECK(s.dt == doctest::Approx(0.01));
    CHECK(s.model.kind == ModelKind::ConsensusNetwork);
    REQUIRE(s.channels.size() == 7);
    REQUIRE(s.x0.size() == 6);

    // mu7: drone vs robot midpoint at the initial state
    const PredicateDef& mu7 = s.registry.at("mu7");
    CHECK(mu7.value(s.x0) == doctest::Approx(0.1 - 1.3038).epsilon(1e-3));

    // mu3: distance upper band at the initial state
    const PredicateDef& mu3 = s.registry.at("mu3");
    CHECK(mu3.value(s.x0) == doctest::Approx(0.1));

    // Laplacian rows sum to zero
    for (int i = 0; i < 3; ++i)
        CHECK(s.model.laplacian.row(i).sum() == doctest::Approx(0.0));

    CHECK(s.cost.kind == CostSpec::Kind::InputEnergy);
}

TEST_CASE("trajectory cost") {
    Scenario s = simple_scenario(1.2, RobotKind::Integrator, 0.0);
    const PredicateDef& goal = s.registry.at("mu1");
    const int steps = s.steps();

    auto constant_traj = [&](const Eigen::Vector2d& x, const Eigen::Vector2d& u) {
        Trajectory tr;
        tr.dt = s.dt;
        tr.states.assign(steps + 1, x);
        tr.inputs.assign(steps, u);
        return tr;
    };

    // parked inside the goal with zero input: free
    Trajectory in_goal = constant_traj(Eigen::Vector2d(1.0, 3.5), Eigen::Vector2d::Zero());
    CHECK(trajectory_cost(s.cost, in_goal, &goal, s.dt, s.model.kind) ==
          doctest::Approx(0.0));
    CHECK(settle_time(in_goal, goal, s.T) == doctest::Approx(0.0));

    // never reaches the goal with zero input: theta * T
    Trajectory parked = constant_traj(s.x0, Eigen::Vector2d::Zero());
    CHECK(trajectory_cost(s.cost, parked, &goal, s.dt, s.model.kind) ==
          doctest::Approx(1.2 * 10.0));
    CHECK(settle_time(parked, goal, s.T) == doctest::Approx(10.0));

    // unit-speed effort for the full horizon adds the integral of v^2 = 1
    Trajectory moving = constant_traj(s.x0, Eigen::Vector2d(0.6, 0.8));
    CHECK(trajectory_cost(s.cost, moving, &goal, s.dt, s.model.kind) ==
          doctest::Approx(1.2 * 10.0 + 10.0));

    // InputEnergy: constant |u| = 1 over T = 10 gives 10
    CostSpec energy;
    energy.kind = CostSpec::Kind::InputEnergy;
    CHECK(trajectory_cost(energy, moving, nullptr, s.dt, s.model.kind) ==
          doctest::Approx(10.0));

    // T* is the first time after which the goal holds permanently
    Trajectory dip = constant_traj(Eigen::Vector2d(1.0, 3.5), Eigen::Vector2d::Zero());
    dip.states[10] = s.x0; // leaves once at t = 10 dt
    CHECK(settle_time(dip, goal, s.T) == doctest::Approx(11 * s.dt));

    // unicycle speed is the first input channel
    Trajectory uturn = constant_traj(s.x0, Eigen::Vector2d(0.5, 1.0));
    CHECK(trajectory_cost(s.cost, uturn, &goal, s.dt, ModelKind::Unicycle) ==
          doctest::Approx(1.2 * 10.0 + 0.25 * 10.0));
}

TEST_CASE("shortest path length around the obstacle") {
    CHECK(simple_scenario_path_length() == doctest::Approx(4.37).epsilon(0.02 / 4.37));

    // matches the independent Dijkstra oracle on the scenario geometry
    Eigen::Vector2d start(3.5, 0.3), obst(2.5, 2.0), goalc(1.0, 3.5);
    double oracle = dijkstra_path_oracle(start, obst, 1.2, goalc, 0.2);
    double direct = shortest_path_length(start, obst, 1.2, goalc, 0.2);
    CHECK(direct == doctest::Approx(oracle).epsilon(0.01));

    // randomized disjoint configurations
    Rng rng(31);
    int tested = 0;
    while (tested < 25) {
        Eigen::Vector2d o(4.0 * rng.uniform(), 4.0 * rng.uniform());
        double r = 0.5 + rng.uniform();
        Eigen::Vector2d st(8.0 * rng.uniform() - 2.0, 8.0 * rng.uniform() - 2.0);
        Eigen::Vector2d gc(8.0 * rng.uniform() - 2.0, 8.0 * rng.uniform() - 2.0);
        double gr = 0.1 + 0.2 * rng.uniform();
        if ((st - o).norm() < r + 0.05 || (gc - o).norm() < r + gr + 0.05)
            continue;
        if ((st - gc).norm() < gr + 0.05)
            continue;
        ++tested;
        double a = shortest_path_length(st, o, r, gc, gr);
        double b = dijkstra_path_oracle(st, o, r, gc, gr);
        CHECK(a == doctest::Approx(b).epsilon(0.01));
    }

    // start inside the clearance circle is rejected
    CHECK_THROWS(shortest_path_length(obst, obst, 1.2, goalc, 0.2));
}

TEST_CASE("analytic optimum") {
    auto a = analytic_optimum(1.2, 4.37, 10.0);
    CHECK(a.v_opt == doctest::Approx(1.0));
    CHECK(a.cost == doctest::Approx(9.614));

    auto b = analytic_optimum(0.25, 4.37, 10.0);
    CHECK(b.v_opt == doctest::Approx(0.5));
    CHECK(b.cost == doctest::Approx(4.37));

    // slow-side clamp: very small theta is limited by D/T
    auto c = analytic_optimum(0.01, 4.37, 10.0);
    CHECK(c.v_opt == doctest::Approx(0.437));

    // v_opt is the projection of sqrt(theta) onto [D/T, 1]: grid search
    for (double theta : {0.01, 0.1, 0.25, 0.6, 1.2, 3.0}) {
        auto opt = analytic_optimum(theta, 4.37, 10.0);
        double best_v = 0.0, best_c = std::numeric_limits<double>::infinity();
        for (double v = 0.437; v <= 1.0 + 1e-12; v += 1e-5) {
            double cst = theta * 4.37 / v + 4.37 * v;
            if (cst < best_c) {
                best_c = cst;
                best_v = v;
            }
        }
        CHECK(opt.v_opt == doctest::Approx(best_v).epsilon(1e-4));
        CHECK(opt.cost == doctest::Approx(best_c).epsilon(1e-6));
    }
}
