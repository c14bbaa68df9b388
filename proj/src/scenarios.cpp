#include "stlpi/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace stlpi {

std::vector<PredicateDef> Scenario::predicates() const {
    std::vector<PredicateDef> out;
    out.reserve(channels.size());
    for (const PredicateChannel& ch : channels)
        out.push_back(ch.pred);
    return out;
}

std::vector<Funnel> Scenario::initial_funnels() const {
    std::vector<Funnel> out;
    out.reserve(channels.size());
    for (const PredicateChannel& ch : channels)
        out.push_back(ch.funnel);
    return out;
}

namespace {

PredicateDef ball(std::string name, PredicateShape shape, std::vector<int> sel,
                  Eigen::Vector2d center, double radius) {
    PredicateDef p;
    p.name = std::move(name);
    p.shape = shape;
    p.sel_a = std::move(sel);
    p.center = center;
    p.radius = radius;
    return p;
}

PredicateDef pair_dist(std::string name, PredicateShape shape, std::vector<int> a,
                       std::vector<int> b, double d) {
    PredicateDef p;
    p.name = std::move(name);
    p.shape = shape;
    p.sel_a = std::move(a);
    p.sel_b = std::move(b);
    p.radius = d;
    return p;
}

} // namespace

Scenario simple_scenario(double theta, RobotKind robot, double noise_variance) {
    if (theta <= 0.0)
        throw std::runtime_error("cost trade-off must be positive");

    Scenario s;
    s.name = "simple";
    s.T = 10.0;
    s.dt = 0.02;
    s.rho_min = 0.05;
    const int n_grid = s.steps() + 1;

    if (robot == RobotKind::Integrator) {
        s.model = SystemModel::single_integrator();
        s.x0 = Eigen::Vector2d(3.5, 0.3);
        s.input_constraint = InputConstraint::norm_ball(1.0);
    } else {
        s.model = SystemModel::unicycle();
        s.x0 = Eigen::Vector3d(3.5, 0.3, 0.0); // heading initialized to 0
        s.input_constraint = InputConstraint::box(Eigen::Vector2d(1.0, 1.0));
    }

    PredicateDef goal = ball("mu1", PredicateShape::InsideBall, {0, 1},
                             Eigen::Vector2d(1.0, 3.5), 0.2);
    PredicateDef obstacle = ball("mu2", PredicateShape::OutsideBall, {0, 1},
                                 Eigen::Vector2d(2.5, 2.0), 1.2);
    s.registry.add(goal);
    s.registry.add(obstacle);

    s.formula = parse_formula("F[0,10] G[0,inf] mu1 & G[0,inf] mu2");

    s.channels.push_back(
        {goal, Funnel::constant(n_grid, -5.0, 0.2, -7.0,
                                AdaptMode::GammaOnlyFixedGamma)});
    s.channels.push_back(
        {obstacle, Funnel::constant(n_grid, s.rho_min, 0.5, s.rho_min,
                                    AdaptMode::Frozen)});

    s.cost.kind = CostSpec::Kind::ReachAndEffort;
    s.cost.theta = theta;
    s.cost.goal_pred = "mu1";
    s.noise = NoiseModel::gaussian(noise_variance);
    return s;
}

Scenario complex_scenario(double noise_variance) {
    Scenario s;
    s.name = "complex";
    s.T = 10.0;
    s.dt = 0.01;
    s.rho_min = 0.02;
    const int n_grid = s.steps() + 1;

    s.model = SystemModel::consensus3();
    s.x0.resize(6);
    s.x0 << 3.0, 0.8, 2.0, 0.8, 1.2, 0.7;
    s.input_constraint = InputConstraint::per_block_norm_ball(2, 1.0);

    const std::vector<int> r1{0, 1}, r2{2, 3}, r3{4, 5};
    const Eigen::Vector2d obstacle_center(2.5, 2.5);
    const double r_g = 0.1, r_o = 1.2, r_a = 0.1;
    const double d_max = 1.1, d_min = 0.9;

    std::vector<PredicateDef> preds;
    preds.push_back(ball("mu1", PredicateShape::InsideBall, r1,
                         Eigen::Vector2d(2.0, 4.2), r_g));
    preds.push_back(ball("mu2", PredicateShape::InsideBall, r2,
                         Eigen::Vector2d(3.0, 4.2), r_g));
    preds.push_back(pair_dist("mu3", PredicateShape::PairDistanceMax, r1, r2, d_max));
    preds.push_back(pair_dist("mu4", PredicateShape::PairDistanceMin, r1, r2, d_min));
    preds.push_back(ball("mu5", PredicateShape::OutsideBall, r1, obstacle_center, r_o));
    preds.push_back(ball("mu6", PredicateShape::OutsideBall, r2, obstacle_center, r_o));
    {
        PredicateDef p;
        p.name = "mu7";
        p.shape = PredicateShape::MidpointBall;
        p.sel_a = r1;
        p.sel_b = r2;
        p.sel_c = r3;
        p.radius = r_a;
        preds.push_back(p);
    }
    for (const PredicateDef& p : preds)
        s.registry.add(p);

    s.formula = parse_formula(
        "F[0,7] G[0,inf] mu1 & F[0,7] G[0,inf] mu2 & G[0,inf] mu3 & G[0,inf] mu4"
        " & G[0,inf] mu5 & G[0,inf] mu6 & F[0,3] G[0,inf] mu7");

    auto funnel = [&](double g, double G, double lim) {
        return Funnel::constant(n_grid, g, G, lim, AdaptMode::GammaOnlyFixedGamma);
    };
    s.channels.push_back({preds[0], funnel(-4.0, 0.1, -7.0)}); // goal 1
    s.channels.push_back({preds[1], funnel(-4.0, 0.1, -7.0)}); // goal 2
    s.channels.push_back({preds[2], funnel(0.0, 0.1, 0.0)});   // distance max
    s.channels.push_back({preds[3], funnel(0.0, 0.1, 0.0)});   // distance min
    s.channels.push_back({preds[4], funnel(0.0, 0.5, 0.0)});   // obstacle 1
    s.channels.push_back({preds[5], funnel(0.0, 0.5, 0.0)});   // obstacle 2
    s.channels.push_back({preds[6], funnel(-2.0, 0.1, -4.0)}); // drone midpoint

    s.cost.kind = CostSpec::Kind::InputEnergy;
    s.noise = NoiseModel::gaussian(noise_variance);
    return s;
}

double settle_time(const Trajectory& tr, const PredicateDef& goal, double T) {
    int settle = static_cast<int>(tr.states.size());
    for (int t = static_cast<int>(tr.states.size()) - 1; t >= 0; --t) {
        if (goal.value(tr.states[t]) >= 0.0)
            settle = t;
        else
            break;
    }
    if (settle >= static_cast<int>(tr.states.size()))
        return T;
    return settle * tr.dt;
}

double trajectory_cost(const CostSpec& spec, const Trajectory& tr,
                       const PredicateDef* goal, double dt,
                       ModelKind model_kind) {
    switch (spec.kind) {
    case CostSpec::Kind::ReachAndEffort: {
        if (!goal)
            throw std::runtime_error("ReachAndEffort cost needs a goal predicate");
        double t_star = settle_time(tr, *goal, dt * tr.steps());
        double effort = 0.0;
        for (const Eigen::VectorXd& u : tr.inputs) {
            double v = (model_kind == ModelKind::Unicycle) ? u[0] : u.norm();
            effort += v * v * dt;
        }
        return spec.theta * t_star + effort;
    }
    case CostSpec::Kind::InputEnergy: {
        double energy = 0.0;
        for (const Eigen::VectorXd& u : tr.inputs)
            energy += u.squaredNorm() * dt;
        return energy;
    }
    }
    return 0.0;
}

double shortest_path_length(const Eigen::Vector2d& start,
                            const Eigen::Vector2d& obstacle_center,
                            double clearance_radius,
                            const Eigen::Vector2d& goal_center,
                            double goal_radius) {
    const Eigen::Vector2d a = start - obstacle_center;
    const Eigen::Vector2d b = goal_center - obstacle_center;
    const double da = a.norm(), db = b.norm(), r = clearance_radius;
    if (da < r)
        throw std::runtime_error("start lies inside the obstacle clearance circle");
    if (db < r + goal_radius)
        throw std::runtime_error("goal disk intersects the clearance circle");

    // Straight shot if the segment start->goal_center clears the circle.
    const Eigen::Vector2d seg = goal_center - start;
    double t = std::clamp(-a.dot(seg) / seg.squaredNorm(), 0.0, 1.0);
    if ((a + t * seg).norm() >= r)
        return seg.norm() - goal_radius;

    // Tangent - arc - tangent around the circle.
    double angle = std::acos(std::clamp(a.dot(b) / (da * db), -1.0, 1.0));
    double arc = angle - std::acos(r / da) - std::acos(r / db);
    if (arc < 0.0)
        arc = 0.0;
    return std::sqrt(da * da - r * r) + std::sqrt(db * db - r * r) + r * arc -
           goal_radius;
}

double simple_scenario_path_length() {
    // Goal reached once rho^{mu1} >= rho_min, i.e. within r_g - rho_min of the
    // goal center; the obstacle is cleared at the robustness boundary r_o.
    return shortest_path_length(Eigen::Vector2d(3.5, 0.3), Eigen::Vector2d(2.5, 2.0),
                                1.2, Eigen::Vector2d(1.0, 3.5), 0.2 - 0.05);
}

OptimalSolution analytic_optimum(double theta, double D, double T) {
    double v = std::max(D / T, std::min(1.0, std::sqrt(theta)));
    return {v, theta * D / v + D * v};
}

} // namespace stlpi
