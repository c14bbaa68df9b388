#pragma once

#include "stlpi/controllers.hpp"
#include "stlpi/dynamics.hpp"
#include "stlpi/stl.hpp"

#include <string>
#include <vector>

namespace stlpi {

struct CostSpec {
    enum class Kind { ReachAndEffort, InputEnergy } kind = Kind::InputEnergy;
    double theta = 0.0;         // time/effort trade-off (ReachAndEffort)
    std::string goal_pred;      // goal predicate name (ReachAndEffort)
};

struct Scenario {
    std::string name;
    SystemModel model;
    Eigen::VectorXd x0;
    PredicateRegistry registry;
    FormulaPtr formula;
    std::vector<PredicateChannel> channels; // predicate + initial funnel
    CostSpec cost;
    double T = 10.0;
    double dt = 0.02;
    double rho_min = 0.05;
    ControllerConfig ctrl;
    InputConstraint input_constraint;
    NoiseModel noise;

    int steps() const { return static_cast<int>(std::lround(T / dt)); }

    std::vector<PredicateDef> predicates() const;
    std::vector<Funnel> initial_funnels() const;
};

enum class RobotKind { Integrator, Unicycle };

// Single-robot reach/avoid navigation task; theta sets the cost trade-off.
Scenario simple_scenario(double theta, RobotKind robot, double noise_variance);

// Three-agent consensus-network task: two ground robots reach goals while
// keeping distance bounds and clearing an obstacle; a drone tracks their
// midpoint. Cost is total input energy.
Scenario complex_scenario(double noise_variance);

double trajectory_cost(const CostSpec& spec, const Trajectory& tr,
                       const PredicateDef* goal, double dt,
                       ModelKind model_kind);

// First time after which the goal predicate stays non-negative; T if never.
double settle_time(const Trajectory& tr, const PredicateDef& goal, double T);

// Shortest path from `start` around the circle (center, clearance_radius) to
// the boundary of the goal disk (goal_center, goal_radius). Throws if the
// start lies inside the clearance circle.
double shortest_path_length(const Eigen::Vector2d& start,
                            const Eigen::Vector2d& obstacle_center,
                            double clearance_radius,
                            const Eigen::Vector2d& goal_center,
                            double goal_radius);

// Simple-scenario shortest path length with the rho_min satisfaction margin
// on the goal disk.
double simple_scenario_path_length();

struct OptimalSolution {
    double v_opt;
    double cost;
};

// v_opt = max(D/T, min(1, sqrt(theta))); C(v) = theta*D/v + D*v.
OptimalSolution analytic_optimum(double theta, double D, double T);

} // namespace stlpi
