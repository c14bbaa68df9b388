#pragma once

#include "stlpi/rng.hpp"
#include "stlpi/stl.hpp"

#include <Eigen/Dense>

#include <functional>

namespace stlpi {

enum class ModelKind { SingleIntegrator, Unicycle, ConsensusNetwork };

// Control-affine system xdot = f(x) + g(x)u + w. Only g(x) is visible to
// controller code; the drift term is evaluated by the simulator alone.
struct SystemModel {
    ModelKind kind = ModelKind::SingleIntegrator;
    int n = 2, m = 2;
    double steer_gain = 5.0;   // unicycle: thetadot = steer_gain * omega
    double coupling = 0.1;     // consensus: f(x) = -coupling * (L (x) I2) x
    Eigen::MatrixXd laplacian; // consensus graph Laplacian

    static SystemModel single_integrator();
    static SystemModel unicycle();
    static SystemModel consensus3();

    // g(x) * u
    Eigen::VectorXd input_effect(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u) const;

    // drift f(x); simulator-only, never handed to controllers or the learner
    Eigen::VectorXd drift(const Eigen::VectorXd& x) const;
};

struct NoiseModel {
    enum class Kind { None, GaussianIID } kind = Kind::None;
    double variance = 0.0; // per-dimension

    static NoiseModel none() { return {}; }
    static NoiseModel gaussian(double variance) {
        return {variance > 0.0 ? Kind::GaussianIID : Kind::None, variance};
    }

    Eigen::VectorXd draw(int n, Rng& rng) const;
};

struct InputConstraint {
    enum class Kind { NormBall, PerChannelBox, PerBlockNormBall } kind = Kind::NormBall;
    double r = 1.0;
    Eigen::VectorXd limits; // PerChannelBox
    int block = 2;          // PerBlockNormBall

    static InputConstraint norm_ball(double r) { return {Kind::NormBall, r, {}, 0}; }
    static InputConstraint box(Eigen::VectorXd limits) {
        return {Kind::PerChannelBox, 0.0, std::move(limits), 0};
    }
    static InputConstraint per_block_norm_ball(int block, double r) {
        return {Kind::PerBlockNormBall, r, {}, block};
    }

    Eigen::VectorXd saturate(const Eigen::VectorXd& u) const;
};

// Explicit Euler step: x' = x + (f(x) + g(x)u + w) * dt. Throws on a
// non-finite result.
Eigen::VectorXd step(const SystemModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, const Eigen::VectorXd& w, double dt);

using Policy = std::function<Eigen::VectorXd(const Eigen::VectorXd& x, int t_index)>;

// Simulate T/dt Euler steps; the policy output is saturated before being
// applied and recorded. Noise is drawn once per step and held constant
// within it.
Trajectory rollout(const SystemModel& model, const Policy& policy,
                   const Eigen::VectorXd& x0, double T, double dt,
                   const NoiseModel& noise, const InputConstraint& constraint,
                   Rng& rng);

} // namespace stlpi
