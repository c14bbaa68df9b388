#include "stlpi/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace stlpi {

SystemModel SystemModel::single_integrator() {
    SystemModel m;
    m.kind = ModelKind::SingleIntegrator;
    m.n = 2;
    m.m = 2;
    return m;
}

SystemModel SystemModel::unicycle() {
    SystemModel m;
    m.kind = ModelKind::Unicycle;
    m.n = 3;
    m.m = 2;
    return m;
}

SystemModel SystemModel::consensus3() {
    SystemModel m;
    m.kind = ModelKind::ConsensusNetwork;
    m.n = 6;
    m.m = 6;
    m.coupling = 0.1;
    m.laplacian.resize(3, 3);
    m.laplacian << 2, -1, -1, -1, 2, -1, -1, -1, 2;
    return m;
}

Eigen::VectorXd SystemModel::input_effect(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& u) const {
    switch (kind) {
    case ModelKind::SingleIntegrator:
    case ModelKind::ConsensusNetwork:
        return u;
    case ModelKind::Unicycle: {
        Eigen::VectorXd gu(3);
        double theta = x[2];
        gu[0] = std::cos(theta) * u[0];
        gu[1] = std::sin(theta) * u[0];
        gu[2] = steer_gain * u[1];
        return gu;
    }
    }
    return u;
}

Eigen::VectorXd SystemModel::drift(const Eigen::VectorXd& x) const {
    switch (kind) {
    case ModelKind::SingleIntegrator:
    case ModelKind::Unicycle:
        return Eigen::VectorXd::Zero(n);
    case ModelKind::ConsensusNetwork: {
        // f(x) = -c (L kron I2) x
        Eigen::VectorXd f(n);
        int agents = static_cast<int>(laplacian.rows());
        for (int i = 0; i < agents; ++i) {
            Eigen::Vector2d acc = Eigen::Vector2d::Zero();
            for (int j = 0; j < agents; ++j)
                acc += laplacian(i, j) * x.segment<2>(2 * j);
            f.segment<2>(2 * i) = -coupling * acc;
        }
        return f;
    }
    }
    return Eigen::VectorXd::Zero(n);
}

Eigen::VectorXd NoiseModel::draw(int n, Rng& rng) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    if (kind == Kind::GaussianIID) {
        double sd = std::sqrt(variance);
        for (int i = 0; i < n; ++i)
            w[i] = sd * rng.normal();
    }
    return w;
}

Eigen::VectorXd InputConstraint::saturate(const Eigen::VectorXd& u) const {
    switch (kind) {
    case Kind::NormBall: {
        double norm = u.norm();
        return norm > r ? Eigen::VectorXd(u * (r / norm)) : u;
    }
    case Kind::PerChannelBox: {
        Eigen::VectorXd out = u;
        for (int i = 0; i < u.size(); ++i)
            out[i] = std::clamp(u[i], -limits[i], limits[i]);
        return out;
    }
    case Kind::PerBlockNormBall: {
        Eigen::VectorXd out = u;
        for (int i = 0; i + block <= u.size(); i += block) {
            double norm = out.segment(i, block).norm();
            if (norm > r)
                out.segment(i, block) *= r / norm;
        }
        return out;
    }
    }
    return u;
}

Eigen::VectorXd step(const SystemModel& model, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, const Eigen::VectorXd& w, double dt) {
    Eigen::VectorXd next =
        x + (model.drift(x) + model.input_effect(x, u) + w) * dt;
    if (!next.allFinite())
        throw std::runtime_error("state diverged to a non-finite value");
    return next;
}

Trajectory rollout(const SystemModel& model, const Policy& policy,
                   const Eigen::VectorXd& x0, double T, double dt,
                   const NoiseModel& noise, const InputConstraint& constraint,
                   Rng& rng) {
    int steps = static_cast<int>(std::lround(T / dt));
    Trajectory tr;
    tr.dt = dt;
    tr.states.reserve(steps + 1);
    tr.inputs.reserve(steps);
    tr.states.push_back(x0);
    Eigen::VectorXd x = x0;
    for (int t = 0; t < steps; ++t) {
        Eigen::VectorXd u = constraint.saturate(policy(x, t));
        Eigen::VectorXd w = noise.draw(model.n, rng);
        x = step(model, x, u, w, dt);
        tr.inputs.push_back(std::move(u));
        tr.states.push_back(x);
    }
    return tr;
}

} // namespace stlpi
