#include "stlpi/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stlpi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Window {
    int lo, hi;
};

Window oracle_window(int i, double a, double b, double dt, int last) {
    double t = i * dt;
    int lo = static_cast<int>(std::ceil((t + a) / dt - 1e-9));
    int hi = std::isinf(b) ? last
                           : static_cast<int>(std::floor((t + b) / dt + 1e-9));
    hi = std::min(hi, last);
    if (lo > hi)
        throw std::runtime_error("empty STL evaluation window (oracle)");
    return {lo, hi};
}

} // namespace

double robustness_oracle(const Formula& f, const PredicateRegistry& reg,
                         const Trajectory& tr, int i) {
    const int last = static_cast<int>(tr.states.size()) - 1;
    switch (f.kind) {
    case NodeKind::True:
        return kInf;
    case NodeKind::Pred:
        return reg.at(f.pred_name).value(tr.states[i]);
    case NodeKind::Not:
        return -robustness_oracle(*f.left, reg, tr, i);
    case NodeKind::And:
        return std::min(robustness_oracle(*f.left, reg, tr, i),
                        robustness_oracle(*f.right, reg, tr, i));
    case NodeKind::Or:
        return std::max(robustness_oracle(*f.left, reg, tr, i),
                        robustness_oracle(*f.right, reg, tr, i));
    case NodeKind::Eventually:
    case NodeKind::Always: {
        Window w = oracle_window(i, f.a, f.b, tr.dt, last);
        double acc = (f.kind == NodeKind::Eventually) ? -kInf : kInf;
        for (int t1 = w.lo; t1 <= w.hi; ++t1) {
            double v = robustness_oracle(*f.left, reg, tr, t1);
            acc = (f.kind == NodeKind::Eventually) ? std::max(acc, v)
                                                   : std::min(acc, v);
        }
        return acc;
    }
    case NodeKind::Until: {
        Window w = oracle_window(i, f.a, f.b, tr.dt, last);
        double best = -kInf;
        for (int t1 = w.lo; t1 <= w.hi; ++t1) {
            double v = robustness_oracle(*f.right, reg, tr, t1);
            for (int t2 = i; t2 <= t1; ++t2)
                v = std::min(v, robustness_oracle(*f.left, reg, tr, t2));
            best = std::max(best, v);
        }
        return best;
    }
    }
    return 0.0;
}

bool boolean_oracle(const Formula& f, const PredicateRegistry& reg,
                    const Trajectory& tr, int i) {
    const int last = static_cast<int>(tr.states.size()) - 1;
    switch (f.kind) {
    case NodeKind::True:
        return true;
    case NodeKind::Pred:
        return reg.at(f.pred_name).value(tr.states[i]) >= 0.0;
    case NodeKind::Not:
        return !boolean_oracle(*f.left, reg, tr, i);
    case NodeKind::And:
        return boolean_oracle(*f.left, reg, tr, i) &&
               boolean_oracle(*f.right, reg, tr, i);
    case NodeKind::Or:
        return boolean_oracle(*f.left, reg, tr, i) ||
               boolean_oracle(*f.right, reg, tr, i);
    case NodeKind::Eventually:
    case NodeKind::Always: {
        Window w = oracle_window(i, f.a, f.b, tr.dt, last);
        for (int t1 = w.lo; t1 <= w.hi; ++t1) {
            bool v = boolean_oracle(*f.left, reg, tr, t1);
            if (f.kind == NodeKind::Eventually && v)
                return true;
            if (f.kind == NodeKind::Always && !v)
                return false;
        }
        return f.kind == NodeKind::Always;
    }
    case NodeKind::Until: {
        Window w = oracle_window(i, f.a, f.b, tr.dt, last);
        for (int t1 = w.lo; t1 <= w.hi; ++t1) {
            if (!boolean_oracle(*f.right, reg, tr, t1))
                continue;
            bool ok = true;
            for (int t2 = i; t2 <= t1 && ok; ++t2)
                ok = boolean_oracle(*f.left, reg, tr, t2);
            if (ok)
                return true;
        }
        return false;
    }
    }
    return false;
}

FormulaPtr random_formula(Rng& rng, int n_preds, int max_depth, double dt) {
    auto rand_pred = [&]() {
        return Formula::pred("p" + std::to_string(rng.next_u64() % n_preds));
    };
    if (max_depth == 0)
        return rand_pred();
    // Interval offsets are multiples of dt so nesting four temporal layers
    // keeps the outermost window inside a 13-sample grid.
    auto rand_interval = [&]() {
        double a = static_cast<double>(rng.next_u64() % 3) * dt;
        double b = a + static_cast<double>(rng.next_u64() % 4) * dt;
        return std::pair<double, double>(a, b);
    };
    switch (rng.next_u64() % 7) {
    case 0:
        return rand_pred();
    case 1:
        return Formula::negate(random_formula(rng, n_preds, max_depth - 1, dt));
    case 2:
        return Formula::conj(random_formula(rng, n_preds, max_depth - 1, dt),
                             random_formula(rng, n_preds, max_depth - 1, dt));
    case 3:
        return Formula::disj(random_formula(rng, n_preds, max_depth - 1, dt),
                             random_formula(rng, n_preds, max_depth - 1, dt));
    case 4: {
        auto [a, b] = rand_interval();
        return Formula::eventually(a, b,
                                   random_formula(rng, n_preds, max_depth - 1, dt));
    }
    case 5: {
        auto [a, b] = rand_interval();
        return Formula::always(a, b,
                               random_formula(rng, n_preds, max_depth - 1, dt));
    }
    default: {
        auto [a, b] = rand_interval();
        return Formula::until(a, b,
                              random_formula(rng, n_preds, max_depth - 1, dt),
                              random_formula(rng, n_preds, max_depth - 1, dt));
    }
    }
}

Trajectory random_trajectory(Rng& rng, int n_samples, double dt) {
    Trajectory tr;
    tr.dt = dt;
    Eigen::VectorXd x(2);
    x << 4.0 * rng.uniform() - 2.0, 4.0 * rng.uniform() - 2.0;
    tr.states.push_back(x);
    for (int i = 1; i < n_samples; ++i) {
        Eigen::VectorXd u(2);
        u << rng.normal(), rng.normal();
        x += 0.3 * u;
        tr.states.push_back(x);
        tr.inputs.push_back(u);
    }
    return tr;
}

PredicateRegistry random_registry(Rng& rng, int n_preds) {
    PredicateRegistry reg;
    for (int i = 0; i < n_preds; ++i) {
        PredicateDef p;
        p.name = "p" + std::to_string(i);
        p.shape = (rng.next_u64() % 2) ? PredicateShape::InsideBall
                                       : PredicateShape::OutsideBall;
        p.sel_a = {0, 1};
        p.center = Eigen::Vector2d(4.0 * rng.uniform() - 2.0,
                                   4.0 * rng.uniform() - 2.0);
        p.radius = 0.2 + 1.5 * rng.uniform();
        reg.add(p);
    }
    return reg;
}

} // namespace stlpi
