#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlpi {

// ---------------------------------------------------------------------------
// Formula AST

enum class NodeKind { True, Pred, Not, And, Or, Until, Eventually, Always };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    NodeKind kind;
    std::string pred_name;        // Pred only
    double a = 0.0, b = 0.0;      // temporal bounds; b may be +inf for F/G
    FormulaPtr left, right;       // unary nodes use left

    static FormulaPtr make_true();
    static FormulaPtr pred(std::string name);
    static FormulaPtr negate(FormulaPtr child);
    static FormulaPtr conj(FormulaPtr l, FormulaPtr r);
    static FormulaPtr disj(FormulaPtr l, FormulaPtr r);
    static FormulaPtr until(double a, double b, FormulaPtr l, FormulaPtr r);
    static FormulaPtr eventually(double a, double b, FormulaPtr child);
    static FormulaPtr always(double a, double b, FormulaPtr child);
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
          position(pos) {}
    size_t position;
};

// Grammar: true | <ident> | !f | f & f | f "|" f | (f)
//          | F[a,b]f | G[a,b]f | G[a,inf]f | f U[a,b] f
// '&' binds tighter than '|', 'U' tighter than '&', unary operators tightest.
FormulaPtr parse_formula(const std::string& text);

// Canonical printer; parse_formula(to_string(f)) reproduces f.
std::string to_string(const Formula& f);

bool structurally_equal(const Formula& a, const Formula& b);

// Time horizon; unbounded G/F intervals count as extending to
// `unbounded_horizon` seconds.
double horizon(const Formula& f, double unbounded_horizon);

// ---------------------------------------------------------------------------
// Predicates

enum class PredicateShape {
    InsideBall,      // h = radius - |x[selA] - center|
    OutsideBall,     // h = |x[selA] - center| - radius
    PairDistanceMax, // h = radius - |x[selA] - x[selB]|
    PairDistanceMin, // h = |x[selA] - x[selB]| - radius
    MidpointBall     // h = radius - |(x[selA]+x[selB])/2 - x[selC]|
};

struct PredicateDef {
    std::string name;
    PredicateShape shape = PredicateShape::InsideBall;
    std::vector<int> sel_a, sel_b, sel_c; // index selections into the state
    Eigen::VectorXd center;               // ball shapes only
    double radius = 0.0;                  // doubles as dmax/dmin for pair shapes

    double value(const Eigen::VectorXd& x) const;

    // Gradient of the robustness wrt the full state. Returns false (and zeros
    // the gradient) at the singular ball center, within tolerance 1e-9.
    bool gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const;
};

struct PredicateRegistry {
    std::map<std::string, PredicateDef> defs;

    const PredicateDef& at(const std::string& name) const {
        auto it = defs.find(name);
        if (it == defs.end())
            throw std::runtime_error("unknown predicate: " + name);
        return it->second;
    }
    void add(PredicateDef d) { defs[d.name] = std::move(d); }
};

// ---------------------------------------------------------------------------
// Trajectories

struct Trajectory {
    double dt = 0.0;
    std::vector<Eigen::VectorXd> states; // steps()+1 rows
    std::vector<Eigen::VectorXd> inputs; // steps() rows

    int steps() const { return static_cast<int>(inputs.size()); }
};

// Spatial robustness of f at grid index t_index. Interval [t+a, t+b] maps to
// grid indices ceil((t+a)/dt) .. floor((t+b)/dt), clamped to the trajectory
// end; an empty window after clamping is an error.
double robustness(const Formula& f, const PredicateRegistry& reg,
                  const Trajectory& tr, int t_index);

// Full robustness signal of f over the trajectory grid.
std::vector<double> robustness_signal(const Formula& f,
                                      const PredicateRegistry& reg,
                                      const Trajectory& tr);

} // namespace stlpi
