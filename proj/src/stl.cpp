#include "stlpi/stl.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

namespace stlpi {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_interval(double a, double b, bool inf_ok) {
    if (a < 0.0 || b < a)
        throw std::runtime_error("invalid temporal interval");
    if (std::isinf(b) && !inf_ok)
        throw std::runtime_error("unbounded interval not allowed here");
}
} // namespace

FormulaPtr Formula::make_true() {
    return std::make_shared<Formula>(Formula{NodeKind::True});
}
FormulaPtr Formula::pred(std::string name) {
    Formula f{NodeKind::Pred};
    f.pred_name = std::move(name);
    return std::make_shared<Formula>(std::move(f));
}
FormulaPtr Formula::negate(FormulaPtr child) {
    Formula f{NodeKind::Not};
    f.left = std::move(child);
    return std::make_shared<Formula>(std::move(f));
}
FormulaPtr Formula::conj(FormulaPtr l, FormulaPtr r) {
    Formula f{NodeKind::And};
    f.left = std::move(l);
    f.right = std::move(r);
    return std::make_shared<Formula>(std::move(f));
}
FormulaPtr Formula::disj(FormulaPtr l, FormulaPtr r) {
    Formula f{NodeKind::Or};
    f.left = std::move(l);
    f.right = std::move(r);
    return std::make_shared<Formula>(std::move(f));
}
FormulaPtr Formula::until(double a, double b, FormulaPtr l, FormulaPtr r) {
    check_interval(a, b, false);
    Formula f{NodeKind::Until};
    f.a = a;
    f.b = b;
    f.left = std::move(l);
    f.right = std::move(r);
    return std::make_shared<Formula>(std::move(f));
}
FormulaPtr Formula::eventually(double a, double b, FormulaPtr child) {
    check_interval(a, b, true);
    Formula f{NodeKind::Eventually};
    f.a = a;
    f.b = b;
    f.left = std::move(child);
    return std::make_shared<Formula>(std::move(f));
}
FormulaPtr Formula::always(double a, double b, FormulaPtr child) {
    check_interval(a, b, true);
    Formula f{NodeKind::Always};
    f.a = a;
    f.b = b;
    f.left = std::move(child);
    return std::make_shared<Formula>(std::move(f));
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    FormulaPtr parse() {
        FormulaPtr f = parse_or();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        return f;
    }

private:
    const std::string& text_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    std::string peek_ident() {
        skip_ws();
        size_t p = pos_;
        std::string out;
        if (p < text_.size() &&
            (std::isalpha(static_cast<unsigned char>(text_[p])) || text_[p] == '_')) {
            while (p < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[p])) || text_[p] == '_')) {
                out += text_[p++];
            }
        }
        return out;
    }

    double parse_number(bool inf_ok) {
        skip_ws();
        size_t start = pos_;
        if (inf_ok && text_.compare(pos_, 3, "inf") == 0) {
            pos_ += 3;
            return kInf;
        }
        while (pos_ < text_.size() &&
               (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E' ||
                ((text_[pos_] == '+' || text_[pos_] == '-') && pos_ > start &&
                 (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
            ++pos_;
        }
        if (pos_ == start)
            throw ParseError("expected a number", pos_);
        try {
            return std::stod(text_.substr(start, pos_ - start));
        } catch (const std::exception&) {
            throw ParseError("malformed number", start);
        }
    }

    // [a,b] after a temporal operator letter
    std::pair<double, double> parse_interval(bool inf_ok) {
        if (!eat('['))
            throw ParseError("expected '['", pos_);
        double a = parse_number(false);
        if (!eat(','))
            throw ParseError("expected ','", pos_);
        double b = parse_number(inf_ok);
        if (!eat(']'))
            throw ParseError("expected ']'", pos_);
        if (a < 0.0 || b < a)
            throw ParseError("negative or inverted interval bounds", pos_);
        return {a, b};
    }

    FormulaPtr parse_or() {
        FormulaPtr f = parse_and();
        while (eat('|'))
            f = Formula::disj(f, parse_and());
        return f;
    }

    FormulaPtr parse_and() {
        FormulaPtr f = parse_until();
        while (eat('&'))
            f = Formula::conj(f, parse_until());
        return f;
    }

    FormulaPtr parse_until() {
        FormulaPtr f = parse_unary();
        for (;;) {
            skip_ws();
            size_t save = pos_;
            if (peek_ident() == "U") {
                pos_ += 1;
                if (peek() == '[') {
                    auto [a, b] = parse_interval(false);
                    f = Formula::until(a, b, f, parse_unary());
                    continue;
                }
            }
            pos_ = save;
            break;
        }
        return f;
    }

    FormulaPtr parse_unary() {
        skip_ws();
        if (eat('!'))
            return Formula::negate(parse_unary());
        std::string id = peek_ident();
        if ((id == "F" || id == "G")) {
            size_t save = pos_;
            pos_ += 1;
            if (peek() == '[') {
                auto [a, b] = parse_interval(true);
                return id == "F" ? Formula::eventually(a, b, parse_unary())
                                 : Formula::always(a, b, parse_unary());
            }
            pos_ = save;
        }
        return parse_atom();
    }

    FormulaPtr parse_atom() {
        skip_ws();
        if (eat('(')) {
            FormulaPtr f = parse_or();
            if (!eat(')'))
                throw ParseError("expected ')'", pos_);
            return f;
        }
        std::string id = peek_ident();
        if (id.empty())
            throw ParseError("expected a predicate, 'true', or '('", pos_);
        pos_ += id.size();
        if (id == "true")
            return Formula::make_true();
        return Formula::pred(id);
    }
};

std::string fmt_bound(double v) {
    if (std::isinf(v))
        return "inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

FormulaPtr parse_formula(const std::string& text) { return Parser(text).parse(); }

std::string to_string(const Formula& f) {
    switch (f.kind) {
    case NodeKind::True:
        return "true";
    case NodeKind::Pred:
        return f.pred_name;
    case NodeKind::Not:
        return "!(" + to_string(*f.left) + ")";
    case NodeKind::And:
        return "(" + to_string(*f.left) + " & " + to_string(*f.right) + ")";
    case NodeKind::Or:
        return "(" + to_string(*f.left) + " | " + to_string(*f.right) + ")";
    case NodeKind::Until:
        return "(" + to_string(*f.left) + " U[" + fmt_bound(f.a) + "," +
               fmt_bound(f.b) + "] " + to_string(*f.right) + ")";
    case NodeKind::Eventually:
        return "F[" + fmt_bound(f.a) + "," + fmt_bound(f.b) + "](" +
               to_string(*f.left) + ")";
    case NodeKind::Always:
        return "G[" + fmt_bound(f.a) + "," + fmt_bound(f.b) + "](" +
               to_string(*f.left) + ")";
    }
    return {};
}

bool structurally_equal(const Formula& a, const Formula& b) {
    if (a.kind != b.kind)
        return false;
    switch (a.kind) {
    case NodeKind::True:
        return true;
    case NodeKind::Pred:
        return a.pred_name == b.pred_name;
    case NodeKind::Not:
        return structurally_equal(*a.left, *b.left);
    case NodeKind::And:
    case NodeKind::Or:
        return structurally_equal(*a.left, *b.left) &&
               structurally_equal(*a.right, *b.right);
    case NodeKind::Until:
        return a.a == b.a && a.b == b.b && structurally_equal(*a.left, *b.left) &&
               structurally_equal(*a.right, *b.right);
    case NodeKind::Eventually:
    case NodeKind::Always:
        return a.a == b.a && a.b == b.b && structurally_equal(*a.left, *b.left);
    }
    return false;
}

double horizon(const Formula& f, double unbounded_horizon) {
    auto bound = [&](double b) { return std::isinf(b) ? unbounded_horizon : b; };
    switch (f.kind) {
    case NodeKind::True:
    case NodeKind::Pred:
        return 0.0;
    case NodeKind::Not:
        return horizon(*f.left, unbounded_horizon);
    case NodeKind::And:
    case NodeKind::Or:
        return std::max(horizon(*f.left, unbounded_horizon),
                        horizon(*f.right, unbounded_horizon));
    case NodeKind::Until:
        return f.b + std::max(horizon(*f.left, unbounded_horizon),
                              horizon(*f.right, unbounded_horizon));
    case NodeKind::Eventually:
    case NodeKind::Always:
        return bound(f.b) + horizon(*f.left, unbounded_horizon);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Predicates

namespace {

Eigen::VectorXd select(const Eigen::VectorXd& x, const std::vector<int>& sel) {
    Eigen::VectorXd out(sel.size());
    for (size_t i = 0; i < sel.size(); ++i)
        out[i] = x[sel[i]];
    return out;
}

constexpr double kSingularTol = 1e-9;

} // namespace

double PredicateDef::value(const Eigen::VectorXd& x) const {
    switch (shape) {
    case PredicateShape::InsideBall:
        return radius - (select(x, sel_a) - center).norm();
    case PredicateShape::OutsideBall:
        return (select(x, sel_a) - center).norm() - radius;
    case PredicateShape::PairDistanceMax:
        return radius - (select(x, sel_a) - select(x, sel_b)).norm();
    case PredicateShape::PairDistanceMin:
        return (select(x, sel_a) - select(x, sel_b)).norm() - radius;
    case PredicateShape::MidpointBall:
        return radius -
               (0.5 * (select(x, sel_a) + select(x, sel_b)) - select(x, sel_c)).norm();
    }
    return 0.0;
}

bool PredicateDef::gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
    grad.setZero(x.size());
    Eigen::VectorXd d;
    switch (shape) {
    case PredicateShape::InsideBall:
    case PredicateShape::OutsideBall: {
        d = select(x, sel_a) - center;
        double n = d.norm();
        if (n < kSingularTol)
            return false;
        double s = (shape == PredicateShape::InsideBall) ? -1.0 : 1.0;
        for (size_t i = 0; i < sel_a.size(); ++i)
            grad[sel_a[i]] = s * d[i] / n;
        return true;
    }
    case PredicateShape::PairDistanceMax:
    case PredicateShape::PairDistanceMin: {
        d = select(x, sel_a) - select(x, sel_b);
        double n = d.norm();
        if (n < kSingularTol)
            return false;
        double s = (shape == PredicateShape::PairDistanceMax) ? -1.0 : 1.0;
        for (size_t i = 0; i < sel_a.size(); ++i) {
            grad[sel_a[i]] = s * d[i] / n;
            grad[sel_b[i]] = -s * d[i] / n;
        }
        return true;
    }
    case PredicateShape::MidpointBall: {
        d = 0.5 * (select(x, sel_a) + select(x, sel_b)) - select(x, sel_c);
        double n = d.norm();
        if (n < kSingularTol)
            return false;
        for (size_t i = 0; i < sel_a.size(); ++i) {
            grad[sel_a[i]] = -0.5 * d[i] / n;
            grad[sel_b[i]] = -0.5 * d[i] / n;
            grad[sel_c[i]] = d[i] / n;
        }
        return true;
    }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Robustness evaluation
//
// Signals are computed bottom-up per node, but only up to the highest index
// the parent actually reads (`need`), so a window that would be empty at an
// unused tail index is not an error. Windowed min/max use a monotonic deque;
// window ends are nondecreasing in the evaluation index.

namespace {

int ceil_idx(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }
int floor_idx(double x) { return static_cast<int>(std::floor(x + 1e-9)); }

struct Window {
    int lo, hi; // inclusive grid indices
};

Window grid_window(int i, double a, double b, double dt, int last) {
    double t = i * dt;
    int lo = ceil_idx((t + a) / dt);
    int hi = std::isinf(b) ? last : floor_idx((t + b) / dt);
    hi = std::min(hi, last);
    if (lo > hi)
        throw std::runtime_error(
            "empty STL evaluation window (formula horizon exceeds trajectory)");
    return {lo, hi};
}

std::vector<double> eval_signal(const Formula& f, const PredicateRegistry& reg,
                                const Trajectory& tr, int need) {
    const int last = static_cast<int>(tr.states.size()) - 1;
    const int n = need + 1;
    std::vector<double> out(n);

    switch (f.kind) {
    case NodeKind::True:
        std::fill(out.begin(), out.end(), std::numeric_limits<double>::infinity());
        return out;
    case NodeKind::Pred: {
        const PredicateDef& p = reg.at(f.pred_name);
        for (int i = 0; i < n; ++i)
            out[i] = p.value(tr.states[i]);
        return out;
    }
    case NodeKind::Not: {
        out = eval_signal(*f.left, reg, tr, need);
        for (double& v : out)
            v = -v;
        return out;
    }
    case NodeKind::And:
    case NodeKind::Or: {
        std::vector<double> l = eval_signal(*f.left, reg, tr, need);
        std::vector<double> r = eval_signal(*f.right, reg, tr, need);
        for (int i = 0; i < n; ++i)
            out[i] = (f.kind == NodeKind::And) ? std::min(l[i], r[i])
                                               : std::max(l[i], r[i]);
        return out;
    }
    case NodeKind::Eventually:
    case NodeKind::Always: {
        int child_need = std::isinf(f.b)
                             ? last
                             : std::min(last, floor_idx((need * tr.dt + f.b) / tr.dt));
        std::vector<double> c = eval_signal(*f.left, reg, tr, child_need);
        const bool is_max = f.kind == NodeKind::Eventually;
        std::deque<int> dq; // indices, extremal at front
        int added = -1;
        for (int i = 0; i < n; ++i) {
            Window w = grid_window(i, f.a, f.b, tr.dt, last);
            while (added < w.hi) {
                ++added;
                while (!dq.empty() &&
                       (is_max ? c[dq.back()] <= c[added] : c[dq.back()] >= c[added]))
                    dq.pop_back();
                dq.push_back(added);
            }
            while (dq.front() < w.lo)
                dq.pop_front();
            out[i] = c[dq.front()];
        }
        return out;
    }
    case NodeKind::Until: {
        int child_need = std::min(last, floor_idx((need * tr.dt + f.b) / tr.dt));
        std::vector<double> l = eval_signal(*f.left, reg, tr, child_need);
        std::vector<double> r = eval_signal(*f.right, reg, tr, child_need);
        for (int i = 0; i < n; ++i) {
            Window w = grid_window(i, f.a, f.b, tr.dt, last);
            double best = -std::numeric_limits<double>::infinity();
            double run_min = std::numeric_limits<double>::infinity();
            for (int t1 = i; t1 <= w.hi; ++t1) {
                run_min = std::min(run_min, l[t1]);
                if (t1 >= w.lo)
                    best = std::max(best, std::min(r[t1], run_min));
            }
            out[i] = best;
        }
        return out;
    }
    }
    return out;
}

} // namespace

std::vector<double> robustness_signal(const Formula& f, const PredicateRegistry& reg,
                                      const Trajectory& tr) {
    if (tr.states.size() != tr.inputs.size() + 1)
        throw std::runtime_error("malformed trajectory");
    return eval_signal(f, reg, tr, static_cast<int>(tr.states.size()) - 1);
}

double robustness(const Formula& f, const PredicateRegistry& reg,
                  const Trajectory& tr, int t_index) {
    if (t_index < 0 || t_index >= static_cast<int>(tr.states.size()))
        throw std::runtime_error("t_index outside trajectory grid");
    if (tr.states.size() != tr.inputs.size() + 1)
        throw std::runtime_error("malformed trajectory");
    return eval_signal(f, reg, tr, t_index)[t_index];
}

} // namespace stlpi
