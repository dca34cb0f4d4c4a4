#include "nepvi/bisection.hpp"

#include <cmath>

namespace nepvi {

namespace {

struct Nest {
    const NestedBisectionProblem& prob;
    double eps;
    long iterations = 0;
    long evaluations = 0;
    Vec interval_max;

    Vec usage(const Vec& mu) {
        ++evaluations;
        return prob.usage(mu);
    }

    // Solves levels >= level in place; on return mu[level..] holds the
    // feasible end of each bracket. on_path is true when every enclosing
    // level is at a bisection midpoint; only those innermost midpoints count
    // as iterations; probes at zero, bracket expansion and the final re-solve
    // are overhead and show up in evaluations only.
    void solve(int level, Vec& mu, bool on_path) {
        if (level == prob.rows) return;
        const double cap = prob.caps(level);
        const bool leaf = level + 1 == prob.rows;

        mu(level) = 0.0;
        solve(level + 1, mu, false);
        if (usage(mu)(level) <= cap) return;  // slack at zero, smaller mu wins ties

        double hi = prob.upper ? prob.upper(level, mu) : 0.0;
        if (!(hi > 0.0) || !std::isfinite(hi)) hi = 1.0;
        for (int expand = 0;; ++expand) {
            mu(level) = hi;
            solve(level + 1, mu, false);
            if (usage(mu)(level) <= cap) break;
            if (expand > 200) throw Error("nested bisection: constraint " + std::to_string(level) +
                                          " cannot be satisfied (infeasible set)");
            hi *= 2.0;
        }
        interval_max(level) = std::max(interval_max(level), hi);

        double lo = 0.0;
        while (hi - lo > eps) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            mu(level) = mid;
            solve(level + 1, mu, on_path);
            if (leaf && on_path) ++iterations;
            if (usage(mu)(level) < cap)
                hi = mid;
            else
                lo = mid;
        }
        mu(level) = hi;
        solve(level + 1, mu, false);
    }
};

}  // namespace

NestedBisectionResult nested_dual_bisection(const NestedBisectionProblem& prob, double eps,
                                            int max_depth) {
    require(prob.rows >= 0 && prob.caps.size() == prob.rows, "nested bisection: caps size mismatch");
    require(eps > 0.0, "nested bisection: accuracy must be positive");
    if (prob.rows > max_depth)
        throw Error("nested bisection: " + std::to_string(prob.rows) +
                    " constraint rows exceed the nesting depth cap " + std::to_string(max_depth));
    Nest nest{prob, eps, 0, 0, Vec::Zero(prob.rows)};
    NestedBisectionResult res;
    res.mu = Vec::Zero(prob.rows);
    nest.solve(0, res.mu, true);
    res.iterations = nest.iterations;
    res.evaluations = nest.evaluations;
    res.interval_max = nest.interval_max;
    res.bound = 1;
    for (int i = 0; i < prob.rows; ++i) {
        const double u = nest.interval_max(i);
        const long steps = u > eps ? static_cast<long>(std::ceil(std::log2(u / eps))) : 1;
        res.bound *= std::max(1L, steps);
    }
    return res;
}

}  // namespace nepvi
