#pragma once

#include "nepvi/types.hpp"

#include <functional>

namespace nepvi {

// Nested dual bisection for problems whose primal solution p(mu) is explicit
// given the multipliers. Level i bisects mu_i while levels i+1..m-1 are
// re-solved for every trial value. The usage g_i(mu) = w_i' p(mu) must be
// nonincreasing in mu_i once the inner levels are optimized, which holds
// whenever the primal objective is strictly concave.
struct NestedBisectionProblem {
    int rows = 0;
    Vec caps;                                        // alpha
    std::function<Vec(const Vec& mu)> usage;         // (w_i' p(mu))_i
    // Upper end of the search interval for mu_level given mu_0..mu_{level-1}.
    // Return a non-positive or non-finite value to request doubling.
    std::function<double(int level, const Vec& mu)> upper;
};

struct NestedBisectionResult {
    Vec mu;
    long iterations = 0;   // innermost midpoints reached through midpoints of every outer level
    long evaluations = 0;  // every usage evaluation, probes and re-solves included
    long bound = 0;        // product over levels of ceil(log2(U_i / eps))
    Vec interval_max;      // largest interval length seen per level
};

NestedBisectionResult nested_dual_bisection(const NestedBisectionProblem& prob, double eps,
                                            int max_depth);

}  // namespace nepvi
