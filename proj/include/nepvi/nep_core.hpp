#pragma once

#include "nepvi/core_vi.hpp"
#include "nepvi/game.hpp"
#include "nepvi/schedule.hpp"
#include "nepvi/trajectory.hpp"

#include <functional>

namespace nepvi {

struct AbrOptions {
    bool record_iterates = true;
    bool record_residual = false;
    std::function<double(const Vec&)> metric;
    // Extra stopping rule checked after every iteration (n, x^{n+1}); when it
    // returns true the run ends and is reported as converged.
    std::function<bool(int, const Vec&)> stop;
    // Replaces the default successive-iterate test when set.
    bool use_default_stop = true;
    // Price/proximal terms forwarded to every best response.
    std::function<BestResponseArgs(int player, const Vec& x)> br_args;
};

// Asynchronous best-response iteration driven by a schedule. The default
// stop fires once the summed step over the last sweep_length() iterations is
// below tol and every player has updated inside that window.
Trajectory async_best_response(const NepProblem& game, const Schedule& sched, const Vec& x0,
                               double tol, int max_iter, const AbrOptions& opts = {});

// ceil(log(eps (1 - gamma) / step0) / log(gamma)), clamped at zero.
int iteration_bound(double gamma_norm, double step0, double eps);

struct ContractionWeights {
    Vec c;
    double norm = 0.0;  // max_i (1/c_i) sum_j Gamma_ij c_j
};
ContractionWeights contraction_weights(const Mat& gamma);

// max_i ||C_i^{-1} x_i|| / c_i
double block_max_norm(const Vec& x, const std::vector<int>& dims, const ScalingConfig& scal,
                      const Vec& c);

// (|| z_i - P_{Q_i}(z_i - F_i(z) - tau z_i) ||)_i
Vec natural_map_residual(const NepProblem& game, const Vec& z, double tau = 0.0);

}  // namespace nepvi
