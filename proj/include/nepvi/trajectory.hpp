#pragma once

#include "nepvi/types.hpp"

#include <limits>
#include <string>
#include <vector>

namespace nepvi {

// One row per iteration. Per-player vectors have one entry per player;
// nat_residual is empty when residuals were not recorded.
struct IterationRecord {
    int iter = 0;
    double step_norm = 0.0;
    Vec player_step;
    Vec nat_residual;
    double metric = std::numeric_limits<double>::quiet_NaN();
    int outer_iter = -1;
    double eps_n = std::numeric_limits<double>::quiet_NaN();
    double merit = std::numeric_limits<double>::quiet_NaN();
};

struct Trajectory {
    std::vector<Vec> iterates;  // x^0, x^1, ... when recorded
    std::vector<IterationRecord> records;
    Vec x;
    bool converged = false;
    int iterations = 0;       // iterations (outer iterations for proximal methods)
    long inner_iterations = 0;
    std::string message;
    double final_residual = std::numeric_limits<double>::quiet_NaN();  // natural map, tau = 0

    // Columns: iter, player, step_norm, nat_residual, metric, outer_iter, eps_n, merit.
    std::string to_csv() const;
    void write_csv(const std::string& path) const;
};

}  // namespace nepvi
