#include "nepvi/core_vi.hpp"
#include "nepvi/game.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>

namespace nepvi {

Mat numeric_jacobian(const NepProblem& game, const Vec& x, double h) {
    const int n = game.dim();
    Mat J(n, n);
    for (int c = 0; c < n; ++c) {
        const double step = h * std::max(1.0, std::abs(x(c)));
        Vec xp = x, xm = x;
        xp(c) += step;
        xm(c) -= step;
        J.col(c) = (game.F(xp) - game.F(xm)) / (2.0 * step);
    }
    return J;
}

CondensedMatrices sampled_condensed(const NepProblem& game, int samples, std::uint64_t seed,
                                    const ScalingConfig& scal) {
    require(samples >= 1, "sampled_condensed: need at least one sample");
    scal.validate();
    const int I = game.num_players();
    require(scal.block_scalings.empty() || static_cast<int>(scal.block_scalings.size()) == I,
            "sampled_condensed: one scaling matrix per player expected");

    std::mt19937_64 rng(seed);
    Vec alpha = Vec::Constant(I, std::numeric_limits<double>::infinity());
    Mat beta = Mat::Zero(I, I);
    for (int s = 0; s < samples; ++s) {
        Vec x(game.dim());
        for (int i = 0; i < I; ++i) {
            const auto& set = game.players[i].set;
            Vec v(game.players[i].dim);
            for (int k = 0; k < v.size(); ++k) {
                double lo = set.lower.size() ? set.lower(k) : -1.0;
                double hi = set.upper.size() ? set.upper(k) : 1.0;
                if (!std::isfinite(lo)) lo = -1.0;
                if (!std::isfinite(hi)) hi = lo + 2.0;
                v(k) = std::uniform_real_distribution<double>(lo, hi)(rng);
            }
            game.set_block(x, i, game.project_block(i, v));
        }
        if (!game.is_feasible(x, 1e-7)) throw Error("sampled_condensed: cannot sample a feasible point");
        const Mat J = numeric_jacobian(game, x);
        for (int i = 0; i < I; ++i) {
            const int oi = game.offset(i), di = game.players[i].dim;
            const Mat Ci = scal.block_scalings.empty() ? Mat::Identity(di, di) : scal.block_scalings[i];
            const Mat Jii = Ci.transpose() * J.block(oi, oi, di, di) * Ci;
            alpha(i) = std::min(alpha(i), lambda_least(Jii));
            for (int j = 0; j < I; ++j) {
                if (j == i) continue;
                const int oj = game.offset(j), dj = game.players[j].dim;
                const Mat Cj = scal.block_scalings.empty() ? Mat::Identity(dj, dj) : scal.block_scalings[j];
                const Mat Jij = Ci.transpose() * J.block(oi, oj, di, dj) * Cj;
                Eigen::JacobiSVD<Mat> svd(Jij);
                beta(i, j) = std::max(beta(i, j), svd.singularValues()(0));
            }
        }
    }
    CondensedMatrices cm = condensed_from_bounds(alpha, beta);
    cm.heuristic = true;
    return cm;
}

}  // namespace nepvi
