#include "nepvi/nep_core.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace nepvi {

Trajectory async_best_response(const NepProblem& game, const Schedule& sched, const Vec& x0,
                               double tol, int max_iter, const AbrOptions& opts) {
    const int I = game.num_players();
    require(sched.players() == I, "async_best_response: schedule is for " +
                                      std::to_string(sched.players()) + " players, game has " +
                                      std::to_string(I));
    require(x0.size() == game.dim(), "async_best_response: x0 has the wrong dimension");
    if (!game.is_feasible(x0, 1e-8)) throw Error("async_best_response: x0 is infeasible");

    const int depth = sched.max_delay() + 1;
    std::deque<Vec> history{x0};  // history.back() is x^n, history[k] is x^{n - size + 1 + k}
    Trajectory traj;
    if (opts.record_iterates) traj.iterates.push_back(x0);

    const int window = sched.sweep_length();
    std::vector<int> last_update(I, -1);
    std::deque<double> recent_steps;
    double recent_sum = 0.0;

    Vec x = x0;
    int n = 0;
    for (; n < max_iter; ++n) {
        Vec next = x;
        Vec pstep = Vec::Zero(I);
        const int base = n - static_cast<int>(history.size()) + 1;
        for (int i = 0; i < I; ++i) {
            if (!sched.updates(n, i)) continue;
            Vec read = x;
            for (int j = 0; j < I; ++j) {
                if (j == i) continue;
                const int t = sched.tau(n, i, j);
                if (t < base || t > n)
                    throw Error("async_best_response: schedule reads iterate " + std::to_string(t) +
                                " at n=" + std::to_string(n) + " outside the kept history");
                game.set_block(read, j, game.block(history[t - base], j));
            }
            const BestResponseArgs args = opts.br_args ? opts.br_args(i, read) : BestResponseArgs{};
            const Vec bi = game.best_response(i, read, args);
            pstep(i) = (bi - game.block(x, i)).norm();
            game.set_block(next, i, bi);
            last_update[i] = n;
        }

        IterationRecord rec;
        rec.iter = n;
        rec.step_norm = (next - x).norm();
        rec.player_step = pstep;
        if (opts.record_residual) rec.nat_residual = natural_map_residual(game, next);
        if (opts.metric) rec.metric = opts.metric(next);
        traj.records.push_back(rec);

        x = next;
        history.push_back(x);
        while (static_cast<int>(history.size()) > depth) history.pop_front();
        if (opts.record_iterates) traj.iterates.push_back(x);
        if (!x.allFinite()) {
            traj.message = "iterate became non-finite";
            ++n;
            break;
        }

        recent_steps.push_back(rec.step_norm);
        recent_sum += rec.step_norm;
        if (static_cast<int>(recent_steps.size()) > window) {
            recent_sum -= recent_steps.front();
            recent_steps.pop_front();
        }
        if (opts.stop && opts.stop(n, x)) {
            traj.converged = true;
            ++n;
            break;
        }
        if (opts.use_default_stop && static_cast<int>(recent_steps.size()) == window) {
            bool all = true;
            for (int i = 0; i < I; ++i) all = all && last_update[i] >= n + 1 - window;
            double s = 0.0;
            for (double v : recent_steps) s += v;  // exact sum, avoids drift of the running total
            if (all && s <= tol) {
                traj.converged = true;
                ++n;
                break;
            }
        }
    }
    traj.x = x;
    traj.iterations = n;
    if (traj.message.empty())
        traj.message = traj.converged ? "converged" : "iteration cap reached without convergence";
    return traj;
}

int iteration_bound(double gamma_norm, double step0, double eps) {
    require(gamma_norm >= 0.0 && gamma_norm < 1.0, "iteration_bound: contraction factor must be < 1");
    require(eps > 0.0, "iteration_bound: eps must be positive");
    require(step0 >= 0.0, "iteration_bound: step0 must be nonnegative");
    if (step0 == 0.0) return 0;
    if (gamma_norm == 0.0) return eps >= step0 ? 0 : 1;
    const double v = std::log(eps * (1.0 - gamma_norm) / step0) / std::log(gamma_norm);
    if (!(v > 0.0)) return 0;
    return static_cast<int>(std::ceil(v - 1e-12));
}

ContractionWeights contraction_weights(const Mat& gamma) {
    require(gamma.rows() == gamma.cols(), "contraction_weights: matrix must be square");
    require((gamma.array() >= 0.0).all() && gamma.allFinite(),
            "contraction_weights: matrix must be finite and nonnegative");
    const double rho = spectral_radius(gamma);
    if (!(rho < 1.0)) throw Error("contraction_weights: spectral radius is not below one");
    const int n = static_cast<int>(gamma.rows());
    ContractionWeights w;
    w.c = (Mat::Identity(n, n) - gamma).partialPivLu().solve(Vec::Ones(n));
    require((w.c.array() > 0.0).all(), "contraction_weights: weights lost positivity");
    const Vec gc = gamma * w.c;
    w.norm = 0.0;
    for (int i = 0; i < n; ++i) w.norm = std::max(w.norm, gc(i) / w.c(i));
    return w;
}

double block_max_norm(const Vec& x, const std::vector<int>& dims, const ScalingConfig& scal,
                      const Vec& c) {
    require(static_cast<int>(dims.size()) == c.size(), "block_max_norm: weight count mismatch");
    require(scal.block_scalings.empty() || scal.block_scalings.size() == dims.size(),
            "block_max_norm: scaling count mismatch");
    double out = 0.0;
    int off = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const Vec xi = x.segment(off, dims[i]);
        const double nrm = scal.block_scalings.empty()
                               ? xi.norm()
                               : scal.block_scalings[i].partialPivLu().solve(xi).norm();
        out = std::max(out, nrm / c(i));
        off += dims[i];
    }
    require(off == x.size(), "block_max_norm: block sizes do not add up");
    return out;
}

Vec natural_map_residual(const NepProblem& game, const Vec& z, double tau) {
    const Vec Fz = game.F(z);
    Vec r(game.num_players());
    for (int i = 0; i < game.num_players(); ++i) {
        const Vec zi = game.block(z, i);
        const Vec arg = zi - game.block(Fz, i) - tau * zi;
        r(i) = (zi - game.project_block(i, arg)).norm();
    }
    return r;
}

}  // namespace nepvi
