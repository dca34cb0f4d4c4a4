#pragma once

// Reference solvers and fixtures shared by the unit tests and the acceptance
// binary. None of them reuse the library's solvers.

#include "nepvi/siso.hpp"

#include <cmath>
#include <limits>

namespace oracle {

using nepvi::Mat;
using nepvi::Vec;

// Log-barrier Newton method for
//   maximize sum_k log(1 + H_k p_k) - lambda_k p_k - (tau/2)||p - c||^2
//   s.t. 0 <= p <= pmax, W p <= alpha.
// The barrier weight is pushed until the duality gap bound (#constraints / t)
// is below gap.
inline Vec barrier_waterfilling(const nepvi::WaterfillingProblem& wp, double gap = 1e-12) {
    const int n = wp.size(), m = wp.rows();
    const int ncons = 2 * n + m;

    double shrink = 0.5;
    for (int r = 0; r < m; ++r) {
        const double full = wp.W.row(r).dot(wp.pmax);
        if (full > 0.0) shrink = std::min(shrink, 0.5 * wp.alpha(r) / full);
    }
    Vec p = shrink * wp.pmax;

    auto barrier = [&](const Vec& x, double t) {
        double v = -t * wp.objective(x);
        for (int k = 0; k < n; ++k) {
            if (x(k) <= 0.0 || x(k) >= wp.pmax(k)) return std::numeric_limits<double>::infinity();
            v -= std::log(x(k)) + std::log(wp.pmax(k) - x(k));
        }
        for (int r = 0; r < m; ++r) {
            const double s = wp.alpha(r) - wp.W.row(r).dot(x);
            if (s <= 0.0) return std::numeric_limits<double>::infinity();
            v -= std::log(s);
        }
        return v;
    };

    for (double t = 1.0; ncons / t > gap; t *= 8.0) {
        for (int it = 0; it < 200; ++it) {
            Vec g(n);
            Mat Hs = Mat::Zero(n, n);
            for (int k = 0; k < n; ++k) {
                const double den = 1.0 + wp.H(k) * p(k);
                g(k) = -t * (wp.H(k) / den - wp.lambda(k) - wp.tau * (p(k) - wp.c(k))) - 1.0 / p(k) +
                       1.0 / (wp.pmax(k) - p(k));
                Hs(k, k) = t * (wp.H(k) * wp.H(k) / (den * den) + wp.tau) + 1.0 / (p(k) * p(k)) +
                           1.0 / ((wp.pmax(k) - p(k)) * (wp.pmax(k) - p(k)));
            }
            for (int r = 0; r < m; ++r) {
                const double s = wp.alpha(r) - wp.W.row(r).dot(p);
                g += wp.W.row(r).transpose() / s;
                Hs += wp.W.row(r).transpose() * wp.W.row(r) / (s * s);
            }
            const Vec dx = -Hs.ldlt().solve(g);
            const double dec = -g.dot(dx);
            if (dec / 2.0 <= 1e-14) break;
            double step = 1.0;
            const double f0 = barrier(p, t);
            while (barrier(p + step * dx, t) > f0 - 0.25 * step * dec) {
                step *= 0.5;
                if (step < 1e-20) break;
            }
            if (step < 1e-20) break;
            p += step * dx;
        }
    }
    return p;
}

// Two users, two carriers, flat enough that the game has a continuum of
// equilibria: receiver i sees every transmitter with the same gain h_i(k) and
// noise c(k) h_i(k), so each rate depends on the total power per carrier.
inline nepvi::SisoScenario multi_ne_scenario() {
    nepvi::SisoScenario s;
    s.I = 2;
    s.N = 2;
    Vec h1(2), h2(2), c(2);
    h1 << 1.0, 1.0;
    h2 << 1.5, 1.0;
    c << 1.0, 2.0;
    for (int k = 0; k < 2; ++k) {
        Mat g(2, 2);
        g << h1(k), h1(k), h2(k), h2(k);
        s.gains.push_back(g);
    }
    s.sigma2.resize(2, 2);
    for (int k = 0; k < 2; ++k) {
        s.sigma2(0, k) = c(k) * h1(k);
        s.sigma2(1, k) = c(k) * h2(k);
    }
    s.P.resize(2);
    s.P << 1.0, 3.0;
    s.pmax.resize(2, 2);
    s.pmax << 1.0, 1.0, 3.0, 3.0;
    s.W.assign(2, Mat(0, 2));
    s.alpha.assign(2, Vec(0));
    return s;
}

}  // namespace oracle
