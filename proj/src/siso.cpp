#include "nepvi/siso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nepvi {

void SisoScenario::validate() const {
    require(I >= 1 && N >= 1, "SISO scenario: need I >= 1 and N >= 1");
    require(static_cast<int>(gains.size()) == N, "SISO scenario: gains must have N carriers");
    for (const auto& G : gains) {
        require(G.rows() == I && G.cols() == I, "SISO scenario: gain matrices must be I x I");
        require((G.array() >= 0.0).all() && G.allFinite(), "SISO scenario: gains must be finite and nonnegative");
        for (int i = 0; i < I; ++i) require(G(i, i) > 0.0, "SISO scenario: direct gains must be positive");
    }
    require(sigma2.rows() == I && sigma2.cols() == N && (sigma2.array() > 0.0).all(),
            "SISO scenario: noise powers must be positive, I x N");
    require(P.size() == I && (P.array() > 0.0).all(), "SISO scenario: budgets must be positive");
    require(pmax.rows() == I && pmax.cols() == N && (pmax.array() > 0.0).all(),
            "SISO scenario: masks must be positive, I x N");
    require(static_cast<int>(W.size()) == I && static_cast<int>(alpha.size()) == I,
            "SISO scenario: one W/alpha block per player");
    for (int i = 0; i < I; ++i) {
        require(W[i].cols() == N || W[i].rows() == 0, "SISO scenario: W blocks must have N columns");
        require(alpha[i].size() == W[i].rows(), "SISO scenario: alpha size mismatch");
        require((W[i].array() >= 0.0).all() && (alpha[i].array() > 0.0).all(),
                "SISO scenario: interference weights nonnegative, caps positive");
        if (W[i].rows() > 0) {
            const Vec full = W[i] * pmax.row(i).transpose();
            require((full.array() > alpha[i].array()).all(),
                    "SISO scenario: interference rows are vacuous (sum_k w_k pmax_k <= alpha)");
        }
    }
}


Vec mui(const SisoScenario& s, int i, const Vec& p) {
    Vec out = s.sigma2.row(i).transpose();
    for (int k = 0; k < s.N; ++k)
        for (int j = 0; j < s.I; ++j)
            if (j != i) out(k) += s.g(i, j, k) * p(j * s.N + k);
    return out;
}

double rate(const SisoScenario& s, int i, const Vec& p) {
    require(p.size() == s.I * s.N, "rate: power vector has the wrong size");
    const Vec d = mui(s, i, p);
    double r = 0.0;
    for (int k = 0; k < s.N; ++k) r += std::log1p(s.g(i, i, k) * p(i * s.N + k) / d(k));
    return r;
}

double sum_rate(const SisoScenario& s, const Vec& p) {
    double t = 0.0;
    for (int i = 0; i < s.I; ++i) t += rate(s, i, p);
    return t;
}

Vec vi_map(const SisoScenario& s, const Vec& p) {
    require(p.size() == s.I * s.N, "vi_map: power vector has the wrong size");
    Vec G(s.I * s.N);
    for (int i = 0; i < s.I; ++i) {
        const Vec d = mui(s, i, p);
        for (int k = 0; k < s.N; ++k)
            G(i * s.N + k) = -s.g(i, i, k) / (d(k) + s.g(i, i, k) * p(i * s.N + k));
    }
    return G;
}

SisoCondensed condensed_siso(const SisoScenario& s) {
    s.validate();
    SisoCondensed out;
    out.upsilon = Mat::Identity(s.I, s.I);
    for (int k = 0; k < s.N; ++k) {
        Mat innr(s.I, s.I), jg = Mat::Identity(s.I, s.I);
        for (int i = 0; i < s.I; ++i) {
            for (int j = 0; j < s.I; ++j) {
                double recv_j = s.sigma2(j, k);
                for (int r = 0; r < s.I; ++r) recv_j += s.g(j, r, k) * s.pmax(r, k);
                innr(i, j) = recv_j / s.sigma2(i, k);
                if (i != j) {
                    jg(i, j) = -s.g(i, j, k) / s.g(j, j, k) * innr(i, j);
                    out.upsilon(i, j) = std::min(out.upsilon(i, j), jg(i, j));
                }
            }
        }
        out.innr.push_back(innr);
        out.jg_low.push_back(jg);
    }
    Mat beta = -out.upsilon;
    beta.diagonal().setZero();
    out.cm = condensed_from_bounds(Vec::Ones(s.I), beta);
    return out;
}

DominanceFlags interference_conditions(const SisoScenario& s, const Vec& w) {
    return diagonal_dominance_p_test(condensed_siso(s).cm, w);
}

double tau_bound_siso(const SisoScenario& s) {
    const SisoCondensed c = condensed_siso(s);
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.I; ++i) {
        double row = 0.0;
        for (int j = 0; j < s.I; ++j) {
            if (j == i) continue;
            double m = 0.0;
            for (int k = 0; k < s.N; ++k) m = std::max(m, s.g(i, j, k) / s.g(i, i, k) * c.innr[k](i, j));
            row += m;
        }
        best = std::max(best, row);
    }
    return best - 1.0;
}

void WaterfillingProblem::validate() const {
    const int n = size();
    require(n >= 1, "waterfilling: no carriers");
    require(lambda.size() == n && c.size() == n && pmax.size() == n, "waterfilling: size mismatch");
    require(W.cols() == n || W.rows() == 0, "waterfilling: W must have N columns");
    require(alpha.size() == W.rows(), "waterfilling: alpha size mismatch");
    require((H.array() >= 0.0).all() && H.allFinite(), "waterfilling: gains must be finite and nonnegative");
    require((W.array() >= 0.0).all() && (alpha.array() > 0.0).all(),
            "waterfilling: rows must be nonnegative with positive caps");
    require((pmax.array() > 0.0).all(), "waterfilling: masks must be positive");
    require(tau >= 0.0, "waterfilling: tau must be nonnegative");
    require(rows() <= kMaxWaterfillRows, "waterfilling: more rows than the nesting depth cap");
}

double WaterfillingProblem::objective(const Vec& p) const {
    double f = 0.0;
    for (int k = 0; k < size(); ++k) f += std::log1p(H(k) * p(k)) - lambda(k) * p(k);
    return f - 0.5 * tau * (p - c).squaredNorm();
}

Vec waterfill(const WaterfillingProblem& wp, const Vec& mu_tilde) {
    const int n = wp.size();
    Vec p(n);
    for (int k = 0; k < n; ++k) {
        const double H = wp.H(k), m = mu_tilde(k), tau = wp.tau;
        double v;
        if (H <= 1e-12) {
            // log term vanishes: pure proximal-linear problem
            v = tau > 0.0 ? wp.c(k) - m / tau : (m > 0.0 ? 0.0 : wp.pmax(k));
        } else if (tau == 0.0) {
            v = m > 0.0 ? 1.0 / m - 1.0 / H : wp.pmax(k);
        } else {
            // u = 1/H + p is the positive root of tau u^2 + b u - 1 = 0
            const double b = m - tau * (wp.c(k) + 1.0 / H);
            const double disc = std::sqrt(b * b + 4.0 * tau);
            const double u = b > 0.0 ? 2.0 / (b + disc) : (disc - b) / (2.0 * tau);
            v = u - 1.0 / H;
        }
        p(k) = std::clamp(v, 0.0, wp.pmax(k));
    }
    return p;
}

NestedBisectionResult nested_bisection(const WaterfillingProblem& wp, double eps_bis) {
    wp.validate();
    const int n = wp.size(), m = wp.rows();
    NestedBisectionProblem prob;
    prob.rows = m;
    prob.caps = wp.alpha;
    prob.usage = [&](const Vec& mu) -> Vec {
        Vec mt = wp.lambda;
        if (m > 0) mt += wp.W.transpose() * mu;
        return wp.W * waterfill(wp, mt);
    };
    // Above this value every carrier with w_ki > 0 is switched off: the
    // gradient of the objective at p_k = 0 is H_k + tau c_k - mu_tilde_k.
    prob.upper = [&](int level, const Vec& mu) {
        double u = 0.0;
        for (int k = 0; k < n; ++k) {
            const double w = wp.W(level, k);
            if (w <= 0.0) continue;
            double rest = wp.lambda(k);
            for (int j = 0; j < level; ++j) rest += mu(j) * wp.W(j, k);
            u = std::max(u, (wp.H(k) + wp.tau * wp.c(k) - rest) / w);
        }
        return u;
    };
    return nested_dual_bisection(prob, eps_bis, kMaxWaterfillRows);
}

WaterfillingSolution proximal_best_response(const WaterfillingProblem& wp, double eps_bis) {
    const NestedBisectionResult nb = nested_bisection(wp, eps_bis);
    WaterfillingSolution sol;
    sol.mu = nb.mu;
    Vec mt = wp.lambda;
    if (wp.rows() > 0) mt += wp.W.transpose() * nb.mu;
    sol.p = waterfill(wp, mt);
    sol.iterations = nb.iterations;
    sol.bound = nb.bound;
    return sol;
}

WaterfillingProblem player_waterfilling(const SisoScenario& s, int i, const Vec& p,
                                        const BestResponseArgs& args) {
    const int N = s.N, m = static_cast<int>(s.W[i].rows());
    WaterfillingProblem wp;
    const Vec d = mui(s, i, p);
    wp.H.resize(N);
    for (int k = 0; k < N; ++k) wp.H(k) = s.g(i, i, k) / d(k);
    wp.lambda = args.price.size() == N ? args.price : Vec::Zero(N);
    wp.tau = args.tau;
    wp.c = args.tau > 0.0 && args.center.size() == N ? args.center : Vec::Zero(N);
    wp.W.resize(m + 1, N);
    wp.W.row(0).setOnes();
    if (m > 0) wp.W.bottomRows(m) = s.W[i];
    wp.alpha.resize(m + 1);
    wp.alpha(0) = s.P(i);
    if (m > 0) wp.alpha.tail(m) = s.alpha[i];
    wp.pmax = s.pmax.row(i).transpose();
    return wp;
}

NepProblem make_siso_game(const SisoScenario& s, double eps_bis) {
    s.validate();
    const int N = s.N;
    std::vector<PlayerSpec> players;
    for (int i = 0; i < s.I; ++i) {
        PlayerSpec pl;
        pl.dim = N;
        pl.set.lower = Vec::Zero(N);
        pl.set.upper = s.pmax.row(i).transpose();
        const int m = static_cast<int>(s.W[i].rows());
        pl.set.W.resize(m + 1, N);
        pl.set.W.row(0).setOnes();
        if (m > 0) pl.set.W.bottomRows(m) = s.W[i];
        pl.set.alpha.resize(m + 1);
        pl.set.alpha(0) = s.P(i);
        if (m > 0) pl.set.alpha.tail(m) = s.alpha[i];
        pl.cost = [s, i](const Vec& p) { return -rate(s, i, p); };
        pl.grad = [s, i, N](const Vec& p) -> Vec {
            const Vec d = mui(s, i, p);
            Vec g(N);
            for (int k = 0; k < N; ++k) g(k) = -s.g(i, i, k) / (d(k) + s.g(i, i, k) * p(i * N + k));
            return g;
        };
        pl.best_response = [s, i, eps_bis](const Vec& p, const BestResponseArgs& a) -> Vec {
            return proximal_best_response(player_waterfilling(s, i, p, a), eps_bis).p;
        };
        pl.feasible_point = Vec::Zero(N);
        players.push_back(std::move(pl));
    }
    return NepProblem(std::move(players));
}

Vec interference_prices(const SisoScenario& s, const Vec& weights) {
    require(weights.size() == s.I, "interference_prices: one weight per player expected");
    Vec gam = Vec::Zero(s.I * s.N);
    for (int i = 0; i < s.I; ++i)
        for (int k = 0; k < s.N; ++k)
            for (int j = 0; j < s.I; ++j)
                if (j != i) gam(i * s.N + k) += weights(i) * s.g(j, i, k);
    return gam;
}

SisoSelectionReport ne_selection_siso(const SisoScenario& s, const Vec& weights, SelectionConfig sel,
                                      const ProxConfig& prox, const Vec& p0, double merit_sign) {
    SisoSelectionReport rep;
    rep.tau_sufficient = tau_bound_siso(s);
    rep.tau_bar = tau_bar(condensed_siso(s).cm);
    const double tau0 = prox.tau_at ? prox.tau_at(0) : prox.tau;
    if (!(tau0 > rep.tau_sufficient))
        throw Error("ne_selection_siso: tau = " + std::to_string(tau0) +
                    " does not exceed the sufficient bound " + std::to_string(rep.tau_sufficient));
    const Vec gam = merit_sign * interference_prices(s, weights);
    sel.merit_gradient = [gam](const Vec&) { return gam; };
    sel.merit_value = [gam](const Vec& p) { return gam.dot(p); };
    sel.lipschitz_phi = 0.0;
    ProxConfig cfg = prox;
    cfg.tau_min = std::max(cfg.tau_min, rep.tau_bar);
    rep.traj = ptra(make_siso_game(s), sel, cfg, p0);
    return rep;
}

}  // namespace nepvi
