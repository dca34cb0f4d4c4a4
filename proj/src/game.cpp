#include "nepvi/game.hpp"

#include "nepvi/bisection.hpp"

#include <algorithm>
#include <cmath>

namespace nepvi {

PolyhedralSet PolyhedralSet::box(const Vec& lower, const Vec& upper) {
    PolyhedralSet s;
    s.lower = lower;
    s.upper = upper;
    s.W = Mat::Zero(0, lower.size());
    s.alpha = Vec::Zero(0);
    return s;
}

bool PolyhedralSet::contains(const Vec& x, double tol) const {
    if (x.size() != dim()) return false;
    if (((x - lower).array() < -tol).any() || ((x - upper).array() > tol).any()) return false;
    if (rows() > 0 && ((W * x - alpha).array() > tol).any()) return false;
    return true;
}

void PolyhedralSet::validate() const {
    require(lower.size() == upper.size() && lower.size() > 0, "polyhedral set: box bounds missing");
    require((lower.array() <= upper.array()).all(), "polyhedral set: box bounds out of order");
    require(W.cols() == dim() || W.rows() == 0, "polyhedral set: W has wrong column count");
    require(alpha.size() == W.rows(), "polyhedral set: alpha size does not match W");
}

Vec project_polyhedron(const PolyhedralSet& set, const Vec& v, double eps_bis) {
    require(v.size() == set.dim(), "project_polyhedron: dimension mismatch");
    Vec clipped = v.cwiseMax(set.lower).cwiseMin(set.upper);
    const int m = set.rows();
    if (m == 0 || ((set.W * clipped - set.alpha).array() <= 0.0).all()) return clipped;

    // p(mu) = clip(v - W' mu); the dual is concave and its partial
    // maximizations keep that property, so nested bisection applies.
    auto primal = [&](const Vec& mu) -> Vec {
        return (v - set.W.transpose() * mu).cwiseMax(set.lower).cwiseMin(set.upper);
    };
    NestedBisectionProblem prob;
    prob.rows = m;
    prob.caps = set.alpha;
    prob.usage = [&](const Vec& mu) -> Vec { return set.W * primal(mu); };
    const double scale = std::max(1.0, (v.cwiseAbs().maxCoeff() + set.upper.cwiseAbs().maxCoeff() +
                                         set.lower.cwiseAbs().maxCoeff()));
    prob.upper = [&](int level, const Vec&) {
        const double wmin = set.W.row(level).cwiseAbs().maxCoeff();
        return wmin > 0.0 ? 2.0 * scale / wmin : 1.0;
    };
    const auto res = nested_dual_bisection(prob, eps_bis * scale, 6);
    return primal(res.mu);
}

NepProblem::NepProblem(std::vector<PlayerSpec> p) : players(std::move(p)) { index(); }

void NepProblem::index() {
    offsets_.clear();
    int off = 0;
    for (const auto& pl : players) {
        offsets_.push_back(off);
        off += pl.dim;
    }
}

int NepProblem::dim() const {
    int n = 0;
    for (const auto& pl : players) n += pl.dim;
    return n;
}

std::vector<int> NepProblem::block_dims() const {
    std::vector<int> d;
    for (const auto& pl : players) d.push_back(pl.dim);
    return d;
}

Vec NepProblem::block(const Vec& x, int i) const { return x.segment(offset(i), players[i].dim); }

void NepProblem::set_block(Vec& x, int i, const Vec& v) const {
    x.segment(offset(i), players[i].dim) = v;
}

Vec NepProblem::F(const Vec& x) const {
    require(x.size() == dim(), "NepProblem::F: profile dimension mismatch");
    Vec out(dim());
    for (int i = 0; i < num_players(); ++i) set_block(out, i, players[i].grad(x));
    return out;
}

Vec NepProblem::project_block(int i, const Vec& v) const {
    const auto& pl = players[i];
    return pl.project ? pl.project(v) : project_polyhedron(pl.set, v);
}

Vec NepProblem::project(const Vec& x) const {
    Vec out(dim());
    for (int i = 0; i < num_players(); ++i) set_block(out, i, project_block(i, block(x, i)));
    return out;
}

Vec NepProblem::feasible_point() const {
    Vec x(dim());
    for (int i = 0; i < num_players(); ++i) {
        const auto& pl = players[i];
        if (pl.feasible_point.size() == pl.dim)
            set_block(x, i, pl.feasible_point);
        else
            set_block(x, i, project_block(i, Vec::Zero(pl.dim)));
    }
    return x;
}

bool NepProblem::is_feasible(const Vec& x, double tol) const {
    if (x.size() != dim()) return false;
    for (int i = 0; i < num_players(); ++i) {
        const Vec xi = block(x, i);
        if (players[i].project) {
            if ((players[i].project(xi) - xi).norm() > tol) return false;
        } else if (!players[i].set.contains(xi, tol)) {
            return false;
        }
    }
    return true;
}

Vec NepProblem::best_response(int i, const Vec& x, const BestResponseArgs& args) const {
    const auto& pl = players[i];
    if (pl.best_response) return pl.best_response(x, args);
    require(static_cast<bool>(pl.cost) && static_cast<bool>(pl.grad),
            "best_response: player " + std::to_string(i) + " has neither an oracle nor cost/grad");

    // Projected gradient with Armijo backtracking on the priced, proximal cost.
    Vec full = x;
    auto objective = [&](const Vec& xi) {
        set_block(full, i, xi);
        double f = pl.cost(full);
        if (args.price.size() == pl.dim) f += args.price.dot(xi);
        if (args.tau > 0.0) f += 0.5 * args.tau * (xi - args.center).squaredNorm();
        return f;
    };
    auto gradient = [&](const Vec& xi) {
        set_block(full, i, xi);
        Vec g = pl.grad(full);
        if (args.price.size() == pl.dim) g += args.price;
        if (args.tau > 0.0) g += args.tau * (xi - args.center);
        return g;
    };
    Vec xi = project_block(i, block(x, i));
    double step = 1.0;
    double f = objective(xi);
    for (int it = 0; it < 20000; ++it) {
        const Vec g = gradient(xi);
        Vec cand;
        double fc = 0.0;
        for (int ls = 0; ls < 60; ++ls) {
            cand = project_block(i, xi - step * g);
            fc = objective(cand);
            if (fc <= f + g.dot(cand - xi) + 0.5 / step * (cand - xi).squaredNorm() + 1e-15)
                break;
            step *= 0.5;
        }
        const double move = (cand - xi).norm();
        xi = cand;
        f = fc;
        if (move <= 1e-13 * (1.0 + xi.norm())) break;
        step *= 2.0;
    }
    return xi;
}

double NepProblem::gradient_check(const Vec& x, double h) const {
    double worst = 0.0;
    for (int i = 0; i < num_players(); ++i) {
        const auto& pl = players[i];
        if (!pl.cost || !pl.grad) continue;
        const Vec g = pl.grad(x);
        for (int k = 0; k < pl.dim; ++k) {
            Vec xp = x, xm = x;
            xp(offset(i) + k) += h;
            xm(offset(i) + k) -= h;
            const double fd = (pl.cost(xp) - pl.cost(xm)) / (2 * h);
            worst = std::max(worst, std::abs(fd - g(k)) / (1.0 + std::abs(g(k))));
        }
    }
    return worst;
}

NepProblem make_quadratic_game(const Mat& M, const Vec& b, const std::vector<PolyhedralSet>& sets) {
    int n = 0;
    for (const auto& s : sets) {
        s.validate();
        n += s.dim();
    }
    require(M.rows() == n && M.cols() == n && b.size() == n, "make_quadratic_game: dimension mismatch");

    std::vector<PlayerSpec> players;
    int off = 0;
    for (const auto& s : sets) {
        PlayerSpec p;
        p.dim = s.dim();
        p.set = s;
        const int o = off, d = s.dim();
        p.grad = [M, b, o, d](const Vec& x) -> Vec {
            return M.middleRows(o, d) * x + b.segment(o, d);
        };
        p.cost = [M, b, o, d](const Vec& x) {
            const Vec xi = x.segment(o, d);
            Vec others = x;
            others.segment(o, d).setZero();
            return 0.5 * xi.dot(M.block(o, o, d, d) * xi) +
                   xi.dot(M.middleRows(o, d) * others + b.segment(o, d));
        };
        if (d == 1 && s.rows() == 0 && M(o, o) > 0.0) {
            const double lo = s.lower(0), hi = s.upper(0);
            p.best_response = [M, b, o, lo, hi](const Vec& x, const BestResponseArgs& a) -> Vec {
                double lin = M.row(o).dot(x) - M(o, o) * x(o) + b(o);
                if (a.price.size() == 1) lin += a.price(0);
                double curv = M(o, o);
                if (a.tau > 0.0) {
                    lin -= a.tau * a.center(0);
                    curv += a.tau;
                }
                Vec r(1);
                r(0) = std::clamp(-lin / curv, lo, hi);
                return r;
            };
        }
        p.feasible_point = project_polyhedron(s, Vec::Zero(d));
        players.push_back(std::move(p));
        off += d;
    }
    return NepProblem(std::move(players));
}

}  // namespace nepvi
