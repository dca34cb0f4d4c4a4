#include "nepvi/prox.hpp"

#include "json.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace nepvi {

double SequenceSpec::at(int n) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::InverseSquare: return c / ((1.0 + n) * (1.0 + n));
        case Kind::Geometric: return c * std::pow(rate, n);
        case Kind::Harmonic: return c / (1.0 + rate * n);
        case Kind::Constant: return c;
    }
    return 0.0;
}

bool SequenceSpec::nonnegative() const {
    switch (kind) {
        case Kind::Zero: return true;
        case Kind::Geometric: return c >= 0.0 && rate >= 0.0;
        case Kind::Harmonic: return c >= 0.0 && rate >= 0.0;
        default: return c >= 0.0;
    }
}

bool SequenceSpec::summable() const {
    switch (kind) {
        case Kind::Zero: return true;
        case Kind::InverseSquare: return c >= 0.0;
        case Kind::Geometric: return c >= 0.0 && rate >= 0.0 && rate < 1.0;
        case Kind::Harmonic: return c == 0.0;
        case Kind::Constant: return c == 0.0;
    }
    return false;
}

bool SequenceSpec::tikhonov_admissible() const {
    return kind == Kind::Harmonic && c > 0.0 && rate > 0.0;
}

std::string SequenceSpec::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Zero: os << "0"; break;
        case Kind::InverseSquare: os << c << "/(1+n)^2"; break;
        case Kind::Geometric: os << c << "*" << rate << "^n"; break;
        case Kind::Harmonic: os << c << "/(1+" << rate << "n)"; break;
        case Kind::Constant: os << c; break;
    }
    return os.str();
}

std::string SequenceSpec::to_json() const {
    static const char* names[] = {"zero", "inverse_square", "geometric", "harmonic", "constant"};
    nlohmann::json j;
    j["kind"] = names[static_cast<int>(kind)];
    j["c"] = c;
    j["rate"] = rate;
    return j.dump();
}

SequenceSpec SequenceSpec::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    const std::string k = j.at("kind").get<std::string>();
    SequenceSpec s;
    s.c = j.value("c", 0.0);
    s.rate = j.value("rate", 0.0);
    if (k == "zero") s.kind = Kind::Zero;
    else if (k == "inverse_square") s.kind = Kind::InverseSquare;
    else if (k == "geometric") s.kind = Kind::Geometric;
    else if (k == "harmonic") s.kind = Kind::Harmonic;
    else if (k == "constant") s.kind = Kind::Constant;
    else throw Error("sequence JSON: unknown kind '" + k + "'");
    return s;
}

void ProxConfig::validate() const {
    require(tau > 0.0 || static_cast<bool>(tau_at), "prox config: tau must be positive");
    require(tau > tau_min, "prox config: tau does not exceed the certified threshold");
    require(eps.nonnegative() && eps.summable(), "prox config: eps sequence must be nonnegative and summable");
    require(0.0 < R_m && R_m <= R_M && R_M < 2.0, "prox config: need 0 < R_m <= R_M < 2");
    switch (eta.kind) {
        case SequenceSpec::Kind::Constant:
            require(eta.c >= R_m && eta.c <= R_M, "prox config: relaxation outside [R_m, R_M]");
            break;
        default:
            for (int n = 0; n < max_outer; ++n)
                require(eta.at(n) >= R_m && eta.at(n) <= R_M, "prox config: relaxation outside [R_m, R_M]");
    }
    require(outer_tol > 0.0 && inner_tol > 0.0, "prox config: tolerances must be positive");
    require(max_outer >= 1 && max_inner >= 1, "prox config: iteration caps must be positive");
    require(residual_scale > 0.0, "prox config: residual scale must be positive");
}

void SelectionConfig::validate() const {
    require(static_cast<bool>(merit_gradient), "selection config: merit gradient missing");
    require(tikhonov.tikhonov_admissible(),
            "selection config: Tikhonov sequence must be eps0/(1+a n) with eps0, a > 0");
    require(lipschitz_phi >= 0.0, "selection config: L_phi must be nonnegative");
}

double tau_bar(const CondensedMatrices& cm) {
    require(cm.alpha_min.allFinite() && cm.beta_max.allFinite(), "tau_bar: bounds must be finite");
    double t = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < cm.size(); ++i) t = std::max(t, cm.beta_max.row(i).sum() - cm.alpha_min(i));
    return t;
}

double tau_bar_eps(const CondensedMatrices& cm, double eps_bar, double L_phi, int I) {
    require(eps_bar >= 0.0 && L_phi >= 0.0, "tau_bar_eps: eps_bar and L_phi must be nonnegative");
    return tau_bar(cm) + (I - 1) * eps_bar * L_phi;
}

NepProblem regularized_game(const NepProblem& game, double tau, const Vec& center, double eps,
                            const std::function<Vec(const Vec&)>& merit_gradient,
                            const std::function<double(const Vec&)>& merit_value) {
    require(tau >= 0.0 && eps >= 0.0, "regularized_game: tau and eps must be nonnegative");
    require(center.size() == game.dim(), "regularized_game: center has the wrong dimension");
    if (eps > 0.0 && !merit_gradient) throw Error("regularized_game: eps > 0 needs a merit gradient");

    auto base = std::make_shared<const NepProblem>(game);
    std::vector<PlayerSpec> players;
    for (int i = 0; i < game.num_players(); ++i) {
        PlayerSpec p = game.players[i];
        const int off = game.offset(i), d = p.dim;
        const Vec yi = center.segment(off, d);
        auto price_at = [=](const Vec& x) -> Vec {
            if (eps == 0.0) return Vec::Zero(d);
            return eps * merit_gradient(x).segment(off, d);
        };
        const GradFn g0 = p.grad;
        p.grad = [=](const Vec& x) -> Vec {
            return g0(x) + price_at(x) + tau * (x.segment(off, d) - yi);
        };
        if (p.cost) {
            const CostFn c0 = p.cost;
            p.cost = [=](const Vec& x) {
                const Vec xi = x.segment(off, d);
                double f = c0(x) + 0.5 * tau * (xi - yi).squaredNorm();
                if (eps > 0.0) f += merit_value ? eps * merit_value(x) : price_at(x).dot(xi);
                return f;
            };
        }
        p.best_response = [=](const Vec& x, const BestResponseArgs& a) -> Vec {
            BestResponseArgs b;
            b.tau = tau + a.tau;
            if (b.tau > 0.0) {
                b.center = tau * yi;
                if (a.tau > 0.0) b.center += a.tau * a.center;
                b.center /= b.tau;
            }
            b.price = price_at(x);
            if (a.price.size() == d) b.price += a.price;
            return base->best_response(i, x, b);
        };
        players.push_back(std::move(p));
    }
    return NepProblem(std::move(players));
}

bool distributed_inner_termination(const Vec& residuals, const Vec& local_eps) {
    require(residuals.size() == local_eps.size(), "distributed_inner_termination: size mismatch");
    return (residuals.array() <= local_eps.array()).all();
}

bool distributed_inner_termination(const Vec& residuals, const std::vector<SequenceSpec>& local_eps, int n) {
    require(static_cast<std::size_t>(residuals.size()) == local_eps.size(),
            "distributed_inner_termination: size mismatch");
    for (const auto& s : local_eps)
        require(s.summable(), "distributed_inner_termination: local sequences must be summable");
    Vec e(residuals.size());
    for (int i = 0; i < e.size(); ++i) e(i) = local_eps[i].at(n);
    return distributed_inner_termination(residuals, e);
}

namespace {

Trajectory prox_outer(const NepProblem& game, const ProxConfig& cfg, const SelectionConfig* sel,
                      const Vec& x0) {
    cfg.validate();
    if (sel) sel->validate();
    require(x0.size() == game.dim(), "proximal method: x0 has the wrong dimension");
    if (!game.is_feasible(x0, 1e-8)) throw Error("proximal method: x0 is infeasible");
    const int I = game.num_players();

    Trajectory traj;
    traj.iterates.push_back(x0);
    Vec x = x0;
    int n = 0;
    for (; n < cfg.max_outer; ++n) {
        const double tau_n = cfg.tau_at ? cfg.tau_at(n) : cfg.tau;
        require(tau_n > cfg.tau_min && tau_n > 0.0, "proximal method: tau_n left (tau_min, inf)");
        const double acc = cfg.eps.at(n);
        const double tikh = sel ? sel->tikhonov.at(n) : 0.0;
        const NepProblem G = sel ? regularized_game(game, tau_n, x, tikh, sel->merit_gradient, sel->merit_value)
                                 : regularized_game(game, tau_n, x, 0.0);

        AbrOptions opts;
        opts.record_iterates = false;
        auto prev = std::make_shared<Vec>(x);
        auto quiet = std::make_shared<int>(0);
        if (cfg.no_signal_heuristic) {
            opts.use_default_stop = false;
            const double tol = cfg.inner_tol;
            const int W = cfg.no_signal_window;
            opts.stop = [prev, quiet, tol, W](int, const Vec& xn) {
                *quiet = (xn - *prev).norm() <= tol ? *quiet + 1 : 0;
                *prev = xn;
                return *quiet >= W;
            };
        } else if (acc > 0.0) {
            opts.use_default_stop = false;
            if (cfg.inner_contraction > 0.0 && cfg.inner_contraction < 1.0) {
                const double g = cfg.inner_contraction;
                opts.stop = [prev, g, acc](int, const Vec& xn) {
                    const double step = (xn - *prev).norm();
                    *prev = xn;
                    return g / (1.0 - g) * step <= acc;
                };
            } else {
                const double scale = cfg.residual_scale;
                opts.stop = [&G, scale, acc, I](int, const Vec& xn) {
                    const Vec r = scale * natural_map_residual(G, xn, 0.0);
                    return distributed_inner_termination(r, Vec::Constant(I, acc / I));
                };
            }
        }
        const Schedule sched = cfg.inner_schedule == Schedule::Kind::GaussSeidel
                                   ? Schedule::gauss_seidel(I, cfg.max_inner + 1)
                                   : Schedule::jacobi(I, cfg.max_inner + 1);
        const Trajectory inner = async_best_response(G, sched, x, cfg.inner_tol, cfg.max_inner, opts);
        traj.inner_iterations += inner.iterations;
        if (!inner.converged) {
            traj.x = x;
            traj.iterations = n;
            traj.message = "inner solve did not converge at outer iteration " + std::to_string(n) +
                           " (is Upsilon + tau I a P-matrix?)";
            traj.final_residual = natural_map_residual(game, x, 0.0).maxCoeff();
            return traj;
        }
        const double eta = cfg.eta.at(n);
        const Vec xn = eta == 1.0 ? inner.x : Vec((1.0 - eta) * x + eta * inner.x);

        IterationRecord rec;
        rec.iter = n;
        rec.outer_iter = n;
        rec.step_norm = (xn - x).norm();
        rec.eps_n = sel ? tikh : acc;
        if (sel && sel->merit_value) rec.merit = sel->merit_value(xn);
        if (cfg.metric) rec.metric = cfg.metric(xn);
        traj.records.push_back(rec);
        traj.iterates.push_back(xn);
        x = xn;

        if (!x.allFinite() || (sel && std::isfinite(rec.merit) && std::abs(rec.merit) > sel->divergence_cap) ||
            (sel && sel->merit_value && !std::isfinite(rec.merit))) {
            traj.message = "divergence detected (merit level set appears unbounded)";
            traj.x = x;
            traj.iterations = n + 1;
            return traj;
        }
        const bool small = rec.step_norm <= cfg.outer_tol;
        if (small && (!sel || tikh <= sel->eps_stop)) {
            traj.converged = true;
            ++n;
            break;
        }
    }
    traj.x = x;
    traj.iterations = n;
    traj.final_residual = natural_map_residual(game, x, 0.0).maxCoeff();
    traj.message = traj.converged ? "converged" : "outer iteration cap reached";
    return traj;
}

}  // namespace

Trajectory pda(const NepProblem& game, const ProxConfig& cfg, const Vec& x0) {
    ProxConfig c = cfg;
    c.eps = SequenceSpec::zero();
    c.eta = SequenceSpec::constant(1.0);
    return prox_outer(game, c, nullptr, x0);
}

Trajectory apda(const NepProblem& game, const ProxConfig& cfg, const Vec& x0) {
    return prox_outer(game, cfg, nullptr, x0);
}

Trajectory ptra(const NepProblem& game, const SelectionConfig& sel, const ProxConfig& cfg, const Vec& x0) {
    return prox_outer(game, cfg, &sel, x0);
}

}  // namespace nepvi
