#include "nepvi/mimo.hpp"

#include "nepvi/bisection.hpp"
#include "nepvi/complex_calculus.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nepvi {

namespace {

CMat herm(const CMat& A) { return 0.5 * (A + A.adjoint()); }

double lambda_max_h(const CMat& A) {
    Eigen::SelfAdjointEigenSolver<CMat> es(herm(A), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double lambda_min_h(const CMat& A) {
    Eigen::SelfAdjointEigenSolver<CMat> es(herm(A), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

// log det of a Hermitian positive definite matrix
double logdet_pd(const CMat& A, const char* who) {
    Eigen::LLT<CMat> llt(herm(A));
    if (llt.info() != Eigen::Success) throw Error(std::string(who) + ": covariance is not positive definite");
    double s = 0.0;
    for (Eigen::Index k = 0; k < A.rows(); ++k) s += std::log(llt.matrixL()(k, k).real());
    return 2.0 * s;
}

CMat inverse_pd(const CMat& A) {
    Eigen::LLT<CMat> llt(herm(A));
    if (llt.info() != Eigen::Success) throw Error("mimo: covariance is not positive definite");
    return llt.solve(CMat::Identity(A.rows(), A.cols()));
}

// A^{p} for Hermitian positive definite A
CMat pd_power(const CMat& A, double p) {
    Eigen::SelfAdjointEigenSolver<CMat> es(herm(A));
    const Vec& l = es.eigenvalues();
    if (!(l(0) > 0.0)) throw Error("mimo: matrix power of a singular matrix");
    const Vec lp = l.array().pow(p);
    return es.eigenvectors() * lp.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

void require_psd(const Covariances& Q, int n, const char* who) {
    for (std::size_t j = 0; j < Q.size(); ++j) {
        require(Q[j].rows() == n && Q[j].cols() == n, std::string(who) + ": covariance has the wrong size");
        const double scale = std::max(1.0, Q[j].cwiseAbs().maxCoeff());
        require((Q[j] - Q[j].adjoint()).cwiseAbs().maxCoeff() <= 1e-9 * scale,
                std::string(who) + ": covariance of player " + std::to_string(j) + " is not Hermitian");
        require(lambda_min_h(Q[j]) >= -1e-9 * scale,
                std::string(who) + ": covariance of player " + std::to_string(j) + " is not PSD");
    }
}

// Project the eigenvalues of a Hermitian matrix onto { l >= 0, sum l <= P }.
CMat trace_capped_psd(const CMat& M, double P) {
    Eigen::SelfAdjointEigenSolver<CMat> es(herm(M));
    Vec l = es.eigenvalues();
    const int d = static_cast<int>(l.size());
    Vec clip = l.cwiseMax(0.0);
    if (clip.sum() > P) {
        // water level mu with sum (l - mu)^+ = P; eigenvalues ascend
        double mu = 0.0, top = 0.0;
        for (int k = 1; k <= d; ++k) {
            top += l(d - k);
            mu = (top - P) / k;
            const double next = k < d ? l(d - k - 1) : -std::numeric_limits<double>::infinity();
            if (mu >= next) break;
        }
        clip = (l.array() - mu).cwiseMax(0.0);
    }
    return es.eigenvectors() * clip.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

double re_inner(const CMat& A, const CMat& B) { return (A.adjoint() * B).trace().real(); }

}  // namespace

void MimoScenario::validate() const {
    require(I >= 1, "MimoScenario: at least one player required");
    require(nT >= 1, "MimoScenario: nT must be positive");
    require(static_cast<int>(nR.size()) == I && static_cast<int>(H.size()) == I &&
                static_cast<int>(Rn.size()) == I && P.size() == I,
            "MimoScenario: per-player arrays must have I entries");
    require(U.empty() || static_cast<int>(U.size()) == I, "MimoScenario: U must be empty or have I entries");
    require(G.empty() || static_cast<int>(G.size()) == I, "MimoScenario: G must be empty or have I entries");
    require(G.size() == Iave.size(), "MimoScenario: G and Iave must match");
    require(w.size() == 0 || w.size() == I, "MimoScenario: w must be empty or have I entries");
    for (int i = 0; i < I; ++i) {
        require(nR[i] >= nT, "MimoScenario: receiver " + std::to_string(i) + " has fewer antennas than nT");
        require(static_cast<int>(H[i].size()) == I, "MimoScenario: H row " + std::to_string(i) + " incomplete");
        for (int j = 0; j < I; ++j)
            require(H[i][j].rows() == nR[i] && H[i][j].cols() == nT,
                    "MimoScenario: H[" + std::to_string(i) + "][" + std::to_string(j) + "] has the wrong shape");
        Eigen::JacobiSVD<CMat> svd(H[i][i]);
        const Vec& sv = svd.singularValues();
        require(sv(sv.size() - 1) > 1e-10 * std::max(1.0, sv(0)),
                "MimoScenario: direct channel H_ii of player " + std::to_string(i) + " is not full column rank");
        require(Rn[i].rows() == nR[i] && Rn[i].cols() == nR[i], "MimoScenario: noise covariance shape");
        require((Rn[i] - Rn[i].adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, Rn[i].norm()),
                "MimoScenario: noise covariance of player " + std::to_string(i) + " is not Hermitian");
        require(lambda_min_h(Rn[i]) > 0.0,
                "MimoScenario: noise covariance of player " + std::to_string(i) + " is not positive definite");
        require(P(i) > 0.0, "MimoScenario: budgets must be positive");
        if (!U.empty() && U[i].cols() > 0) {
            require(U[i].rows() == nT && U[i].cols() < nT, "MimoScenario: U_i must be nT x r with r < nT");
            Eigen::JacobiSVD<CMat> su(U[i]);
            const Vec& s2 = su.singularValues();
            require(s2(s2.size() - 1) > 1e-10 * s2(0), "MimoScenario: U_i must have full column rank");
        }
        if (!G.empty()) {
            require(static_cast<Eigen::Index>(G[i].size()) == Iave[i].size(), "MimoScenario: one cap per shaping matrix");
            require(static_cast<int>(G[i].size()) <= 3, "MimoScenario: at most three shaping rows per player");
            for (const auto& g : G[i]) require(g.rows() == nT, "MimoScenario: shaping matrix must have nT rows");
            require((Iave[i].array() >= 0.0).all(), "MimoScenario: shaping caps must be nonnegative");
        }
    }
}

Vec hvec(const CMat& A) {
    require(A.rows() == A.cols(), "hvec: square matrix expected");
    const int n = static_cast<int>(A.rows());
    const double r2 = std::sqrt(2.0);
    Vec v(n * n);
    int k = 0;
    for (int i = 0; i < n; ++i) v(k++) = A(i, i).real();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const cplx a = 0.5 * (A(i, j) + std::conj(A(j, i)));
            v(k++) = r2 * a.real();
            v(k++) = r2 * a.imag();
        }
    return v;
}

CMat unhvec(const Vec& v, int n) {
    require(v.size() == n * n, "unhvec: length must be n^2");
    const double r2 = std::sqrt(2.0);
    CMat A(n, n);
    int k = 0;
    for (int i = 0; i < n; ++i) A(i, i) = v(k++);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const cplx a(v(k) / r2, v(k + 1) / r2);
            k += 2;
            A(i, j) = a;
            A(j, i) = std::conj(a);
        }
    return A;
}

Vec stack_covariances(const Covariances& Q) {
    Eigen::Index total = 0;
    for (const auto& q : Q) total += q.size();
    Vec x(total);
    Eigen::Index off = 0;
    for (const auto& q : Q) {
        x.segment(off, q.size()) = hvec(q);
        off += q.size();
    }
    return x;
}

Covariances split_covariances(const Vec& x, int I, int n) {
    require(x.size() == static_cast<Eigen::Index>(I) * n * n, "split_covariances: length mismatch");
    Covariances Q;
    for (int i = 0; i < I; ++i) Q.push_back(unhvec(x.segment(i * n * n, n * n), n));
    return Q;
}

CMat interference_covariance(const MimoScenario& s, int i, const Covariances& Q) {
    require(static_cast<int>(Q.size()) == s.I, "interference_covariance: one covariance per player expected");
    CMat A = s.Rn[i];
    for (int j = 0; j < s.I; ++j)
        if (j != i) A += s.H[i][j] * Q[j] * s.H[i][j].adjoint();
    return herm(A);
}

double mimo_rate(const MimoScenario& s, int i, const Covariances& Q) {
    require_psd(Q, s.nT, "mimo_rate");
    const CMat A = interference_covariance(s, i, Q);
    return logdet_pd(A + s.H[i][i] * Q[i] * s.H[i][i].adjoint(), "mimo_rate") - logdet_pd(A, "mimo_rate");
}

double mimo_sum_rate(const MimoScenario& s, const Covariances& Q) {
    double r = 0.0;
    for (int i = 0; i < s.I; ++i) r += mimo_rate(s, i, Q);
    return r;
}

std::vector<CMat> mimo_vi_map(const MimoScenario& s, const Covariances& Q) {
    require_psd(Q, s.nT, "mimo_vi_map");
    std::vector<CMat> F;
    for (int i = 0; i < s.I; ++i) {
        const CMat& Hii = s.H[i][i];
        const CMat T = interference_covariance(s, i, Q) + Hii * Q[i] * Hii.adjoint();
        F.push_back(herm(-Hii.adjoint() * inverse_pd(T) * Hii));
    }
    return F;
}

MimoCondensed condensed_mimo(const MimoScenario& s) {
    s.validate();
    MimoCondensed c;
    c.cross = Mat::Zero(s.I, s.I);
    c.innr = Vec::Zero(s.I);
    for (int i = 0; i < s.I; ++i) {
        CMat tot = s.Rn[i];
        for (int j = 0; j < s.I; ++j) tot += s.P(j) * s.H[i][j] * s.H[i][j].adjoint();
        c.innr(i) = lambda_max_h(tot) / lambda_min_h(s.Rn[i]);
        const CMat& Hii = s.H[i][i];
        const CMat pinv = (Hii.adjoint() * Hii).ldlt().solve(Hii.adjoint());
        for (int j = 0; j < s.I; ++j) {
            if (j == i) continue;
            const CMat M = pinv.adjoint() * s.H[i][j].adjoint() * s.H[i][j] * pinv;
            c.cross(i, j) = std::max(0.0, lambda_max_h(M));
        }
    }
    Mat beta = Mat::Zero(s.I, s.I);
    for (int i = 0; i < s.I; ++i)
        for (int j = 0; j < s.I; ++j)
            if (j != i) beta(i, j) = c.cross(i, j) * c.innr(i);
    c.cm = condensed_from_bounds(Vec::Ones(s.I), beta);
    c.upsilon = c.cm.upsilon;
    return c;
}

DominanceFlags conditions_mimo(const MimoScenario& s, const Vec& w) {
    return diagonal_dominance_p_test(condensed_mimo(s).cm, w);
}

double tau_bar_mimo(const MimoScenario& s) { return tau_bar(condensed_mimo(s).cm); }

MimoPlayerSet mimo_player_set(const MimoScenario& s, int i) {
    MimoPlayerSet ps;
    ps.P = s.P(i);
    const int n = s.nT;
    if (!s.U.empty() && s.U[i].cols() > 0) {
        const int r = static_cast<int>(s.U[i].cols());
        Eigen::HouseholderQR<CMat> qr(s.U[i]);
        const CMat Qf = qr.householderQ() * CMat::Identity(n, n);
        ps.V = Qf.rightCols(n - r);
    } else {
        ps.V = CMat::Identity(n, n);
    }
    if (!s.G.empty()) {
        for (std::size_t p = 0; p < s.G[i].size(); ++p) {
            const CMat& g = s.G[i][p];
            ps.B.push_back(herm(ps.V.adjoint() * g * g.adjoint() * ps.V));
        }
        ps.caps = s.Iave[i];
    }
    return ps;
}

CMat project_reduced(const MimoPlayerSet& ps, const CMat& S0, double eps_bis) {
    const CMat Sh = herm(S0);
    if (ps.B.empty()) return trace_capped_psd(Sh, ps.P);
    const int m = static_cast<int>(ps.B.size());
    auto primal = [&](const Vec& mu) {
        CMat M = Sh;
        for (int p = 0; p < m; ++p) M -= mu(p) * ps.B[p];
        return trace_capped_psd(M, ps.P);
    };
    NestedBisectionProblem prob;
    prob.rows = m;
    prob.caps = ps.caps;
    prob.usage = [&](const Vec& mu) {
        const CMat S = primal(mu);
        Vec u(m);
        for (int p = 0; p < m; ++p) u(p) = re_inner(ps.B[p], S);
        return u;
    };
    prob.upper = [](int, const Vec&) { return -1.0; };
    const double scale = std::max(1.0, Sh.cwiseAbs().maxCoeff());
    const auto res = nested_dual_bisection(prob, eps_bis * scale, 3);
    return herm(primal(res.mu));
}

CMat project_covariance(const MimoPlayerSet& ps, const CMat& Q0, double eps_bis) {
    const CMat S = project_reduced(ps, ps.V.adjoint() * herm(Q0) * ps.V, eps_bis);
    return herm(ps.V * S * ps.V.adjoint());
}

CMat eigen_waterfilling(const CMat& Heff, double P) {
    require(P >= 0.0, "eigen_waterfilling: negative budget");
    const int n = static_cast<int>(Heff.cols());
    Eigen::SelfAdjointEigenSolver<CMat> es(herm(Heff.adjoint() * Heff));
    const Vec& l = es.eigenvalues();  // ascending
    const double lmax = l(n - 1);
    Vec p = Vec::Zero(n);
    if (lmax > 0.0 && P > 0.0) {
        // strongest modes first; inverse gains ascend along the reversed order
        double acc = 0.0, mu = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double lk = l(n - k);
            if (lk <= 1e-14 * lmax) break;
            acc += 1.0 / lk;
            const double cand = (P + acc) / k;
            if (cand <= 1.0 / lk) break;
            mu = cand;
            const double next = k < n ? l(n - k - 1) : 0.0;
            if (next <= 1e-14 * lmax || cand <= 1.0 / next) break;
        }
        for (int k = 0; k < n; ++k)
            if (l(k) > 1e-14 * lmax) p(k) = std::max(0.0, mu - 1.0 / l(k));
    }
    return herm(es.eigenvectors() * p.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint());
}

MimoBestResponse mimo_best_response(const MimoScenario& s, int i, const Covariances& Q, double tau,
                                    const CMat& center, const CMat& price, const MimoBestResponseOptions& opt) {
    require(tau >= 0.0, "mimo_best_response: tau must be nonnegative");
    require(i >= 0 && i < s.I, "mimo_best_response: player index out of range");
    const MimoPlayerSet ps = mimo_player_set(s, i);
    const CMat& V = ps.V;
    const int d = ps.reduced_dim();
    const CMat Hs = pd_power(interference_covariance(s, i, Q), -0.5) * s.H[i][i] * V;
    const int nr = static_cast<int>(Hs.rows());
    const bool has_center = center.size() > 0 && tau > 0.0;
    const bool has_price = price.size() > 0 && price.cwiseAbs().maxCoeff() > 0.0;
    const CMat Cs = has_center ? CMat(herm(V.adjoint() * center * V)) : CMat::Zero(d, d);
    const CMat Ps = has_price ? CMat(herm(V.adjoint() * price * V)) : CMat::Zero(d, d);
    const double t_reg = has_center ? tau : 0.0;

    auto gradient = [&](const CMat& S) {
        CMat g = Hs.adjoint() * inverse_pd(CMat::Identity(nr, nr) + Hs * S * Hs.adjoint()) * Hs - Ps;
        if (t_reg > 0.0) g -= t_reg * (S - Cs);
        return CMat(herm(g));
    };
    auto proj = [&](const CMat& S) { return project_reduced(ps, S, opt.eps_bis); };

    MimoBestResponse out;
    CMat S;
    if (t_reg == 0.0 && !has_price && ps.B.empty()) {
        S = eigen_waterfilling(Hs, ps.P);
        out.converged = true;
    } else {
        // Projected gradient ascent. Steps are accepted on a local Lipschitz
        // estimate of the gradient rather than on objective decrease, which
        // stalls in rounding noise close to the optimum.
        S = proj(has_center ? Cs : CMat::Zero(d, d));
        CMat g = gradient(S);
        double step = 1.0;
        for (out.iterations = 0; out.iterations < opt.max_iter; ++out.iterations) {
            CMat cand, gc;
            double move = 0.0;
            for (int ls = 0; ls < 80; ++ls) {
                cand = proj(S + step * g);
                gc = gradient(cand);
                move = (cand - S).norm();
                if (step * (gc - g).norm() <= 0.9 * move || move == 0.0) break;
                step *= 0.5;
            }
            const double gmap = move / step;
            S = cand;
            g = gc;
            if (gmap <= opt.tol) {
                out.converged = true;
                break;
            }
            step *= 1.5;
        }
    }
    out.kkt_residual = (S - proj(S + gradient(S))).norm();
    out.Q = herm(V * S * V.adjoint());
    return out;
}

NepProblem make_mimo_game(const MimoScenario& s, const MimoBestResponseOptions& opt) {
    s.validate();
    const int n = s.nT;
    const int dim = n * n;
    std::vector<PlayerSpec> players;
    for (int i = 0; i < s.I; ++i) {
        PlayerSpec pl;
        pl.dim = dim;
        Vec lo = Vec::Constant(dim, -s.P(i) / std::sqrt(2.0));
        Vec hi = Vec::Constant(dim, s.P(i) / std::sqrt(2.0));
        lo.head(n).setZero();
        hi.head(n).setConstant(s.P(i));
        pl.set = PolyhedralSet::box(lo, hi);
        const MimoPlayerSet ps = mimo_player_set(s, i);
        const double eb = opt.eps_bis;
        pl.project = [ps, n, eb](const Vec& v) { return hvec(project_covariance(ps, unhvec(v, n), eb)); };
        pl.cost = [s, i, n](const Vec& x) { return -mimo_rate(s, i, split_covariances(x, s.I, n)); };
        pl.grad = [s, i, n](const Vec& x) {
            const Covariances Q = split_covariances(x, s.I, n);
            const CMat& Hii = s.H[i][i];
            const CMat T = interference_covariance(s, i, Q) + Hii * Q[i] * Hii.adjoint();
            return hvec(herm(-Hii.adjoint() * inverse_pd(T) * Hii));
        };
        pl.best_response = [s, i, n, opt](const Vec& x, const BestResponseArgs& a) {
            const Covariances Q = split_covariances(x, s.I, n);
            const CMat center = a.center.size() == n * n ? unhvec(a.center, n) : CMat();
            const CMat price = a.price.size() == n * n ? unhvec(a.price, n) : CMat();
            const auto br = mimo_best_response(s, i, Q, a.tau, center, price, opt);
            if (!br.converged && br.kkt_residual > 1e-5)
                throw Error("mimo best response of player " + std::to_string(i) +
                            " did not converge, KKT residual " + std::to_string(br.kkt_residual));
            return hvec(br.Q);
        };
        pl.feasible_point = Vec::Zero(dim);
        players.push_back(std::move(pl));
    }
    return NepProblem(std::move(players));
}

std::vector<CMat> mimo_interference_prices(const MimoScenario& s, const Vec& w) {
    require(w.size() == s.I, "mimo_interference_prices: one weight per player expected");
    std::vector<CMat> G;
    for (int i = 0; i < s.I; ++i) {
        CMat g = CMat::Zero(s.nT, s.nT);
        for (int j = 0; j < s.I; ++j)
            if (j != i) g += w(j) * s.H[j][i].adjoint() * s.H[j][i];
        G.push_back(herm(g));
    }
    return G;
}

double mimo_interference_merit(const MimoScenario& s, const Vec& w, const Covariances& Q) {
    require(w.size() == s.I, "mimo_interference_merit: one weight per player expected");
    double phi = 0.0;
    for (int i = 0; i < s.I; ++i)
        for (int j = 0; j < s.I; ++j)
            if (j != i) phi += w(i) * (s.H[i][j] * Q[j] * s.H[i][j].adjoint()).trace().real();
    return phi;
}

MimoSelectionReport ne_selection_mimo(const MimoScenario& s, SelectionConfig sel, const ProxConfig& prox,
                                      const Covariances& Q0, double merit_sign) {
    MimoSelectionReport rep;
    rep.tau_bar = tau_bar_mimo(s);
    const double tau0 = prox.tau_at ? prox.tau_at(0) : prox.tau;
    if (!(tau0 > rep.tau_bar))
        throw Error("ne_selection_mimo: tau = " + std::to_string(tau0) + " does not exceed the bound " +
                    std::to_string(rep.tau_bar));
    const Vec w = s.w.size() == s.I ? s.w : Vec::Ones(s.I);
    const Vec gam = merit_sign * stack_covariances(mimo_interference_prices(s, w));
    sel.merit_gradient = [gam](const Vec&) { return gam; };
    sel.merit_value = [gam](const Vec& x) { return gam.dot(x); };
    sel.lipschitz_phi = 0.0;
    ProxConfig cfg = prox;
    cfg.tau_min = std::max(cfg.tau_min, rep.tau_bar);
    rep.traj = ptra(make_mimo_game(s), sel, cfg, stack_covariances(Q0));
    return rep;
}

Covariances sample_feasible(const MimoScenario& s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    Covariances Q;
    for (int i = 0; i < s.I; ++i) {
        const MimoPlayerSet ps = mimo_player_set(s, i);
        const int d = ps.reduced_dim();
        const CMat A = random_complex(d, d, rng);
        CMat S = herm(A * A.adjoint());
        const double tr = S.trace().real();
        if (tr > 0.0) S *= ud(rng) * ps.P / tr;
        for (std::size_t p = 0; p < ps.B.size(); ++p) {
            const double u = re_inner(ps.B[p], S);
            if (u > ps.caps(p)) S *= ps.caps(p) / u * ud(rng);
        }
        Q.push_back(herm(ps.V * S * ps.V.adjoint()));
    }
    return Q;
}

Mat upsilon_at(const MimoScenario& s, const Covariances& Q) {
    require(static_cast<int>(Q.size()) == s.I, "upsilon_at: one covariance per player expected");
    Mat U = Mat::Identity(s.I, s.I);
    for (int i = 0; i < s.I; ++i) {
        CMat tot = s.Rn[i];
        for (int j = 0; j < s.I; ++j) tot += s.H[i][j] * Q[j] * s.H[i][j].adjoint();
        const CMat Si = inverse_pd(tot);
        const CMat& Hii = s.H[i][i];
        const CMat Rt = pd_power(Hii.adjoint() * Si * Hii, -0.5);
        for (int j = 0; j < s.I; ++j) {
            if (j == i) continue;
            const CMat Pt = Rt * (Hii.adjoint() * Si * s.H[i][j]) * Rt;
            U(i, j) = -std::max(0.0, lambda_max_h(Pt.adjoint() * Pt));
        }
    }
    return U;
}

QDominanceReport upsilon_q_dominance(const MimoScenario& s, int samples, std::uint64_t seed) {
    const Mat Ups = condensed_mimo(s).upsilon;
    std::mt19937_64 rng(seed);
    QDominanceReport rep;
    rep.worst_margin = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
        const Covariances Q = sample_feasible(s, rng);
        const Mat Uq = upsilon_at(s, Q);
        double margin = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < s.I; ++i)
            for (int j = 0; j < s.I; ++j)
                if (i != j) margin = std::max(margin, std::abs(Uq(i, j)) - std::abs(Ups(i, j)));
        if (s.I == 1) margin = 0.0;
        if (margin > rep.worst_margin) {
            rep.worst_margin = margin;
            if (margin > 1e-8) {
                rep.holds = false;
                rep.witness = Q;
            }
        }
    }
    return rep;
}

}  // namespace nepvi
