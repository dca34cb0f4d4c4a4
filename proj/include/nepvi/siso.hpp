#pragma once

#include "nepvi/bisection.hpp"
#include "nepvi/core_vi.hpp"
#include "nepvi/game.hpp"
#include "nepvi/prox.hpp"

#include <vector>

namespace nepvi {

// Power vectors are stacked player-major: p = (p_1, ..., p_I), p_i in R^N.
struct SisoScenario {
    int I = 0;
    int N = 0;
    std::vector<Mat> gains;  // gains[k](i, j) = |H_ij(k)|^2, receiver i, transmitter j
    Mat sigma2;              // I x N
    Vec P;                   // power budgets
    Mat pmax;                // I x N spectral masks
    std::vector<Mat> W;      // per player, m_i x N interference weights
    std::vector<Vec> alpha;  // per player, m_i caps

    double g(int i, int j, int k) const { return gains[k](i, j); }
    void validate() const;
};

double rate(const SisoScenario& s, int i, const Vec& p);
double sum_rate(const SisoScenario& s, const Vec& p);

// Interference plus noise at receiver i, own transmitter excluded.
Vec mui(const SisoScenario& s, int i, const Vec& p);

// G_i(p)_k = -d r_i / d p_i(k) = -|H_ii|^2 / (sigma_i^2 + sum_j |H_ij|^2 p_j), own power included.
Vec vi_map(const SisoScenario& s, const Vec& p);

struct SisoCondensed {
    Mat upsilon;               // unit diagonal, -max_k of the carrier entries off it
    std::vector<Mat> jg_low;   // per carrier, I x I
    std::vector<Mat> innr;     // per carrier, innr(i, j)
    CondensedMatrices cm;      // alpha = 1, beta = -offdiag(upsilon)
};
SisoCondensed condensed_siso(const SisoScenario& s);

// Low received / low generated MUI conditions for weights w.
DominanceFlags interference_conditions(const SisoScenario& s, const Vec& w);

// max_i sum_{j != i} max_k |H_ij|^2/|H_ii|^2 innr_ij(k) - 1
double tau_bound_siso(const SisoScenario& s);

// maximize sum_k log(1 + H_k p_k) - lambda_k p_k - (tau/2)||p - c||^2
// s.t. W p <= alpha, 0 <= p <= pmax. The budget is one row of W.
struct WaterfillingProblem {
    Vec H;
    Vec lambda;
    Vec c;
    Mat W;  // m x N
    Vec alpha;
    Vec pmax;
    double tau = 0.0;

    int size() const { return static_cast<int>(H.size()); }
    int rows() const { return static_cast<int>(W.rows()); }
    void validate() const;
    double objective(const Vec& p) const;
};

struct WaterfillingSolution {
    Vec p;
    Vec mu;
    long iterations = 0;
    long bound = 0;
};

inline constexpr int kMaxWaterfillRows = 4;

// Allocation on every carrier for fixed total prices mu_tilde.
Vec waterfill(const WaterfillingProblem& wp, const Vec& mu_tilde);

NestedBisectionResult nested_bisection(const WaterfillingProblem& wp, double eps_bis = 1e-9);
WaterfillingSolution proximal_best_response(const WaterfillingProblem& wp, double eps_bis = 1e-9);

// Budget row first, then the interference rows of player i.
WaterfillingProblem player_waterfilling(const SisoScenario& s, int i, const Vec& p,
                                        const BestResponseArgs& args = {});

NepProblem make_siso_game(const SisoScenario& s, double eps_bis = 1e-12);

// phi(p) = sum_i gamma_i' p_i with gamma_i(k) = w_i sum_{j != i} |H_ji(k)|^2.
Vec interference_prices(const SisoScenario& s, const Vec& weights);

struct SisoSelectionReport {
    double tau_sufficient = 0.0;
    double tau_bar = 0.0;
    Trajectory traj;
};

// PTRA on the SISO game with the interference merit scaled by merit_sign
// (+1 selects low interference, -1 the opposite, 0 disables selection).
SisoSelectionReport ne_selection_siso(const SisoScenario& s, const Vec& weights, SelectionConfig sel,
                                      const ProxConfig& prox, const Vec& p0, double merit_sign = 1.0);

}  // namespace nepvi
