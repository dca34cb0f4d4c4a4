#pragma once

#include "nepvi/core_vi.hpp"
#include "nepvi/game.hpp"
#include "nepvi/prox.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace nepvi {

using Covariances = std::vector<CMat>;

// All transmitters share nT antennas; receiver i has nR[i] >= nT antennas.
struct MimoScenario {
    int I = 0;
    int nT = 0;
    std::vector<int> nR;
    std::vector<std::vector<CMat>> H;  // H[i][j]: nR[i] x nT, transmitter j to receiver i
    std::vector<CMat> Rn;              // noise covariances, Hermitian PD
    Vec P;                             // trace budgets
    std::vector<CMat> U;               // null-constraint directions, nT x r (r may be 0)
    std::vector<std::vector<CMat>> G;  // average shaping matrices, nT x q each
    std::vector<Vec> Iave;             // caps matching G
    Vec w;                             // merit weights

    void validate() const;
};

// Real coordinates of a Hermitian n x n matrix: the diagonal, then sqrt(2) Re
// and sqrt(2) Im of the strict upper triangle row by row. The map is an
// isometry from (Hermitian, Re tr(A^H B)) onto R^{n^2}.
Vec hvec(const CMat& A);
CMat unhvec(const Vec& v, int n);

// Stacked profile <-> per-player covariances.
Vec stack_covariances(const Covariances& Q);
Covariances split_covariances(const Vec& x, int I, int n);

// R_n_i + sum_{j != i} H_ij Q_j H_ij^H
CMat interference_covariance(const MimoScenario& s, int i, const Covariances& Q);

double mimo_rate(const MimoScenario& s, int i, const Covariances& Q);
double mimo_sum_rate(const MimoScenario& s, const Covariances& Q);

// F_i = -H_ii^H (R_n_i + sum_j H_ij Q_j H_ij^H)^{-1} H_ii
std::vector<CMat> mimo_vi_map(const MimoScenario& s, const Covariances& Q);

struct MimoCondensed {
    Mat upsilon;  // unit diagonal
    Mat cross;    // rho(H_ii^{+H} H_ij^H H_ij H_ii^+)
    Vec innr;     // INNR_i (identical for every j)
    CondensedMatrices cm;
};
MimoCondensed condensed_mimo(const MimoScenario& s);

DominanceFlags conditions_mimo(const MimoScenario& s, const Vec& w);

double tau_bar_mimo(const MimoScenario& s);

// Feasible set of one player in the coordinates S of Q = V S V^H, where the
// columns of V span the orthogonal complement of range(U).
struct MimoPlayerSet {
    CMat V;                 // nT x d, orthonormal columns
    double P = 0.0;
    std::vector<CMat> B;    // d x d, V^H G G^H V
    Vec caps;

    int reduced_dim() const { return static_cast<int>(V.cols()); }
};

MimoPlayerSet mimo_player_set(const MimoScenario& s, int i);

// Frobenius projection of a Hermitian d x d matrix onto
// { S >= 0, tr S <= P, tr(B_p S) <= caps_p }.
CMat project_reduced(const MimoPlayerSet& ps, const CMat& S0, double eps_bis = 1e-12);

// Projection of an nT x nT Hermitian matrix onto the player's full set.
CMat project_covariance(const MimoPlayerSet& ps, const CMat& Q0, double eps_bis = 1e-12);

// Closed-form maximizer of log det(I + Heff Q Heff^H) over { Q >= 0, tr Q <= P }.
CMat eigen_waterfilling(const CMat& Heff, double P);

struct MimoBestResponseOptions {
    double tol = 1e-11;   // on the gradient-mapping norm
    int max_iter = 50000;
    double eps_bis = 1e-12;
};

struct MimoBestResponse {
    CMat Q;
    int iterations = 0;
    double kkt_residual = 0.0;
    bool converged = false;
};

// maximize R_i(Q_i, Q_-i) - tr(price Q_i) - (tau/2)||Q_i - center||_F^2 over the player's set.
// Empty price / center matrices mean zero price / no proximal term.
MimoBestResponse mimo_best_response(const MimoScenario& s, int i, const Covariances& Q, double tau,
                                    const CMat& center, const CMat& price,
                                    const MimoBestResponseOptions& opt = {});

// Players act on hvec(Q_i). Non-convergence of a best response throws.
NepProblem make_mimo_game(const MimoScenario& s, const MimoBestResponseOptions& opt = {});

// Gamma_i = sum_{j != i} w_j H_ji^H H_ji, the gradient of the interference merit in Q_i.
std::vector<CMat> mimo_interference_prices(const MimoScenario& s, const Vec& w);
double mimo_interference_merit(const MimoScenario& s, const Vec& w, const Covariances& Q);

struct MimoSelectionReport {
    double tau_bar = 0.0;
    Trajectory traj;
};

MimoSelectionReport ne_selection_mimo(const MimoScenario& s, SelectionConfig sel, const ProxConfig& prox,
                                      const Covariances& Q0, double merit_sign = 1.0);

// Random feasible profile: Q_i = V S V^H with S a scaled Wishart draw.
Covariances sample_feasible(const MimoScenario& s, std::mt19937_64& rng);

struct QDominanceReport {
    bool holds = true;
    double worst_margin = 0.0;  // max over samples of pointwise - analytic (<= 1e-8 when holding)
    Covariances witness;
};

// Pointwise rho(Psi~_ij(Q)^H Psi~_ij(Q)) against |[Upsilon^mimo]_ij| on sampled feasible Q.
QDominanceReport upsilon_q_dominance(const MimoScenario& s, int samples, std::uint64_t seed = 1);

// The pointwise comparison matrix at one profile (unit diagonal).
Mat upsilon_at(const MimoScenario& s, const Covariances& Q);

}  // namespace nepvi
