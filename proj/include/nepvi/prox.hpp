#pragma once

#include "nepvi/core_vi.hpp"
#include "nepvi/game.hpp"
#include "nepvi/nep_core.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace nepvi {

// Closed-form sequence families.
//   Zero            0
//   InverseSquare   c / (1 + n)^2
//   Geometric       c rho^n
//   Harmonic        c / (1 + a n)
//   Constant        c
struct SequenceSpec {
    enum class Kind { Zero, InverseSquare, Geometric, Harmonic, Constant };
    Kind kind = Kind::Zero;
    double c = 0.0;
    double rate = 0.0;  // rho for Geometric, a for Harmonic

    static SequenceSpec zero() { return {}; }
    static SequenceSpec inverse_square(double c) { return {Kind::InverseSquare, c, 0.0}; }
    static SequenceSpec geometric(double c, double rho) { return {Kind::Geometric, c, rho}; }
    static SequenceSpec harmonic(double eps0, double a) { return {Kind::Harmonic, eps0, a}; }
    static SequenceSpec constant(double v) { return {Kind::Constant, v, 0.0}; }

    double at(int n) const;
    bool nonnegative() const;
    bool summable() const;
    // positive, nonincreasing, tends to zero and has a divergent sum
    bool tikhonov_admissible() const;
    std::string describe() const;
    std::string to_json() const;
    static SequenceSpec from_json(const std::string& text);
};

struct ProxConfig {
    double tau = 1.0;
    std::function<double(int)> tau_at;  // optional per-outer-iteration tau
    double tau_min = -std::numeric_limits<double>::infinity();  // certified threshold, tau must exceed it
    SequenceSpec eps = SequenceSpec::zero();              // inexactness of the inner solve
    SequenceSpec eta = SequenceSpec::constant(1.0);       // relaxation
    double R_m = 1e-3;
    double R_M = 2.0 - 1e-3;
    double outer_tol = 1e-9;
    double inner_tol = 1e-10;
    int max_outer = 5000;
    int max_inner = 20000;
    double inner_contraction = -1.0;  // ||Gamma|| of the regularized game, if certified
    double residual_scale = 1.0;      // multiplies the natural-map residual in the inner stop
    bool no_signal_heuristic = false;
    int no_signal_window = 5;
    Schedule::Kind inner_schedule = Schedule::Kind::Jacobi;
    std::function<double(const Vec&)> metric;

    void validate() const;
};

struct SelectionConfig {
    std::function<Vec(const Vec&)> merit_gradient;
    std::function<double(const Vec&)> merit_value;
    SequenceSpec tikhonov = SequenceSpec::harmonic(0.5, 10.0);
    double lipschitz_phi = 0.0;
    double eps_stop = 1e-3;        // stop only once the Tikhonov weight is this small
    double divergence_cap = 1e12;  // merit magnitude treated as an unbounded level set

    void validate() const;
};

// max_i { sum_{j != i} beta_ij - alpha_i }
double tau_bar(const CondensedMatrices& cm);
// tau_bar + (I - 1) eps_bar L_phi
double tau_bar_eps(const CondensedMatrices& cm, double eps_bar, double L_phi, int I);

// Player costs become f_i + eps phi + (tau/2)||x_i - y_i||^2.
NepProblem regularized_game(const NepProblem& game, double tau, const Vec& center, double eps,
                            const std::function<Vec(const Vec&)>& merit_gradient = {},
                            const std::function<double(const Vec&)>& merit_value = {});

Trajectory pda(const NepProblem& game, const ProxConfig& cfg, const Vec& x0);
Trajectory apda(const NepProblem& game, const ProxConfig& cfg, const Vec& x0);
Trajectory ptra(const NepProblem& game, const SelectionConfig& sel, const ProxConfig& cfg, const Vec& x0);

// True iff residual_i <= local_eps_i for every player.
bool distributed_inner_termination(const Vec& residuals, const Vec& local_eps);
bool distributed_inner_termination(const Vec& residuals, const std::vector<SequenceSpec>& local_eps, int n);

}  // namespace nepvi
