#pragma once

#include "nepvi/types.hpp"

#include <functional>
#include <vector>

namespace nepvi {

// { x : lower <= x <= upper, W x <= alpha }
struct PolyhedralSet {
    Vec lower;
    Vec upper;
    Mat W;      // m x n_i, may have zero rows
    Vec alpha;  // m

    static PolyhedralSet box(const Vec& lower, const Vec& upper);

    int dim() const { return static_cast<int>(lower.size()); }
    int rows() const { return static_cast<int>(W.rows()); }
    bool contains(const Vec& x, double tol = 1e-9) const;
    void validate() const;
};

// Euclidean projection. The multipliers of the linear rows are found by
// nested dual bisection; eps_bis is the multiplier accuracy.
Vec project_polyhedron(const PolyhedralSet& set, const Vec& v, double eps_bis = 1e-12);

// Extra terms a best-response oracle has to honour:
//   minimize f_i(x_i, x_-i) + price' x_i + (tau/2) ||x_i - center||^2
struct BestResponseArgs {
    Vec center;
    double tau = 0.0;
    Vec price;
};

using CostFn = std::function<double(const Vec& x)>;
using GradFn = std::function<Vec(const Vec& x)>;
using BestResponseFn = std::function<Vec(const Vec& x, const BestResponseArgs& args)>;
using ProjectFn = std::function<Vec(const Vec& v)>;

// Oracles take the full stacked profile; grad returns the gradient of f_i
// with respect to the player's own block.
struct PlayerSpec {
    int dim = 0;
    PolyhedralSet set;
    ProjectFn project;  // overrides the polyhedral projection when set
    CostFn cost;
    GradFn grad;
    BestResponseFn best_response;
    Vec feasible_point;
};

class NepProblem {
public:
    std::vector<PlayerSpec> players;

    NepProblem() = default;
    explicit NepProblem(std::vector<PlayerSpec> p);

    int num_players() const { return static_cast<int>(players.size()); }
    int dim() const;
    int offset(int i) const { return offsets_.at(i); }
    std::vector<int> block_dims() const;

    Vec block(const Vec& x, int i) const;
    void set_block(Vec& x, int i, const Vec& v) const;

    Vec F(const Vec& x) const;
    Vec project_block(int i, const Vec& v) const;
    Vec project(const Vec& x) const;
    Vec feasible_point() const;
    bool is_feasible(const Vec& x, double tol = 1e-9) const;

    // Player i's (proximal, priced) best response against the rivals in x.
    // Falls back to projected gradient on the cost oracle when the player
    // has no closed-form oracle.
    Vec best_response(int i, const Vec& x, const BestResponseArgs& args = {}) const;

    // Largest relative mismatch between grad and a central difference of cost.
    double gradient_check(const Vec& x, double h = 1e-6) const;

private:
    std::vector<int> offsets_;
    void index();
};

// Players with f_i = 0.5 x_i' M_ii x_i + x_i'(sum_{j != i} M_ij x_j + b_i), so
// F(x) = M x + b. Scalar box-constrained players get a closed-form oracle.
NepProblem make_quadratic_game(const Mat& M, const Vec& b, const std::vector<PolyhedralSet>& sets);

}  // namespace nepvi
