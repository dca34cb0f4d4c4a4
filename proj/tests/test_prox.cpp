#include "doctest.h"

#include "nepvi/prox.hpp"

#include <cmath>
#include <random>

using namespace nepvi;

namespace {

std::vector<PolyhedralSet> unit_boxes(int n, double lo = -1.0, double hi = 1.0) {
    return std::vector<PolyhedralSet>(n, PolyhedralSet::box(Vec::Constant(1, lo), Vec::Constant(1, hi)));
}

NepProblem segment_game() { return make_quadratic_game(Mat::Ones(2, 2), Vec::Zero(2), unit_boxes(2)); }

NepProblem small_p_game() {
    Mat M(2, 2);
    M << 1.0, 4.0, -1.0 / 8.0, 1.0;
    Vec b(2);
    b << -2.0, -1.0;
    return make_quadratic_game(M, b, {PolyhedralSet::box(Vec::Constant(1, 0.0), Vec::Constant(1, 10.0)),
                                      PolyhedralSet::box(Vec::Constant(1, -2.0), Vec::Constant(1, 2.0))});
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

SelectionConfig linear_merit(double sign) {
    SelectionConfig sel;
    sel.merit_gradient = [sign](const Vec&) { return vec2(sign, 0.0); };
    sel.merit_value = [sign](const Vec& x) { return sign * x(0); };
    sel.tikhonov = SequenceSpec::harmonic(1.0, 0.1);
    return sel;
}

}  // namespace

TEST_CASE("sequence families") {
    CHECK(SequenceSpec::inverse_square(2.0).at(3) == doctest::Approx(2.0 / 16.0));
    CHECK(SequenceSpec::geometric(1.0, 0.5).at(4) == doctest::Approx(1.0 / 16.0));
    CHECK(SequenceSpec::harmonic(0.5, 10.0).at(2) == doctest::Approx(0.5 / 21.0));
    CHECK(SequenceSpec::inverse_square(1.0).summable());
    CHECK(SequenceSpec::geometric(1.0, 0.9).summable());
    CHECK_FALSE(SequenceSpec::geometric(1.0, 1.0).summable());
    CHECK_FALSE(SequenceSpec::harmonic(1.0, 1.0).summable());
    CHECK(SequenceSpec::harmonic(1.0, 1.0).tikhonov_admissible());
    CHECK_FALSE(SequenceSpec::inverse_square(1.0).tikhonov_admissible());
    const SequenceSpec h = SequenceSpec::harmonic(0.5, 10.0);
    const SequenceSpec back = SequenceSpec::from_json(h.to_json());
    CHECK(back.kind == h.kind);
    CHECK(back.c == h.c);
    CHECK(back.rate == h.rate);
}

TEST_CASE("config validation") {
    ProxConfig c;
    CHECK_NOTHROW(c.validate());
    c.tau = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c.tau = 1.0;
    c.eps = SequenceSpec::harmonic(1.0, 1.0);
    CHECK_THROWS_AS(c.validate(), Error);
    c.eps = SequenceSpec::zero();
    c.eta = SequenceSpec::constant(2.0);
    CHECK_THROWS_AS(c.validate(), Error);
    c.eta = SequenceSpec::constant(1.0);
    c.tau_min = 1.5;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("tau thresholds") {
    Vec alpha(2);
    alpha << 1.0, 1.0;
    Mat beta(2, 2);
    beta << 0.0, 4.0, 1.0 / 8.0, 0.0;
    const CondensedMatrices cm = condensed_from_bounds(alpha, beta);
    CHECK(tau_bar(cm) == doctest::Approx(3.0));
    CHECK(is_p_matrix(cm.upsilon + 3.1 * Mat::Identity(2, 2)));
    CHECK(tau_bar_eps(cm, 0.5, 2.0, 2) == doctest::Approx(4.0));
    CHECK(tau_bar_eps(cm, 0.0, 2.0, 2) == doctest::Approx(3.0));
    CHECK(tau_bar_eps(cm, 0.5, 2.0, 1) == doctest::Approx(3.0));
    CHECK(tau_bar(condensed_from_bounds(Vec::Ones(3), Mat::Zero(3, 3))) == doctest::Approx(-1.0));
    CHECK(tau_bar(condensed_from_bounds(Vec::Constant(1, 2.5), Mat::Zero(1, 1))) == doctest::Approx(-2.5));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ua(0.2, 2.0), ub(0.0, 1.5);
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + static_cast<int>(rng() % 6);
        Vec a(n);
        Mat b = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            a(i) = ua(rng);
            for (int j = 0; j < n; ++j)
                if (i != j) b(i, j) = ub(rng);
        }
        const CondensedMatrices c = condensed_from_bounds(a, b);
        const double tb = tau_bar(c);
        CHECK(is_p_matrix(c.upsilon + (tb + 1e-3) * Mat::Identity(n, n)));
    }
}

TEST_CASE("regularized game") {
    const NepProblem g = small_p_game();
    const Vec y = vec2(3.0, 0.5);

    SUBCASE("zero regularization keeps the map") {
        const NepProblem r = regularized_game(g, 0.0, y, 0.0);
        for (const Vec& x : {vec2(1.0, 1.0), vec2(5.0, -1.0)}) CHECK(r.F(x).isApprox(g.F(x)));
    }
    SUBCASE("at the center only the merit term is added") {
        auto grad = [](const Vec& x) { return vec2(x(1), 1.0); };
        const NepProblem r = regularized_game(g, 2.0, y, 0.3, grad);
        CHECK(r.F(y).isApprox(g.F(y) + 0.3 * grad(y)));
        CHECK_THROWS_AS(regularized_game(g, 2.0, y, 0.3), Error);
    }
    SUBCASE("condensed matrix shifts by tau for any center") {
        const CondensedMatrices base = sampled_condensed(g, 3, 1);
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> u0(0.0, 10.0), u1(-2.0, 2.0);
        for (int k = 0; k < 5; ++k) {
            const NepProblem r = regularized_game(g, 1.7, vec2(u0(rng), u1(rng)), 0.0);
            const CondensedMatrices cm = sampled_condensed(r, 3, 1);
            CHECK((cm.upsilon - base.upsilon - 1.7 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-5);
        }
    }
    SUBCASE("best response honours the proximal term") {
        // player 1 of the segment game: minimize 0.5 x^2 + x x2 + (tau/2)(x - y1)^2 on [-1, 1]
        const NepProblem seg = segment_game();
        const double tau = 2.0;
        const NepProblem r = regularized_game(seg, tau, vec2(0.4, 0.0), 0.0);
        const Vec x = vec2(0.0, -0.5);
        const double expect = std::clamp((tau * 0.4 + 0.5) / (1.0 + tau), -1.0, 1.0);
        CHECK(r.best_response(0, x)(0) == doctest::Approx(expect));
    }
}

TEST_CASE("PDA") {
    SUBCASE("agrees with plain best response on a P game") {
        const NepProblem g = small_p_game();
        const Trajectory abr = async_best_response(g, Schedule::jacobi(2, 5000), vec2(5.0, 1.0), 1e-12, 5000);
        REQUIRE(abr.converged);
        for (double tau : {0.5, 2.0}) {
            ProxConfig c;
            c.tau = tau;
            c.outer_tol = 1e-11;
            const Trajectory t = pda(g, c, vec2(5.0, 1.0));
            CHECK(t.converged);
            CHECK((t.x - abr.x).norm() <= 1e-9);
            CHECK(t.final_residual <= 1e-9);
        }
    }
    SUBCASE("segment game from the documented start") {
        ProxConfig c;
        c.tau = 1.0;
        const Trajectory t = pda(segment_game(), c, vec2(0.6, -0.2));
        CHECK(t.converged);
        CHECK(std::abs(t.x(0) + t.x(1)) <= 1e-8);
        CHECK(t.final_residual <= 1e-8);
    }
    SUBCASE("breaks the best-response cycle from random starts") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int s = 0; s < 20; ++s) {
            const Vec x0 = vec2(u(rng), u(rng));
            for (double tau : {0.5, 1.0, 2.0, 5.0}) {
                ProxConfig c;
                c.tau = tau;
                c.outer_tol = 1e-12;
                c.max_outer = 20000;
                const Trajectory t = pda(segment_game(), c, x0);
                CHECK(t.converged);
                CHECK(std::abs(t.x(0) + t.x(1)) <= 1e-6);
            }
        }
    }
    SUBCASE("starting at an equilibrium stops after one step") {
        ProxConfig c;
        const Trajectory t = pda(segment_game(), c, vec2(0.3, -0.3));
        CHECK(t.converged);
        CHECK(t.iterations == 1);
        CHECK(t.records.front().step_norm == 0.0);
    }
}

TEST_CASE("APDA") {
    const NepProblem g = segment_game();
    SUBCASE("exact and unrelaxed is the same as PDA") {
        ProxConfig c;
        c.tau = 1.5;
        const Trajectory a = apda(g, c, vec2(0.9, 0.4));
        const Trajectory p = pda(g, c, vec2(0.9, 0.4));
        REQUIRE(a.iterates.size() == p.iterates.size());
        for (size_t k = 0; k < a.iterates.size(); ++k) CHECK(a.iterates[k] == p.iterates[k]);
    }
    SUBCASE("over-relaxation still lands on the solution segment") {
        ProxConfig c;
        c.tau = 1.0;
        c.eta = SequenceSpec::constant(1.5);
        c.max_outer = 20000;
        const Trajectory t = apda(g, c, vec2(0.9, 0.4));
        CHECK(t.converged);
        CHECK(std::abs(t.x(0) + t.x(1)) <= 1e-7);
    }
    SUBCASE("inexact inner solves with under-relaxation stay feasible") {
        ProxConfig c;
        c.tau = 1.0;
        c.eps = SequenceSpec::inverse_square(0.1);
        c.eta = SequenceSpec::constant(0.8);
        c.max_outer = 20000;
        const Trajectory t = apda(g, c, vec2(-0.7, 0.95));
        CHECK(t.converged);
        for (const Vec& x : t.iterates) CHECK(g.is_feasible(x, 1e-12));
        CHECK(std::abs(t.x(0) + t.x(1)) <= 1e-6);
    }
}

TEST_CASE("PTRA selects the merit minimizer on the segment") {
    const NepProblem g = segment_game();
    for (double tau : {0.5, 1.0, 2.0}) {
        ProxConfig c;
        c.tau = tau;
        c.max_outer = 20000;
        c.outer_tol = 1e-10;
        const Trajectory lo = ptra(g, linear_merit(1.0), c, vec2(0.3, 0.1));
        const Trajectory hi = ptra(g, linear_merit(-1.0), c, vec2(0.3, 0.1));
        CHECK(lo.converged);
        CHECK(hi.converged);
        CHECK((lo.x - vec2(-1.0, 1.0)).norm() <= 1e-4);
        CHECK((hi.x - vec2(1.0, -1.0)).norm() <= 1e-4);
    }

    // the selected point beats every equilibrium PDA lands on
    ProxConfig c;
    c.max_outer = 20000;
    c.outer_tol = 1e-10;
    const Trajectory sel = ptra(g, linear_merit(1.0), c, vec2(0.0, 0.0));
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < 20; ++s) {
        const Trajectory t = pda(g, c, vec2(u(rng), u(rng)));
        CHECK(sel.x(0) <= t.x(0) + 1e-6);
    }

    SUBCASE("a unique equilibrium is returned whatever the merit") {
        ProxConfig pc;
        pc.max_outer = 20000;
        pc.outer_tol = 1e-10;
        const NepProblem p = small_p_game();
        const Trajectory a = ptra(p, linear_merit(1.0), pc, vec2(5.0, 1.0));
        const Trajectory b = ptra(p, linear_merit(-1.0), pc, vec2(5.0, 1.0));
        CHECK((a.x - b.x).norm() <= 1e-6);
        CHECK(natural_map_residual(p, a.x).maxCoeff() <= 1e-6);
    }
}

TEST_CASE("distributed inner termination") {
    CHECK(distributed_inner_termination(Vec::Zero(3), Vec::Constant(3, 1e-9)));
    Vec r(3);
    r << 0.0, 2e-3, 0.0;
    CHECK_FALSE(distributed_inner_termination(r, Vec::Constant(3, 1e-3)));
    std::vector<SequenceSpec> local = {SequenceSpec::inverse_square(1.0), SequenceSpec::geometric(1.0, 0.5),
                                       SequenceSpec::inverse_square(0.5)};
    CHECK(distributed_inner_termination(Vec::Constant(3, 1e-3), local, 5));
    CHECK_FALSE(distributed_inner_termination(Vec::Constant(3, 1e-1), local, 5));
    // the global tolerance is a finite sum of summable sequences
    double total = 0.0;
    for (int n = 0; n < 100000; ++n)
        for (const auto& s : local) total += s.at(n);
    CHECK(total < 1.0 * M_PI * M_PI / 6.0 + 2.0 + 0.5 * M_PI * M_PI / 6.0 + 1e-9);
    local.push_back(SequenceSpec::harmonic(1.0, 1.0));
    CHECK_THROWS_AS(distributed_inner_termination(Vec::Zero(4), local, 0), Error);
}
