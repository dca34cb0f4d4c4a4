#include "doctest.h"

#include "nepvi/core_vi.hpp"
#include "nepvi/game.hpp"

#include <cmath>
#include <random>

using namespace nepvi;

namespace {

// Exact-arithmetic-free but Eigen-free determinant: Bareiss elimination with
// row pivoting on the largest entry.
double bareiss_det(Mat a) {
    const int n = static_cast<int>(a.rows());
    if (n == 0) return 1.0;
    double sign = 1.0, prev = 1.0;
    for (int k = 0; k < n - 1; ++k) {
        int piv = k;
        for (int r = k + 1; r < n; ++r)
            if (std::abs(a(r, k)) > std::abs(a(piv, k))) piv = r;
        if (a(piv, k) == 0.0) return 0.0;
        if (piv != k) {
            a.row(piv).swap(a.row(k));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j) a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
        prev = a(k, k);
    }
    return sign * a(n - 1, n - 1);
}

bool p_by_bareiss(const Mat& m) {
    const int n = static_cast<int>(m.rows());
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> idx;
        for (int b = 0; b < n; ++b)
            if (mask & (1u << b)) idx.push_back(b);
        Mat s(idx.size(), idx.size());
        for (size_t r = 0; r < idx.size(); ++r)
            for (size_t c = 0; c < idx.size(); ++c) s(r, c) = m(idx[r], idx[c]);
        if (bareiss_det(s) <= 0.0) return false;
    }
    return true;
}

CondensedMatrices random_condensed(std::mt19937_64& rng, int n, double spread) {
    std::uniform_real_distribution<double> ua(0.5, 2.0), ub(0.0, spread);
    Vec alpha(n);
    Mat beta = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        alpha(i) = ua(rng);
        for (int j = 0; j < n; ++j)
            if (i != j) beta(i, j) = ub(rng);
    }
    return condensed_from_bounds(alpha, beta);
}

}  // namespace

TEST_CASE("small example: P-matrix but not monotone") {
    Mat ups(2, 2);
    ups << 1.0, -4.0, -1.0 / 8.0, 1.0;
    Mat jf(2, 2);
    jf << 1.0, 4.0, -1.0 / 8.0, 1.0;
    Vec alpha(2);
    alpha << 1.0, 1.0;
    Mat beta(2, 2);
    beta << 0.0, 4.0, 1.0 / 8.0, 0.0;
    const CondensedMatrices cm = condensed_from_bounds(alpha, beta);

    CHECK(cm.upsilon.isApprox(ups));
    CHECK(is_p_matrix(cm.upsilon));
    CHECK(z_matrix_p_test(cm));
    CHECK(spectral_radius(cm.gamma) == doctest::Approx(std::sqrt(0.5)));

    // symmetric part [[1, 31/16], [31/16, 1]] has eigenvalue 1 - 31/16
    CHECK(lambda_least(jf) == doctest::Approx(1.0 - 31.0 / 16.0));
    CHECK_FALSE(is_positive_semidefinite(jf));

    const NepClass c = classify(cm, &jf);
    CHECK(c.tag == NepTag::P_Upsilon);
    CHECK(c.evidence.upsilon_p);
    CHECK_FALSE(c.evidence.jf_low_psd);
}

TEST_CASE("principal minors agree with the spectral test on Z-matrices") {
    std::mt19937_64 rng(42);
    int agree = 0, p_count = 0;
    for (int t = 0; t < 400; ++t) {
        const int n = 1 + static_cast<int>(rng() % 8);
        const CondensedMatrices cm = random_condensed(rng, n, 3.0 / n);
        const bool minors = is_p_matrix(cm.upsilon);
        const bool spectral = z_matrix_p_test(cm);
        agree += minors == spectral;
        p_count += minors;
        // independent determinant routine
        CHECK(p_by_bareiss(cm.upsilon) == minors);
    }
    CHECK(agree == 400);
    CHECK(p_count > 40);
    CHECK(p_count < 360);
}

TEST_CASE("non-positive alpha is reported, not divided by") {
    Vec alpha(2);
    alpha << 1.0, 0.0;
    Mat beta = Mat::Zero(2, 2);
    const CondensedMatrices cm = condensed_from_bounds(alpha, beta);
    std::string diag;
    CHECK_FALSE(z_matrix_p_test(cm, &diag));
    CHECK(diag.find("singular-Hessian") != std::string::npos);
    CHECK_THROWS_AS(condensed_from_bounds(Vec::Ones(2), -Mat::Ones(2, 2)), Error);
}

TEST_CASE("exhaustive minors refuse large dimensions") {
    CHECK_THROWS_AS(is_p_matrix(Mat::Identity(21, 21)), Error);
    CHECK(is_p_matrix(Mat::Identity(20, 20)));
}

TEST_CASE("copositivity") {
    SUBCASE("Horn matrix is copositive but not PSD") {
        Mat horn(5, 5);
        horn << 1, -1, 1, 1, -1,
                -1, 1, -1, 1, 1,
                1, -1, 1, -1, 1,
                1, 1, -1, 1, -1,
                -1, 1, 1, -1, 1;
        const CopositivityReport r = copositivity_check(horn);
        CHECK(r.verdict == Copositivity::Copositive);
        CHECK_FALSE(r.psd_sufficient);
    }
    SUBCASE("nonnegative and PD matrices are strictly copositive") {
        Mat a(3, 3);
        a << 1, 2, 0, 2, 1, 3, 0, 3, 1;
        CHECK(copositivity_check(a).verdict == Copositivity::StrictlyCopositive);
        CHECK(copositivity_check(Mat::Identity(4, 4)).verdict == Copositivity::StrictlyCopositive);
    }
    SUBCASE("negative direction in the orthant gives a witness") {
        Mat a(3, 3);
        a << 1, -2, 0, -2, 1, 0, 0, 0, 1;
        const CopositivityReport r = copositivity_check(a);
        REQUIRE(r.verdict == Copositivity::NotCopositive);
        REQUIRE(r.witness.size() == 3);
        CHECK((r.witness.array() >= 0.0).all());
        CHECK(r.witness.dot(a * r.witness) < 0.0);
    }
    SUBCASE("zero on a boundary ray: copositive, not strictly") {
        Mat a(2, 2);
        a << 0, 1, 1, 1;
        CHECK(copositivity_check(a).verdict == Copositivity::Copositive);
    }
    SUBCASE("above the enumeration cap the verdict is indeterminate") {
        Mat a = Mat::Identity(13, 13);
        a(0, 1) = a(1, 0) = -3.0;
        const CopositivityReport r = copositivity_check(a);
        CHECK(r.verdict == Copositivity::Indeterminate);
        CHECK_FALSE(r.psd_sufficient);
    }
}

TEST_CASE("copositivity agrees with sampling on random symmetric 3x3") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        Mat a(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) a(i, j) = a(j, i) = i == j ? pos(rng) : u(rng);
        double min_form = 1e300;
        for (int s = 0; s < 4000; ++s) {
            Vec x(3);
            x << pos(rng), pos(rng), pos(rng);
            x /= x.sum();
            min_form = std::min(min_form, x.dot(a * x));
        }
        const Copositivity v = copositivity_check(a).verdict;
        if (min_form < -1e-3) CHECK(v == Copositivity::NotCopositive);
        if (v != Copositivity::NotCopositive) CHECK(min_form > -1e-9);
    }
}

TEST_CASE("uniform P constant") {
    // for the identity: delta = 1, zeta = 0
    const CondensedMatrices id = condensed_from_bounds(Vec::Ones(3), Mat::Zero(3, 3));
    CHECK(uniform_p_constant(id) == doctest::Approx(1.0 / 3.0));
    Vec alpha(2);
    alpha << 1.0, 1.0;
    Mat beta(2, 2);
    beta << 0.0, 0.5, 0.5, 0.0;
    const CondensedMatrices cm = condensed_from_bounds(alpha, beta);
    // delta = 0.5 from the full matrix, zeta = 0.5
    CHECK(uniform_p_constant(cm) == doctest::Approx(0.5 / (2.0 * 4.0)));
    ScalingConfig sc;
    sc.block_scalings = {Mat::Constant(1, 1, 2.0), Mat::Constant(1, 1, 1.0)};
    CHECK(uniform_p_constant(cm, sc) == doctest::Approx(0.5 / (2.0 * 4.0 * 4.0)));
    beta << 0.0, 2.0, 2.0, 0.0;
    CHECK_THROWS_AS(uniform_p_constant(condensed_from_bounds(alpha, beta)), Error);
}

TEST_CASE("weighted diagonal dominance implies P") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + static_cast<int>(rng() % 5);
        const CondensedMatrices cm = random_condensed(rng, n, 1.5 / n);
        Vec w = Vec::Ones(n);
        const DominanceFlags f = diagonal_dominance_p_test(cm, w);
        if (f.row_ok || f.col_ok) {
            CHECK(is_p_matrix(cm.upsilon));
            CHECK(spectral_radius(cm.gamma) < 1.0);
        }
    }
}

TEST_CASE("sampled condensed matrices of a quadratic game") {
    Mat M(3, 3);
    M << 2.0, -0.5, 0.3, 0.4, 1.5, -0.2, 0.1, 0.6, 1.0;
    std::vector<PolyhedralSet> sets(3, PolyhedralSet::box(Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)));
    const NepProblem game = make_quadratic_game(M, Vec::Zero(3), sets);
    const CondensedMatrices cm = sampled_condensed(game, 5, 3);
    CHECK(cm.heuristic);
    for (int i = 0; i < 3; ++i) {
        CHECK(cm.alpha_min(i) == doctest::Approx(M(i, i)).epsilon(1e-6));
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(cm.beta_max(i, j) == doctest::Approx(std::abs(M(i, j))).epsilon(1e-6));
    }
    CHECK(numeric_jacobian(game, Vec::Zero(3)).isApprox(M, 1e-8));
}

TEST_CASE("classification order") {
    const CondensedMatrices cm = condensed_from_bounds(Vec::Ones(2), Mat::Zero(2, 2));
    const Mat pd = Mat::Identity(2, 2);
    CHECK(classify(cm, &pd).tag == NepTag::StronglyMonotone);
    CHECK(classify(cm).tag == NepTag::P_Upsilon);

    Mat beta(2, 2);
    beta << 0.0, 1.2, 1.2, 0.0;
    const CondensedMatrices weak = condensed_from_bounds(Vec::Ones(2), beta);
    Mat psd(2, 2);
    psd << 1.0, 1.0, 1.0, 1.0;
    CHECK(classify(weak, &psd).tag == NepTag::Monotone);
    CHECK(classify(weak).tag == NepTag::Unknown);
    CHECK(classify(weak, &psd).describe().find("Monotone") != std::string::npos);
}
