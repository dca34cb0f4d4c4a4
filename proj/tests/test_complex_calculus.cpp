#include "doctest.h"

#include "nepvi/complex_calculus.hpp"
#include "nepvi/mimo.hpp"

#include <cmath>
#include <random>

using namespace nepvi;

namespace {

const cplx J(0.0, 1.0);

CMat random_psd(int n, std::mt19937_64& rng, double scale = 0.3) {
    const CMat A = random_complex(n, n, rng);
    return scale * A * A.adjoint();
}

double rel_err(const CMat& a, const CMat& b) { return (a - b).norm() / std::max(1e-12, b.norm()); }

}  // namespace

TEST_CASE("inner product") {
    std::mt19937_64 rng(1);
    CHECK(inner_product(CMat::Identity(2, 2), CMat::Identity(2, 2)) == doctest::Approx(2.0));
    const CMat A = random_complex(3, 2, rng), B = random_complex(3, 2, rng);
    CHECK(std::abs(inner_product(A, J * A)) <= 1e-14);
    CHECK(inner_product(A, B) == doctest::Approx(inner_product(B, A)));
    CHECK(inner_product(A, A) == doctest::Approx(A.squaredNorm()));
    CHECK(unvec(vec(A), 3, 2) == A);
    CHECK(vec(A)(1) == A(1, 0));
    CHECK(vec(A)(3) == A(0, 1));
}

TEST_CASE("numeric Wirtinger derivatives") {
    std::mt19937_64 rng(2);
    const CMat Z = random_complex(1, 1, rng);
    const WirtingerPair sq = numeric_wirtinger([](const CMat& z) { return std::norm(z(0, 0)); }, Z);
    CHECK(std::abs(sq.d_z(0, 0) - std::conj(Z(0, 0))) <= 1e-8);
    CHECK(std::abs(sq.d_zstar(0, 0) - Z(0, 0)) <= 1e-8);

    const WirtingerPair re = numeric_wirtinger([](const CMat& z) { return z(0, 0).real(); }, Z);
    CHECK(std::abs(re.d_z(0, 0) - 0.5) <= 1e-9);
    CHECK(std::abs(re.d_zstar(0, 0) - 0.5) <= 1e-9);

    // f(Z) = Re tr(A^T Z) = (tr(A^T Z) + tr(A^H Z*)) / 2, so df/dZ = A/2
    const CMat A = random_complex(2, 3, rng), Y = random_complex(2, 3, rng);
    const WirtingerPair lin = numeric_wirtinger([&](const CMat& z) { return (A.transpose() * z).trace().real(); }, Y);
    CHECK((lin.d_z - 0.5 * A).norm() <= 1e-8);
    // real-valued f: the two derivatives are conjugate
    CHECK((lin.d_zstar - lin.d_z.conjugate()).norm() <= 1e-8);

    const WirtingerPair id = numeric_wirtinger_jacobian([](const CMat& z) { return z; }, Y);
    CHECK((id.d_z - CMat::Identity(6, 6)).norm() <= 1e-8);
    CHECK(id.d_zstar.norm() <= 1e-8);
    const WirtingerPair cj = numeric_wirtinger_jacobian([](const CMat& z) -> CMat { return z.conjugate(); }, Y);
    CHECK(cj.d_z.norm() <= 1e-8);
    CHECK((cj.d_zstar - CMat::Identity(6, 6)).norm() <= 1e-8);

    CHECK_THROWS_AS(numeric_wirtinger([](const CMat&) { return std::nan(""); }, Y), Error);
}

TEST_CASE("log-det cogradient") {
    std::mt19937_64 rng(3);
    CHECK(logdet_cograd(CMat::Zero(2, 2), CMat::Identity(2, 2), CMat::Zero(2, 2)).norm() == 0.0);
    CHECK((logdet_cograd(CMat::Identity(3, 3), CMat::Identity(3, 3), CMat::Zero(3, 3)) - CMat::Identity(3, 3)).norm() <= 1e-14);

    for (int t = 0; t < 50; ++t) {
        const int n = 1 + static_cast<int>(rng() % 4), r = 1 + static_cast<int>(rng() % 4);
        const CMat H = random_complex(r, n, rng);
        const CMat Rn = random_psd(r, rng) + CMat::Identity(r, r);
        const CMat Z = random_psd(n, rng);
        const WirtingerPair w = numeric_wirtinger([&](const CMat& z) { return logdet_value(H, Rn, z); }, Z);
        CHECK(rel_err(logdet_cograd(H, Rn, Z), w.d_zstar) <= 1e-5);
    }
}

TEST_CASE("commutation matrix") {
    CHECK(commutation_matrix(1, 1) == Mat::Ones(1, 1));
    const Mat K4 = commutation_matrix(2, 2);
    Mat swap = Mat::Identity(4, 4);
    swap.row(1).swap(swap.row(2));
    CHECK(K4 == swap);
    std::mt19937_64 rng(4);
    for (auto [n, m] : {std::pair{2, 3}, std::pair{3, 1}, std::pair{4, 4}}) {
        const Mat K = commutation_matrix(n, m);
        const CMat Z = random_complex(n, m, rng);
        const CVec lhs = vec(CMat(Z.transpose()));
        CHECK((lhs - K.cast<cplx>() * vec(Z)).norm() <= 1e-14);
        CHECK((K.transpose() * K - Mat::Identity(n * m, n * m)).norm() == 0.0);
        CHECK(K.sum() == doctest::Approx(n * m));
    }
    const Mat Kn = commutation_matrix(3, 3);
    CHECK(Kn * Kn == Mat::Identity(9, 9));
}

TEST_CASE("augmented Hessian of log-det") {
    std::mt19937_64 rng(5);
    const AugmentedJacobian zero = augmented_hessian_logdet(CMat::Zero(2, 2), CMat::Identity(2, 2), CMat::Zero(2, 2));
    CHECK(zero.full().norm() == 0.0);
    for (int t = 0; t < 20; ++t) {
        const int n = 1 + static_cast<int>(rng() % 3), r = n + static_cast<int>(rng() % 2);
        const CMat H = random_complex(r, n, rng);
        const CMat Rn = CMat::Identity(r, r);
        const CMat Z = random_psd(n, rng);
        const AugmentedJacobian an = augmented_hessian_logdet(H, Rn, Z);
        const AugmentedJacobian nu = augmented_jacobian_numeric([&](const CMat& z) { return logdet_cograd(H, Rn, z); }, Z);
        CHECK(an.dz_F.norm() == 0.0);
        CHECK(an.dzs_Fs.norm() == 0.0);
        CHECK((an.full() - nu.full()).norm() <= 1e-4 * std::max(1.0, an.full().norm()));
        CHECK(an.conjugacy_defect() <= 1e-12);
        // forms on structured vectors are real
        for (int s = 0; s < 10; ++s) CHECK(std::abs(an.quadratic_form(random_complex(n, n, rng)).imag()) <= 1e-10);
    }
}

TEST_CASE("first-order Taylor remainder is quadratic") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 20; ++t) {
        const int n = 2 + static_cast<int>(rng() % 3);
        const CMat H = random_complex(n, n, rng), Rn = CMat::Identity(n, n);
        const CMat Z = random_psd(n, rng), Y = random_hermitian(n, rng);
        const double f0 = logdet_value(H, Rn, Z);
        const double lin = 2.0 * inner_product(Y, logdet_cograd(H, Rn, Z));
        auto rem = [&](double s) { return std::abs(logdet_value(H, Rn, Z + s * Y) - f0 - s * lin); };
        const double s0 = 0.02;
        const double slope = std::log2(rem(s0) / rem(s0 / 2.0));
        CHECK(slope >= 1.8);
        CHECK(slope <= 2.2);
    }
}

TEST_CASE("concavity of log-det on Hermitian directions") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
        const int n = 1 + static_cast<int>(rng() % 4);
        const CMat H = random_complex(n + 1, n, rng), Rn = CMat::Identity(n + 1, n + 1);
        const CMat Z = random_psd(n, rng);
        const AugmentedJacobian neg = -augmented_hessian_logdet(H, Rn, Z);
        const AugmentedPsdReport rep = is_augmented_psd(neg, SubspaceSampler::hermitian(n), 500, t + 1);
        CHECK(rep.psd);
        CHECK(rep.max_imag <= 1e-10);
        CHECK(is_augmented_psd_exact(neg, SubspaceSampler::hermitian(n)).psd);

        // function-value midpoint test along a random PSD segment
        const CMat A = random_psd(n, rng), B = random_psd(n, rng);
        const double mid = logdet_value(H, Rn, 0.5 * (A + B));
        CHECK(mid >= 0.5 * (logdet_value(H, Rn, A) + logdet_value(H, Rn, B)) - 1e-12);
    }
    // over all complex directions the same matrix is not PSD: the form is
    // only meaningful on the affine hull of the feasible set
    const CMat H = CMat::Identity(2, 2);
    const AugmentedJacobian neg = -augmented_hessian_logdet(H, CMat::Identity(2, 2), CMat::Zero(2, 2));
    CHECK_FALSE(is_augmented_psd_exact(neg, SubspaceSampler::full(2, 2)).psd);
}

TEST_CASE("augmented PSD test detects a planted negative direction") {
    std::mt19937_64 rng(8);
    const int n = 3;
    const AugmentedJacobian zero = AugmentedJacobian::from_blocks(CMat::Zero(9, 9), CMat::Zero(9, 9), n, n);
    CHECK(is_augmented_psd(zero, SubspaceSampler::hermitian(n)).psd);

    const CMat Y0 = random_hermitian(n, rng);
    const CVec y0 = vec(Y0) / Y0.norm();
    const CMat planted = 0.05 * CMat::Identity(9, 9) - y0 * y0.adjoint();
    const AugmentedJacobian aj = AugmentedJacobian::from_blocks(planted, CMat::Zero(9, 9), n, n);
    const AugmentedPsdReport rep = is_augmented_psd(aj, SubspaceSampler::hermitian(n), 500, 3);
    CHECK_FALSE(rep.psd);
    REQUIRE(rep.witness.size() == n * n);
    CHECK(aj.quadratic_form(rep.witness).real() < 0.0);
    const AugmentedPsdReport ex = is_augmented_psd_exact(aj, SubspaceSampler::hermitian(n));
    CHECK_FALSE(ex.psd);
    CHECK(ex.min_form == doctest::Approx(0.05 - 1.0).epsilon(1e-9));
    CHECK(aj.quadratic_form(ex.witness).real() < 0.0);

    CHECK_THROWS_AS(is_augmented_psd(aj, SubspaceSampler::hermitian(2)), Error);
}

TEST_CASE("subspace samplers stay in their subspace") {
    std::mt19937_64 rng(9);
    const SubspaceSampler h = SubspaceSampler::hermitian(3);
    for (int s = 0; s < 50; ++s) CHECK(h.contains(h.draw(rng)));
    CHECK_FALSE(h.contains(random_complex(3, 3, rng)));
    CHECK(h.real_basis().size() == 9);

    // real symmetric 2x2 matrices as a custom subspace
    std::vector<CMat> basis(3, CMat::Zero(2, 2));
    basis[0](0, 0) = 1.0;
    basis[1](1, 1) = 1.0;
    basis[2](0, 1) = basis[2](1, 0) = 1.0;
    const SubspaceSampler c = SubspaceSampler::custom(basis);
    for (int s = 0; s < 50; ++s) CHECK(c.contains(c.draw(rng)));
    CMat odd = CMat::Zero(2, 2);
    odd(0, 1) = J;
    CHECK_FALSE(c.contains(odd));
    CHECK(SubspaceSampler::full(2, 3).real_basis().size() == 12);
}

TEST_CASE("mean value bracket for the log-det map") {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 10; ++t) {
        const int n = 2;
        const CMat H = random_complex(2, 2, rng), Rn = CMat::Identity(2, 2);
        const CMat Z1 = random_psd(n, rng), Z2 = random_psd(n, rng);
        auto F = [&](const CMat& z) -> CMat { return -logdet_cograd(H, Rn, z); };
        const double lhs = inner_product(Z2 - Z1, F(Z2) - F(Z1));
        double lo = 1e300, hi = -1e300;
        for (int k = 0; k <= 200; ++k) {
            const double s = k / 200.0;
            const double q = (-augmented_hessian_logdet(H, Rn, Z1 + s * (Z2 - Z1))).quadratic_form(Z2 - Z1).real();
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        CHECK(lhs >= lo - 1e-9);
        CHECK(lhs <= hi + 1e-9);
        CHECK(lhs >= -1e-12);
    }
}

TEST_CASE("minimum principle") {
    std::mt19937_64 rng(11);
    // interior optimum of a concave quadratic: cograd vanishes
    const CMat C = random_hermitian(2, rng);
    auto grad_q = [&](const CMat& z) -> CMat { return z - C; };
    auto ident = [](const CMat& z) { return z; };
    CHECK(std::abs(minimum_principle_residual(grad_q, ident, C)) <= 1e-14);

    // single-user capacity: eigen-waterfilling optimum satisfies the principle,
    // a feasible non-optimal point does not
    for (int t = 0; t < 10; ++t) {
        const int n = 3;
        const double P = 2.0;
        const CMat H = random_complex(n, n, rng), Rn = CMat::Identity(n, n);
        MimoPlayerSet ps;
        ps.V = CMat::Identity(n, n);
        ps.P = P;
        auto proj = [&](const CMat& z) { return project_covariance(ps, z); };
        auto cog = [&](const CMat& z) -> CMat { return -logdet_cograd(H, Rn, z); };
        const CMat Qopt = eigen_waterfilling(H, P);
        CHECK(minimum_principle_residual(cog, proj, Qopt, 200, t + 1) >= -1e-8);
        const CMat Qbad = (P / n) * CMat::Identity(n, n) * 0.5;
        CHECK(minimum_principle_residual(cog, proj, Qbad, 200, t + 1) < -1e-6);
    }
}
