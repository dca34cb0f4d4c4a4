#pragma once

#include "nepvi/types.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace nepvi {

// Re tr(A^H B)
double inner_product(const CMat& A, const CMat& B);

// Column-major vec.
CVec vec(const CMat& A);
CMat unvec(const CVec& v, int rows, int cols);

// For a scalar f the members are matrices shaped like Z holding df/dz_ij and
// df/dz*_ij. For a matrix-valued F they are the pq x nm Jacobians
// d vec(F) / d vec(Z)^T and d vec(F) / d vec(Z*)^T.
struct WirtingerPair {
    CMat d_z;
    CMat d_zstar;
};

using ScalarFn = std::function<double(const CMat&)>;
using MatrixFn = std::function<CMat(const CMat&)>;

WirtingerPair numeric_wirtinger(const ScalarFn& f, const CMat& Z, double h = 1e-6);
WirtingerPair numeric_wirtinger_jacobian(const MatrixFn& F, const CMat& Z, double h = 1e-6);

// f(Z) = 2 Re log det(Rn + H Z H^H) = 2 log |det(Rn + H Z H^H)|
double logdet_value(const CMat& H, const CMat& Rn, const CMat& Z);
// d f / d Z* = H^H (Rn + H Z^H H^H)^{-1} H
CMat logdet_cograd(const CMat& H, const CMat& Rn, const CMat& Z);

// vec(Z^T) = K vec(Z) for Z of size n x m.
Mat commutation_matrix(int n, int m);

// Blocks of 1/2 [[D_Z F, D_Z* F], [D_Z F*, D_Z* F*]].
struct AugmentedJacobian {
    CMat dz_F;
    CMat dzs_F;
    CMat dz_Fs;
    CMat dzs_Fs;
    int rows = 0;  // shape of the matrix variable Z
    int cols = 0;

    static AugmentedJacobian from_blocks(const CMat& dz_F, const CMat& dzs_F, int rows, int cols);
    CMat full() const;
    AugmentedJacobian operator-() const;
    // Largest violation of the block conjugacy relations.
    double conjugacy_defect() const;
    // vec([Y, Y*])^H J vec([Y, Y*]) (complex; the imaginary part should vanish)
    cplx quadratic_form(const CMat& Y) const;
};

AugmentedJacobian augmented_jacobian_numeric(const MatrixFn& F, const CMat& Z, double h = 1e-6);
// Augmented Jacobian of Z -> logdet_cograd(H, Rn, Z), in closed form.
AugmentedJacobian augmented_hessian_logdet(const CMat& H, const CMat& Rn, const CMat& Z);

struct SubspaceSampler {
    enum class Kind { Full, Hermitian, Custom };
    Kind kind = Kind::Hermitian;
    int rows = 0;
    int cols = 0;
    std::vector<CMat> basis;  // real-coefficient spanning set for Custom

    static SubspaceSampler full(int rows, int cols);
    static SubspaceSampler hermitian(int n);
    static SubspaceSampler custom(std::vector<CMat> basis);

    CMat draw(std::mt19937_64& rng) const;
    // Real-coefficient basis of the subspace.
    std::vector<CMat> real_basis() const;
    bool contains(const CMat& Y, double tol = 1e-12) const;
};

struct AugmentedPsdReport {
    bool psd = true;
    bool exact = false;       // true when decided by the eigenvalue path
    double min_form = 0.0;    // smallest (normalized) quadratic form seen
    double max_imag = 0.0;    // largest |Im| of the quadratic form
    CMat witness;             // direction with a negative form when !psd
};

// Monte-Carlo certificate over `samples` directions (seeded), normalized by ||Y||_F^2.
AugmentedPsdReport is_augmented_psd(const AugmentedJacobian& aj, const SubspaceSampler& sampler,
                                    int samples = 500, std::uint64_t seed = 1);
// Decides PSD on the subspace through the real symmetric matrix of the form
// in the sampler's real basis.
AugmentedPsdReport is_augmented_psd_exact(const AugmentedJacobian& aj, const SubspaceSampler& sampler);

// min over sampled feasible Y of <Y - Z, cograd(Z)>; feasible points come from
// projecting random perturbations of Z.
double minimum_principle_residual(const MatrixFn& cograd, const MatrixFn& project, const CMat& Z,
                                  int samples = 200, std::uint64_t seed = 1, double spread = 1.0);

CMat random_complex(int rows, int cols, std::mt19937_64& rng);
CMat random_hermitian(int n, std::mt19937_64& rng);

}  // namespace nepvi
