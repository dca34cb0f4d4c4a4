#include "nepvi/complex_calculus.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace nepvi {

namespace {
const cplx J(0.0, 1.0);
}

double inner_product(const CMat& A, const CMat& B) {
    require(A.rows() == B.rows() && A.cols() == B.cols(), "inner_product: shape mismatch");
    return (A.adjoint() * B).trace().real();
}

CVec vec(const CMat& A) { return Eigen::Map<const CVec>(A.data(), A.size()); }

CMat unvec(const CVec& v, int rows, int cols) {
    require(v.size() == static_cast<Eigen::Index>(rows) * cols, "unvec: size mismatch");
    return Eigen::Map<const CMat>(v.data(), rows, cols);
}

WirtingerPair numeric_wirtinger(const ScalarFn& f, const CMat& Z, double h) {
    WirtingerPair w;
    w.d_z.resize(Z.rows(), Z.cols());
    w.d_zstar.resize(Z.rows(), Z.cols());
    for (Eigen::Index c = 0; c < Z.cols(); ++c) {
        for (Eigen::Index r = 0; r < Z.rows(); ++r) {
            const double s = h * std::max(1.0, std::abs(Z(r, c)));
            CMat zp = Z, zm = Z;
            zp(r, c) += s;
            zm(r, c) -= s;
            const double dx = (f(zp) - f(zm)) / (2 * s);
            zp = Z;
            zm = Z;
            zp(r, c) += J * s;
            zm(r, c) -= J * s;
            const double dy = (f(zp) - f(zm)) / (2 * s);
            if (!std::isfinite(dx) || !std::isfinite(dy)) throw Error("numeric_wirtinger: oracle returned NaN");
            w.d_z(r, c) = 0.5 * (dx - J * dy);
            w.d_zstar(r, c) = 0.5 * (dx + J * dy);
        }
    }
    return w;
}

WirtingerPair numeric_wirtinger_jacobian(const MatrixFn& F, const CMat& Z, double h) {
    const CMat F0 = F(Z);
    const Eigen::Index out = F0.size(), in = Z.size();
    WirtingerPair w;
    w.d_z.resize(out, in);
    w.d_zstar.resize(out, in);
    for (Eigen::Index idx = 0; idx < in; ++idx) {
        const Eigen::Index r = idx % Z.rows(), c = idx / Z.rows();
        const double s = h * std::max(1.0, std::abs(Z(r, c)));
        CMat zp = Z, zm = Z;
        zp(r, c) += s;
        zm(r, c) -= s;
        const CVec dx = (vec(F(zp)) - vec(F(zm))) / (2 * s);
        zp = Z;
        zm = Z;
        zp(r, c) += J * s;
        zm(r, c) -= J * s;
        const CVec dy = (vec(F(zp)) - vec(F(zm))) / (2 * s);
        if (!dx.allFinite() || !dy.allFinite()) throw Error("numeric_wirtinger: oracle returned NaN");
        w.d_z.col(idx) = 0.5 * (dx - J * dy);
        w.d_zstar.col(idx) = 0.5 * (dx + J * dy);
    }
    return w;
}

double logdet_value(const CMat& H, const CMat& Rn, const CMat& Z) {
    const CMat A = Rn + H * Z * H.adjoint();
    Eigen::PartialPivLU<CMat> lu(A);
    const CMat& LU = lu.matrixLU();
    double s = 0.0;
    for (Eigen::Index k = 0; k < LU.rows(); ++k) {
        const double a = std::abs(LU(k, k));
        if (!(a > 0.0)) throw Error("logdet_value: singular argument");
        s += std::log(a);
    }
    return 2.0 * s;
}

CMat logdet_cograd(const CMat& H, const CMat& Rn, const CMat& Z) {
    const CMat A = Rn + H * Z.adjoint() * H.adjoint();
    Eigen::FullPivLU<CMat> lu(A);
    if (!lu.isInvertible()) throw Error("logdet_cograd: singular argument");
    return H.adjoint() * lu.solve(H);
}

Mat commutation_matrix(int n, int m) {
    require(n >= 1 && m >= 1, "commutation_matrix: dimensions must be positive");
    Mat K = Mat::Zero(n * m, n * m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) K(j + i * m, i + j * n) = 1.0;
    return K;
}

AugmentedJacobian AugmentedJacobian::from_blocks(const CMat& dz_F, const CMat& dzs_F, int rows, int cols) {
    require(dz_F.rows() == dzs_F.rows() && dz_F.cols() == dzs_F.cols(),
            "augmented Jacobian: block shapes differ");
    require(dz_F.cols() == static_cast<Eigen::Index>(rows) * cols, "augmented Jacobian: column count mismatch");
    AugmentedJacobian a;
    a.dz_F = dz_F;
    a.dzs_F = dzs_F;
    a.dz_Fs = dzs_F.conjugate();
    a.dzs_Fs = dz_F.conjugate();
    a.rows = rows;
    a.cols = cols;
    return a;
}

CMat AugmentedJacobian::full() const {
    const Eigen::Index p = dz_F.rows(), q = dz_F.cols();
    CMat M(2 * p, 2 * q);
    M << dz_F, dzs_F, dz_Fs, dzs_Fs;
    return 0.5 * M;
}

AugmentedJacobian AugmentedJacobian::operator-() const {
    AugmentedJacobian a = *this;
    a.dz_F = -dz_F;
    a.dzs_F = -dzs_F;
    a.dz_Fs = -dz_Fs;
    a.dzs_Fs = -dzs_Fs;
    return a;
}

double AugmentedJacobian::conjugacy_defect() const {
    return std::max((dz_F.conjugate() - dzs_Fs).cwiseAbs().maxCoeff(),
                    (dzs_F.conjugate() - dz_Fs).cwiseAbs().maxCoeff());
}

cplx AugmentedJacobian::quadratic_form(const CMat& Y) const {
    require(Y.rows() == rows && Y.cols() == cols, "quadratic_form: direction has the wrong shape");
    const CVec y = vec(Y), ys = y.conjugate();
    const cplx top = y.dot(dz_F * y + dzs_F * ys);  // dot conjugates its left argument
    const cplx bot = ys.dot(dz_Fs * y + dzs_Fs * ys);
    return 0.5 * (top + bot);
}

AugmentedJacobian augmented_jacobian_numeric(const MatrixFn& F, const CMat& Z, double h) {
    const WirtingerPair w = numeric_wirtinger_jacobian(F, Z, h);
    AugmentedJacobian a = AugmentedJacobian::from_blocks(w.d_z, w.d_zstar, static_cast<int>(Z.rows()),
                                                         static_cast<int>(Z.cols()));
    require(a.conjugacy_defect() <= 1e-10, "augmented Jacobian: conjugacy relations violated");
    return a;
}

AugmentedJacobian augmented_hessian_logdet(const CMat& H, const CMat& Rn, const CMat& Z) {
    const CMat G = logdet_cograd(H, Rn, Z);
    const int n = static_cast<int>(G.rows());
    require(Z.rows() == n && Z.cols() == n, "augmented_hessian_logdet: Z must be square of size cols(H)");
    const CMat K = commutation_matrix(n, n).cast<cplx>();
    // dG = -G (dZ*)^T G, hence d vec(G) = -(G^T kron G) K d vec(Z*)
    CMat kron(n * n, n * n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) kron.block(a * n, b * n, n, n) = G(b, a) * G;
    const CMat dzs = -kron * K;
    return AugmentedJacobian::from_blocks(CMat::Zero(n * n, n * n), dzs, n, n);
}

SubspaceSampler SubspaceSampler::full(int rows, int cols) {
    SubspaceSampler s;
    s.kind = Kind::Full;
    s.rows = rows;
    s.cols = cols;
    return s;
}

SubspaceSampler SubspaceSampler::hermitian(int n) {
    SubspaceSampler s;
    s.kind = Kind::Hermitian;
    s.rows = s.cols = n;
    return s;
}

SubspaceSampler SubspaceSampler::custom(std::vector<CMat> basis) {
    require(!basis.empty(), "SubspaceSampler: custom basis is empty");
    SubspaceSampler s;
    s.kind = Kind::Custom;
    s.rows = static_cast<int>(basis[0].rows());
    s.cols = static_cast<int>(basis[0].cols());
    for (const auto& b : basis)
        require(b.rows() == s.rows && b.cols() == s.cols, "SubspaceSampler: basis shapes differ");
    s.basis = std::move(basis);
    return s;
}

CMat random_complex(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
    CMat A(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) A(r, c) = cplx(nd(rng), nd(rng));
    return A;
}

CMat random_hermitian(int n, std::mt19937_64& rng) {
    const CMat A = random_complex(n, n, rng);
    return 0.5 * (A + A.adjoint());
}

CMat SubspaceSampler::draw(std::mt19937_64& rng) const {
    switch (kind) {
        case Kind::Full: return random_complex(rows, cols, rng);
        case Kind::Hermitian: return random_hermitian(rows, rng);
        case Kind::Custom: {
            std::normal_distribution<double> nd(0.0, 1.0);
            CMat Y = CMat::Zero(rows, cols);
            for (const auto& b : basis) Y += nd(rng) * b;
            return Y;
        }
    }
    return CMat::Zero(rows, cols);
}

std::vector<CMat> SubspaceSampler::real_basis() const {
    std::vector<CMat> out;
    if (kind == Kind::Custom) return basis;
    if (kind == Kind::Full) {
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r) {
                CMat E = CMat::Zero(rows, cols);
                E(r, c) = 1.0;
                out.push_back(E);
                E(r, c) = J;
                out.push_back(E);
            }
        return out;
    }
    const double s = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < rows; ++i) {
        CMat E = CMat::Zero(rows, rows);
        E(i, i) = 1.0;
        out.push_back(E);
    }
    for (int i = 0; i < rows; ++i)
        for (int j = i + 1; j < rows; ++j) {
            CMat E = CMat::Zero(rows, rows);
            E(i, j) = E(j, i) = s;
            out.push_back(E);
            E(i, j) = J * s;
            E(j, i) = -J * s;
            out.push_back(E);
        }
    return out;
}

bool SubspaceSampler::contains(const CMat& Y, double tol) const {
    if (Y.rows() != rows || Y.cols() != cols) return false;
    switch (kind) {
        case Kind::Full: return true;
        case Kind::Hermitian: return (Y - Y.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, Y.norm());
        case Kind::Custom: {
            // least squares over real coefficients
            Mat A(2 * Y.size(), static_cast<Eigen::Index>(basis.size()));
            for (std::size_t k = 0; k < basis.size(); ++k) {
                const CVec b = vec(basis[k]);
                A.col(k) << b.real(), b.imag();
            }
            const CVec y = vec(Y);
            Vec rhs(2 * y.size());
            rhs << y.real(), y.imag();
            const Vec coef = A.colPivHouseholderQr().solve(rhs);
            return (A * coef - rhs).norm() <= tol * std::max(1.0, rhs.norm());
        }
    }
    return false;
}

AugmentedPsdReport is_augmented_psd(const AugmentedJacobian& aj, const SubspaceSampler& sampler,
                                    int samples, std::uint64_t seed) {
    require(sampler.rows == aj.rows && sampler.cols == aj.cols, "is_augmented_psd: sampler shape mismatch");
    AugmentedPsdReport rep;
    rep.min_form = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    for (int s = 0; s < samples; ++s) {
        const CMat Y = sampler.draw(rng);
        const double nrm = Y.squaredNorm();
        if (nrm == 0.0) continue;
        const cplx q = aj.quadratic_form(Y) / nrm;
        rep.max_imag = std::max(rep.max_imag, std::abs(q.imag()));
        if (q.real() < rep.min_form) {
            rep.min_form = q.real();
            if (q.real() < -1e-9) rep.witness = Y;
        }
    }
    rep.psd = rep.min_form >= -1e-9 && rep.max_imag <= 1e-10 * std::max(1.0, aj.full().cwiseAbs().maxCoeff());
    return rep;
}

AugmentedPsdReport is_augmented_psd_exact(const AugmentedJacobian& aj, const SubspaceSampler& sampler) {
    require(sampler.rows == aj.rows && sampler.cols == aj.cols, "is_augmented_psd: sampler shape mismatch");
    const auto B = sampler.real_basis();
    // Gram-Schmidt in the real inner product so eigenvalues are normalized forms.
    std::vector<CMat> Q;
    for (const auto& b : B) {
        CMat v = b;
        for (const auto& q : Q) v -= inner_product(q, v) * q;
        const double n = std::sqrt(inner_product(v, v));
        if (n > 1e-12) Q.push_back(v / n);
    }
    const int r = static_cast<int>(Q.size());
    Mat M(r, r);
    AugmentedPsdReport rep;
    rep.exact = true;
    for (int a = 0; a < r; ++a) {
        const cplx qa = aj.quadratic_form(Q[a]);
        rep.max_imag = std::max(rep.max_imag, std::abs(qa.imag()));
        M(a, a) = qa.real();
        for (int b = 0; b < a; ++b) {
            const cplx qs = aj.quadratic_form(Q[a] + Q[b]);
            rep.max_imag = std::max(rep.max_imag, std::abs(qs.imag()));
            M(a, b) = M(b, a) = 0.5 * (qs.real() - M(a, a) - M(b, b));
        }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    rep.min_form = es.eigenvalues()(0);
    rep.psd = rep.min_form >= -1e-9;
    if (!rep.psd) {
        CMat w = CMat::Zero(aj.rows, aj.cols);
        for (int a = 0; a < r; ++a) w += es.eigenvectors()(a, 0) * Q[a];
        rep.witness = w;
    }
    return rep;
}

double minimum_principle_residual(const MatrixFn& cograd, const MatrixFn& project, const CMat& Z,
                                  int samples, std::uint64_t seed, double spread) {
    const CMat g = cograd(Z);
    std::mt19937_64 rng(seed);
    const bool square = Z.rows() == Z.cols();
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const CMat dir = square ? random_hermitian(static_cast<int>(Z.rows()), rng)
                                : random_complex(static_cast<int>(Z.rows()), static_cast<int>(Z.cols()), rng);
        const double scale = spread * std::pow(10.0, -3.0 * (s % 4) / 3.0);
        const CMat Y = project(Z + scale * dir);
        best = std::min(best, inner_product(Y - Z, g));
    }
    return best;
}

}  // namespace nepvi
