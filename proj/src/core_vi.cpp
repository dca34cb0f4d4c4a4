#include "nepvi/core_vi.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace nepvi {

namespace {

Mat principal(const Mat& m, unsigned mask) {
    const int n = static_cast<int>(m.rows());
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) idx.push_back(i);
    const int k = static_cast<int>(idx.size());
    Mat s(k, k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) s(a, b) = m(idx[a], idx[b]);
    return s;
}

double det_small(const Mat& s) {
    switch (s.rows()) {
        case 1: return s(0, 0);
        case 2: return s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
        default: return s.partialPivLu().determinant();
    }
}

Mat symmetric_part(const Mat& m) { return 0.5 * (m + m.transpose()); }

// Adjugate by cofactors; used only when the matrix is (nearly) singular.
Mat adjugate(const Mat& a) {
    const int n = static_cast<int>(a.rows());
    if (n == 1) return Mat::Ones(1, 1);
    Mat adj(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            Mat minor(n - 1, n - 1);
            for (int r = 0, rr = 0; r < n; ++r) {
                if (r == j) continue;
                for (int c = 0, cc = 0; c < n; ++c) {
                    if (c == i) continue;
                    minor(rr, cc++) = a(r, c);
                }
                ++rr;
            }
            adj(i, j) = (((i + j) % 2) ? -1.0 : 1.0) * det_small(minor);
        }
    }
    return adj;
}

}  // namespace

void ScalingConfig::validate() const {
    for (const auto& c : block_scalings) {
        require(c.rows() == c.cols() && c.rows() > 0, "scaling matrix must be square");
        Eigen::JacobiSVD<Mat> svd(c);
        const auto& sv = svd.singularValues();
        require(sv(sv.size() - 1) > 0.0 && std::isfinite(sv(0) / sv(sv.size() - 1)),
                "scaling matrix is singular");
    }
    if (global_scaling) {
        Eigen::JacobiSVD<Mat> svd(*global_scaling);
        const auto& sv = svd.singularValues();
        require(sv(sv.size() - 1) > 0.0, "global scaling matrix is singular");
    }
}

CondensedMatrices condensed_from_bounds(const Vec& alpha_min, const Mat& beta_max) {
    const int n = static_cast<int>(alpha_min.size());
    if (beta_max.rows() != n || beta_max.cols() != n)
        throw Error("condensed_from_bounds: dimension mismatch between alpha and beta");
    require(alpha_min.allFinite(), "condensed_from_bounds: alpha_min must be finite");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            require(i == j ? beta_max(i, j) == 0.0 : beta_max(i, j) >= 0.0,
                    "condensed_from_bounds: beta_max must be nonnegative with zero diagonal");

    CondensedMatrices cm;
    cm.alpha_min = alpha_min;
    cm.beta_max = beta_max;
    cm.upsilon = -beta_max;
    cm.upsilon.diagonal() = alpha_min;
    cm.gamma = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            cm.gamma(i, j) = alpha_min(i) > 0.0 ? beta_max(i, j) / alpha_min(i)
                                                : std::numeric_limits<double>::infinity();
        }
    }
    return cm;
}

bool is_p_matrix(const Mat& m) {
    require(m.rows() == m.cols(), "is_p_matrix: matrix must be square");
    const int n = static_cast<int>(m.rows());
    if (n > kMaxMinorDim)
        throw Error("is_p_matrix: dimension " + std::to_string(n) +
                    " exceeds the exhaustive cap; use z_matrix_p_test");
    const unsigned total = 1u << n;
    for (unsigned mask = 1; mask < total; ++mask) {
        if (det_small(principal(m, mask)) <= kDetTol) return false;
    }
    return true;
}

double spectral_radius(const Mat& m) {
    require(m.rows() == m.cols(), "spectral_radius: matrix must be square");
    if (m.size() == 0) return 0.0;
    require(m.allFinite(), "spectral_radius: matrix must be finite");
    Eigen::EigenSolver<Mat> es(m, false);
    if (es.info() == Eigen::Success) return es.eigenvalues().cwiseAbs().maxCoeff();
    Eigen::ComplexEigenSolver<CMat> ces(m.cast<cplx>(), false);
    require(ces.info() == Eigen::Success, "spectral_radius: eigen decomposition failed");
    return ces.eigenvalues().cwiseAbs().maxCoeff();
}

double lambda_least(const Mat& m) {
    require(m.rows() == m.cols(), "lambda_least: matrix must be square");
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetric_part(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

bool z_matrix_p_test(const CondensedMatrices& cm, std::string* diagnostic) {
    for (int i = 0; i < cm.size(); ++i) {
        if (cm.alpha_min(i) <= 0.0) {
            if (diagnostic)
                *diagnostic = "singular-Hessian: alpha_min[" + std::to_string(i) +
                              "] <= 0, hence rho(Gamma) >= 1";
            return false;
        }
    }
    const double rho = spectral_radius(cm.gamma);
    if (diagnostic) {
        std::ostringstream os;
        os << "rho(Gamma) = " << rho;
        *diagnostic = os.str();
    }
    return rho < 1.0;
}

bool is_positive_semidefinite(const Mat& m, bool strict) {
    const double lmin = lambda_least(m);
    return strict ? lmin >= kEigTol : lmin >= -kEigTol;
}

CopositivityReport copositivity_check(const Mat& m) {
    require(m.rows() == m.cols(), "copositivity_check: matrix must be square");
    CopositivityReport rep;
    const Mat a = symmetric_part(m);
    const int n = static_cast<int>(a.rows());
    rep.psd_sufficient = n == 0 || is_positive_semidefinite(a);
    if (n > kMaxEnumDim) {
        rep.verdict = Copositivity::Indeterminate;
        return rep;
    }

    // Cottle-Habetler-Lemke: if every order-(k-1) principal submatrix of A is
    // copositive, A fails copositivity iff A^{-1} exists and is entrywise <= 0;
    // it fails strict copositivity iff det(A) <= 0 and adj(A) >= 0.
    const unsigned total = 1u << n;
    std::vector<char> cop(total, 1), strict(total, 1);
    std::vector<unsigned> order(total - 1);
    for (unsigned mask = 1; mask < total; ++mask) order[mask - 1] = mask;
    std::stable_sort(order.begin(), order.end(), [](unsigned x, unsigned y) {
        return std::popcount(x) < std::popcount(y);
    });

    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    bool found_witness = false;
    for (unsigned mask : order) {
        bool subs_cop = true, subs_strict = true;
        for (int b = 0; b < n; ++b) {
            const unsigned bit = 1u << b;
            if (!(mask & bit) || mask == bit) continue;
            subs_cop = subs_cop && cop[mask ^ bit];
            subs_strict = subs_strict && strict[mask ^ bit];
        }
        const Mat s = principal(a, mask);
        const int k = static_cast<int>(s.rows());
        const double det = det_small(s);
        const double det_tol = kDetTol * std::pow(scale, k);

        if (!subs_cop) {
            cop[mask] = 0;
        } else if (std::abs(det) > det_tol) {
            const Mat inv = s.inverse();
            const double tol = 1e-14 * std::max(1.0, inv.cwiseAbs().maxCoeff());
            if ((inv.array() <= tol).all()) {
                Vec x = (-inv * Vec::Ones(k)).cwiseMax(0.0);
                const double q = x.dot(s * x);
                if (q < -1e-14 * std::max(1.0, x.squaredNorm()) * scale) {
                    cop[mask] = 0;
                    if (!found_witness) {
                        found_witness = true;
                        rep.witness = Vec::Zero(n);
                        for (int b = 0, r = 0; b < n; ++b)
                            if (mask & (1u << b)) rep.witness(b) = x(r++);
                    }
                }
            }
        }

        if (!subs_strict || !cop[mask]) {
            strict[mask] = 0;
        } else {
            const Mat adj = std::abs(det) > det_tol ? Mat(det * s.inverse()) : adjugate(s);
            const double tol = 1e-12 * std::max(1.0, adj.cwiseAbs().maxCoeff());
            if (det <= det_tol && (adj.array() >= -tol).all()) strict[mask] = 0;
        }
    }

    const unsigned full = total - 1;
    if (strict[full])
        rep.verdict = Copositivity::StrictlyCopositive;
    else if (cop[full])
        rep.verdict = Copositivity::Copositive;
    else
        rep.verdict = Copositivity::NotCopositive;
    return rep;
}

double min_principal_real_eigenvalue(const Mat& m) {
    require(m.rows() == m.cols(), "min_principal_real_eigenvalue: matrix must be square");
    const int n = static_cast<int>(m.rows());
    require(n <= kMaxEnumDim, "min_principal_real_eigenvalue: dimension exceeds enumeration cap");
    double best = std::numeric_limits<double>::infinity();
    const unsigned total = 1u << n;
    for (unsigned mask = 1; mask < total; ++mask) {
        const Mat s = principal(m, mask);
        Eigen::EigenSolver<Mat> es(s, false);
        require(es.info() == Eigen::Success, "min_principal_real_eigenvalue: eigen solver failed");
        const auto ev = es.eigenvalues();
        for (int r = 0; r < ev.size(); ++r) {
            if (std::abs(ev(r).imag()) <= 1e-12 * (1.0 + std::abs(ev(r).real())))
                best = std::min(best, ev(r).real());
        }
    }
    return best;
}

double uniform_p_constant(const CondensedMatrices& cm, const ScalingConfig& scal) {
    scal.validate();
    const int n = cm.size();
    require(n >= 1, "uniform_p_constant: empty matrix");
    if (!is_p_matrix(cm.upsilon)) throw Error("uniform_p_constant: Upsilon is not a P-matrix");
    const double delta = min_principal_real_eigenvalue(cm.upsilon);
    double zeta = 0.0;
    for (int r = 0; r < n; ++r)
        for (int q = 0; q < n; ++q)
            if (r != q) zeta = std::max(zeta, std::abs(cm.upsilon(r, q)));
    double cmax = 1.0;
    if (!scal.block_scalings.empty()) {
        cmax = 0.0;
        for (const auto& c : scal.block_scalings) {
            Eigen::SelfAdjointEigenSolver<Mat> es(c.transpose() * c, Eigen::EigenvaluesOnly);
            cmax = std::max(cmax, es.eigenvalues().maxCoeff());
        }
    }
    return delta / (n * std::pow(1.0 + zeta / delta, 2.0 * (n - 1)) * cmax);
}

DominanceFlags diagonal_dominance_p_test(const CondensedMatrices& cm, const Vec& w) {
    const int n = cm.size();
    require(w.size() == n, "diagonal_dominance_p_test: weight dimension mismatch");
    require((w.array() > 0.0).all(), "diagonal_dominance_p_test: weights must be positive");
    DominanceFlags f{true, true};
    for (int i = 0; i < n; ++i) {
        if (cm.alpha_min(i) <= 0.0) return {false, false};
        double row = 0.0, col = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            row += w(j) * cm.beta_max(i, j) / cm.alpha_min(i);
            col += w(j) * cm.beta_max(j, i) / cm.alpha_min(i);
        }
        if (!(row / w(i) < 1.0)) f.row_ok = false;
        if (!(col / w(i) < 1.0)) f.col_ok = false;
    }
    return f;
}

NepClass classify(const CondensedMatrices& cm, const Mat* jf_low) {
    NepClass c;
    std::string diag;
    c.evidence.upsilon_p = z_matrix_p_test(cm, &diag);
    c.evidence.rho_gamma = (cm.alpha_min.array() > 0.0).all() ? spectral_radius(cm.gamma)
                                                              : std::numeric_limits<double>::infinity();
    if (jf_low) {
        c.evidence.jf_low_given = true;
        c.evidence.jf_low_psd = is_positive_semidefinite(*jf_low, false);
        c.evidence.jf_low_pd = is_positive_semidefinite(*jf_low, true);
    }
    if (c.evidence.jf_low_pd)
        c.tag = NepTag::StronglyMonotone;
    else if (c.evidence.upsilon_p)
        c.tag = NepTag::P_Upsilon;
    else if (c.evidence.jf_low_psd)
        c.tag = NepTag::Monotone;
    else
        c.tag = NepTag::Unknown;
    return c;
}

std::string NepClass::describe() const {
    std::ostringstream os;
    os << to_string(tag) << " [rho(Gamma)=" << evidence.rho_gamma
       << ", Upsilon P=" << (evidence.upsilon_p ? "yes" : "no");
    if (evidence.jf_low_given)
        os << ", JF_low PSD=" << (evidence.jf_low_psd ? "yes" : "no")
           << ", JF_low PD=" << (evidence.jf_low_pd ? "yes" : "no");
    os << "]";
    return os.str();
}

std::string to_string(NepTag tag) {
    switch (tag) {
        case NepTag::StronglyMonotone: return "StronglyMonotone";
        case NepTag::Monotone: return "Monotone";
        case NepTag::P_Upsilon: return "P_Upsilon";
        case NepTag::Unknown: return "Unknown";
    }
    return "Unknown";
}

std::string to_string(Copositivity c) {
    switch (c) {
        case Copositivity::Copositive: return "Copositive";
        case Copositivity::StrictlyCopositive: return "StrictlyCopositive";
        case Copositivity::NotCopositive: return "NotCopositive";
        case Copositivity::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

}  // namespace nepvi
