#pragma once

#include "nepvi/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nepvi {

class NepProblem;

// I x I summaries of the block Jacobian of a game.
//   upsilon(i,i) = alpha_min(i), upsilon(i,j) = -beta_max(i,j)
//   gamma(i,j)   = beta_max(i,j) / alpha_min(i), zero diagonal
struct CondensedMatrices {
    Mat upsilon;
    Mat gamma;
    Vec alpha_min;
    Mat beta_max;
    bool heuristic = false;  // true when alpha/beta were estimated by sampling

    int size() const { return static_cast<int>(alpha_min.size()); }
};

struct ScalingConfig {
    std::vector<Mat> block_scalings;    // C_i, identity when empty
    std::optional<Mat> global_scaling;  // B

    void validate() const;
};

enum class Copositivity { Copositive, StrictlyCopositive, NotCopositive, Indeterminate };

struct CopositivityReport {
    Copositivity verdict = Copositivity::Indeterminate;
    Vec witness;                  // nonnegative x with x'Mx < 0 when NotCopositive
    bool psd_sufficient = false;  // symmetric part is PSD (sufficient for copositivity)
};

struct DominanceFlags {
    bool row_ok = false;
    bool col_ok = false;
};

enum class NepTag { StronglyMonotone, Monotone, P_Upsilon, Unknown };

struct NepEvidence {
    bool jf_low_given = false;
    bool jf_low_psd = false;
    bool jf_low_pd = false;
    bool upsilon_p = false;
    double rho_gamma = 0.0;
};

struct NepClass {
    NepTag tag = NepTag::Unknown;
    NepEvidence evidence;
    std::string describe() const;
};

inline constexpr int kMaxMinorDim = 20;
inline constexpr int kMaxEnumDim = 12;
inline constexpr double kDetTol = 1e-12;
inline constexpr double kEigTol = 1e-10;

CondensedMatrices condensed_from_bounds(const Vec& alpha_min, const Mat& beta_max);

// Exhaustive principal-minor test. Throws for dimension above kMaxMinorDim.
bool is_p_matrix(const Mat& m);

// rho(gamma) < 1. Returns false and fills the diagnostic when some alpha_min <= 0.
bool z_matrix_p_test(const CondensedMatrices& cm, std::string* diagnostic = nullptr);

double spectral_radius(const Mat& m);

// Smallest eigenvalue of the symmetric part.
double lambda_least(const Mat& m);

bool is_positive_semidefinite(const Mat& m, bool strict = false);

CopositivityReport copositivity_check(const Mat& m);

// delta(U) / (I (1 + zeta/delta)^(2(I-1)) max_i lambda_max(C_i'C_i))
double uniform_p_constant(const CondensedMatrices& cm, const ScalingConfig& scal = {});

// Smallest real eigenvalue over all principal submatrices (dimension <= kMaxEnumDim).
double min_principal_real_eigenvalue(const Mat& m);

DominanceFlags diagonal_dominance_p_test(const CondensedMatrices& cm, const Vec& w);

NepClass classify(const CondensedMatrices& cm, const Mat* jf_low = nullptr);

std::string to_string(NepTag tag);
std::string to_string(Copositivity c);

// Finite-difference estimate of the condensed matrices of a game by sampling
// points of its feasible set. Always flagged heuristic.
CondensedMatrices sampled_condensed(const NepProblem& game, int samples, std::uint64_t seed,
                                    const ScalingConfig& scal = {});

// Central-difference Jacobian of the stacked game map at x.
Mat numeric_jacobian(const NepProblem& game, const Vec& x, double h = 1e-6);

}  // namespace nepvi
