#pragma once

#include "nepvi/mimo.hpp"
#include "nepvi/prox.hpp"
#include "nepvi/siso.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

namespace nepvi {

enum class TargetClass { Any, PUpsilon, Monotone, MultiNe };

std::string to_string(TargetClass t);
TargetClass target_from_string(const std::string& s);

struct GeneratorSpec {
    std::string kind = "siso";  // or "mimo"
    int I = 4;
    int N = 16;                 // carriers (SISO)
    int antennas = 2;           // nT = nR (MIMO)
    int L = 10;                 // FIR taps (SISO)
    double snr_db = 5.0;
    double cross_db = -10.0;    // extra attenuation of every cross link
    double mask = 1.0;          // pmax_i(k) = mask * P_i
    double alpha = 0.0;         // interference cap; > 0 adds one primary-receiver row per player
    int null_dims = 0;          // MIMO: columns of U_i
    int shaping_rows = 0;       // MIMO: average shaping rows per player
    std::uint64_t seed = 1;
    TargetClass target = TargetClass::Any;
    int max_draws = 10000;

    void validate() const;
    std::string to_json() const;
    static GeneratorSpec from_json(const std::string& text);
};

// Rejection sampling until the certificate matches the target class. Throws
// with the achieved classification counts when max_draws is exhausted.
SisoScenario generate_siso(const GeneratorSpec& spec);
MimoScenario generate_mimo(const GeneratorSpec& spec);

// Certificates used for target classes and for the solver consistency check.
bool siso_p_certified(const SisoScenario& s);
bool siso_monotone_certified(const SisoScenario& s);
bool mimo_p_certified(const MimoScenario& s);
bool mimo_monotone_certified(const MimoScenario& s);

struct GradientBaselineOptions {
    int horizon = 100000;
    double stop_residual = 0.0;  // stop once the natural-map residual is at or below this
    double gamma_exp = 0.4;      // gamma_n = n^-0.4
    double delta_exp = 0.49;     // delta_n = n^-0.49
    bool record_iterates = false;
};

// x^{n+1} = P_Q(x^n - gamma_n (F(x^n) + delta_n x^n)), n = 1, 2, ...
Trajectory tikhonov_gradient_baseline(const NepProblem& game, const Vec& x0, const GradientBaselineOptions& opt);

struct RunConfig {
    std::string scenario_path;           // empty: use the generator
    std::optional<GeneratorSpec> generator;
    std::string scenario_json;           // filled by run(); replay uses it verbatim
    std::string algorithm = "abr";       // abr, pda, apda, ptra, tikhonov-grad
    std::string schedule = "jacobi";     // jacobi, gauss-seidel, async:<seed>:<maxdelay>
    std::string schedule_json;           // full table, filled by run()
    double tau = std::numeric_limits<double>::quiet_NaN();  // NaN: certified default
    double eps0 = 1.0;
    double eps_rate = 0.1;
    double eta = 1.0;
    double tol = 1e-8;
    int max_iter = 2000;
    std::uint64_t seed = 1;
    std::string merit = "interference";  // interference, none, custom:<path>
    double merit_sign = 1.0;
    std::string output = "out";
    bool force = false;

    void validate() const;
    std::string to_json() const;
    static RunConfig from_json(const std::string& text);
};

struct RunResult {
    bool converged = false;
    bool certified = false;
    bool refused = false;  // certificate mismatch without force
    int exit_code = 0;     // 0 converged, 2 not converged, 3 refused
    std::string summary_json;
    Trajectory traj;
    double sum_rate = 0.0;
};

// Runs the configured algorithm and writes trajectory.csv, summary.json,
// sumrate.dat, plot.gp and run_config.json into config.output.
RunResult run(RunConfig config);

}  // namespace nepvi
