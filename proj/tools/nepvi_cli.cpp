#include "nepvi/core_vi.hpp"
#include "nepvi/experiments.hpp"
#include "nepvi/nep_core.hpp"
#include "nepvi/scenario_io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <iostream>

using namespace nepvi;
using json = nlohmann::json;

namespace {

json condensed_report(const CondensedMatrices& cm) {
    const NepClass c = classify(cm);
    const auto dom = diagonal_dominance_p_test(cm, Vec::Ones(cm.size()));
    const auto cop = copositivity_check(cm.upsilon);
    return {{"tag", to_string(c.tag)},
            {"p_matrix", c.evidence.upsilon_p},
            {"rho_gamma", c.evidence.rho_gamma},
            {"upsilon_psd", is_positive_semidefinite(cm.upsilon)},
            {"copositivity", to_string(cop.verdict)},
            {"tau_bar", tau_bar(cm)},
            {"low_received_mui", dom.row_ok},
            {"low_generated_mui", dom.col_ok},
            {"heuristic", cm.heuristic}};
}

json classify_text(const std::string& path) {
    const std::string text = read_text_file(path);
    if (std::filesystem::path(path).extension() == ".csv") {
        const Mat U = matrix_from_csv(text);
        require(U.rows() == U.cols(), "classify: the CSV matrix must be square");
        Mat beta = -U;
        beta.diagonal().setZero();
        return condensed_report(condensed_from_bounds(U.diagonal(), beta));
    }
    const std::string kind = scenario_kind(text);
    if (kind == "condensed") return condensed_report(condensed_from_json(text));
    if (kind == "siso") {
        const SisoScenario s = siso_from_json(text);
        json r = condensed_report(condensed_siso(s).cm);
        r["kind"] = "siso";
        r["jg_low_monotone"] = siso_monotone_certified(s);
        r["tau_selection_bound"] = tau_bound_siso(s);
        return r;
    }
    const MimoScenario s = mimo_from_json(text);
    json r = condensed_report(condensed_mimo(s).cm);
    r["kind"] = "mimo";
    return r;
}

struct SolveFlags {
    std::string scenario, config, algorithm = "abr", schedule = "jacobi", merit = "interference", output = "out";
    double tau = std::numeric_limits<double>::quiet_NaN(), eps0 = 1.0, eps_rate = 0.1, eta = 1.0, tol = 1e-8;
    double merit_sign = 1.0;
    int max_iter = 2000;
    std::uint64_t seed = 1;
    bool force = false;
};

void add_solve_flags(CLI::App* app, SolveFlags& f, bool selection) {
    app->add_option("--scenario", f.scenario, "Scenario JSON file");
    app->add_option("--config", f.config, "Run configuration JSON (flags given explicitly override it)");
    if (!selection) app->add_option("--algorithm", f.algorithm, "abr, pda, apda, ptra or tikhonov-grad");
    app->add_option("--schedule", f.schedule, "jacobi, gauss-seidel or async:<seed>:<maxdelay>");
    app->add_option("--tau", f.tau, "Proximal weight (default: certified bound + 1)");
    app->add_option("--eps0", f.eps0, "Initial Tikhonov weight");
    app->add_option("--eps-rate", f.eps_rate, "Tikhonov decay: eps_n = eps0 / (1 + rate n)");
    app->add_option("--eta", f.eta, "Relaxation in (0, 2)");
    app->add_option("--tol", f.tol, "Stopping tolerance");
    app->add_option("--max-iter", f.max_iter, "Iteration cap");
    app->add_option("--seed", f.seed, "Seed recorded with the run");
    app->add_option("--merit", f.merit, "interference, none or custom:<path>");
    app->add_option("--merit-sign", f.merit_sign, "+1 minimizes the merit, -1 maximizes it");
    app->add_option("--output", f.output, "Output directory");
    app->add_flag("--force", f.force, "Run even when the certificate does not support the algorithm");
}

RunConfig config_from(const SolveFlags& f, const CLI::App* app, bool selection) {
    RunConfig c = f.config.empty() ? RunConfig{} : RunConfig::from_json(read_text_file(f.config));
    auto given = [&](const char* name) { return f.config.empty() || app->count(name) > 0; };
    if (!f.scenario.empty()) {
        c.scenario_path = f.scenario;
        c.scenario_json.clear();
    }
    c.algorithm = selection ? "ptra" : (given("--algorithm") ? f.algorithm : c.algorithm);
    if (given("--schedule")) c.schedule = f.schedule;
    if (given("--tau")) c.tau = f.tau;
    if (given("--eps0")) c.eps0 = f.eps0;
    if (given("--eps-rate")) c.eps_rate = f.eps_rate;
    if (given("--eta")) c.eta = f.eta;
    if (given("--tol")) c.tol = f.tol;
    if (given("--max-iter")) c.max_iter = f.max_iter;
    if (given("--seed")) c.seed = f.seed;
    if (given("--merit")) c.merit = f.merit;
    if (given("--merit-sign")) c.merit_sign = f.merit_sign;
    if (given("--output")) c.output = f.output;
    if (given("--force")) c.force = f.force;
    return c;
}

int report(const RunResult& r) {
    std::cout << r.summary_json << "\n";
    if (r.refused) std::cerr << "certificate mismatch; rerun with --force to override\n";
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nash equilibrium problems via variational inequalities"};
    app.require_subcommand(1);

    GeneratorSpec gen;
    std::string gen_target = "any", gen_out;
    auto* g = app.add_subcommand("gen-scenario", "Generate a random SISO or MIMO scenario");
    g->add_option("--kind", gen.kind, "siso or mimo");
    g->add_option("--players", gen.I, "Number of players");
    g->add_option("--carriers", gen.N, "Number of carriers (siso)");
    g->add_option("--taps", gen.L, "FIR taps (siso)");
    g->add_option("--antennas", gen.antennas, "Antennas per transceiver (mimo)");
    g->add_option("--snr", gen.snr_db, "SNR in dB");
    g->add_option("--cross-db", gen.cross_db, "Cross-link attenuation in dB");
    g->add_option("--mask", gen.mask, "Spectral mask as a fraction of the budget (siso)");
    g->add_option("--alpha", gen.alpha, "Interference cap (siso, 0 disables)");
    g->add_option("--null-dims", gen.null_dims, "Null-constraint directions per player (mimo)");
    g->add_option("--shaping-rows", gen.shaping_rows, "Average shaping rows per player (mimo)");
    g->add_option("--seed", gen.seed, "Generator seed");
    g->add_option("--target", gen_target, "any, p_upsilon, monotone or multi_ne");
    g->add_option("--max-draws", gen.max_draws, "Rejection sampling cap");
    g->add_option("--output", gen_out, "Output file (stdout when omitted)");

    std::string cls_path;
    auto* c = app.add_subcommand("classify", "Classify a scenario or condensed matrix");
    c->add_option("scenario", cls_path, "Scenario JSON, condensed JSON or CSV matrix")->required();

    SolveFlags sf, lf;
    auto* s = app.add_subcommand("solve", "Solve a scenario");
    add_solve_flags(s, sf, false);
    auto* l = app.add_subcommand("select", "Equilibrium selection with a merit function");
    add_solve_flags(l, lf, true);

    std::string bench_path;
    double bench_res = 1e-3;
    int bench_cap = 100000;
    auto* b = app.add_subcommand("bench", "Best response against the Tikhonov gradient baseline");
    b->add_option("--scenario", bench_path, "Scenario JSON file")->required();
    b->add_option("--residual", bench_res, "Natural-map residual target");
    b->add_option("--max-iter", bench_cap, "Iteration cap for both methods");

    std::string replay_cfg, replay_out;
    auto* r = app.add_subcommand("replay", "Re-run a recorded run_config.json and compare trajectories");
    r->add_option("config", replay_cfg, "run_config.json of an earlier run")->required();
    r->add_option("--output", replay_out, "Output directory (default: <original>/replay)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*g) {
            gen.target = target_from_string(gen_target);
            const std::string text = gen.kind == "mimo" ? mimo_to_json(generate_mimo(gen)) : siso_to_json(generate_siso(gen));
            if (gen_out.empty())
                std::cout << text << "\n";
            else
                write_text_file(gen_out, text + "\n");
            return 0;
        }
        if (*c) {
            std::cout << classify_text(cls_path).dump(1) << "\n";
            return 0;
        }
        if (*s) return report(run(config_from(sf, s, false)));
        if (*l) return report(run(config_from(lf, l, true)));
        if (*b) {
            RunConfig rc;
            rc.scenario_path = bench_path;
            rc.max_iter = bench_cap;
            const std::string text = read_text_file(bench_path);
            const std::string kind = scenario_kind(text);
            const NepProblem game = kind == "siso" ? make_siso_game(siso_from_json(text)) : make_mimo_game(mimo_from_json(text));
            const Vec x0 = game.feasible_point();
            AbrOptions o;
            o.use_default_stop = false;
            o.stop = [&](int, const Vec& x) { return natural_map_residual(game, x).norm() <= bench_res; };
            const Trajectory a = async_best_response(game, Schedule::jacobi(game.num_players(), bench_cap + 1), x0,
                                                     bench_res, bench_cap, o);
            GradientBaselineOptions go;
            go.horizon = bench_cap;
            go.stop_residual = bench_res;
            const Trajectory t = tikhonov_gradient_baseline(game, x0, go);
            json out{{"residual_target", bench_res},
                     {"best_response_iterations", a.iterations},
                     {"best_response_reached", a.converged},
                     {"gradient_iterations", t.iterations},
                     {"gradient_reached", t.converged},
                     {"ratio", static_cast<double>(a.iterations) / std::max(1, t.iterations)}};
            std::cout << out.dump(1) << "\n";
            return a.converged && t.converged ? 0 : 2;
        }
        if (*r) {
            RunConfig rc = RunConfig::from_json(read_text_file(replay_cfg));
            const std::filesystem::path orig = std::filesystem::path(replay_cfg).parent_path();
            rc.output = replay_out.empty() ? (orig / "replay").string() : replay_out;
            const RunResult res = run(rc);
            const auto a = orig / "trajectory.csv";
            const auto bpath = std::filesystem::path(rc.output) / "trajectory.csv";
            if (std::filesystem::exists(a) && std::filesystem::exists(bpath)) {
                const bool same = read_text_file(a.string()) == read_text_file(bpath.string());
                std::cout << (same ? "trajectory identical" : "trajectory differs") << "\n";
                if (!same) return 2;
            }
            return res.exit_code;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
