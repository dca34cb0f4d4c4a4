#include "nepvi/experiments.hpp"

#include "nepvi/complex_calculus.hpp"
#include "nepvi/nep_core.hpp"
#include "nepvi/scenario_io.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

namespace nepvi {

using json = nlohmann::json;

std::string to_string(TargetClass t) {
    switch (t) {
        case TargetClass::Any: return "any";
        case TargetClass::PUpsilon: return "p_upsilon";
        case TargetClass::Monotone: return "monotone";
        case TargetClass::MultiNe: return "multi_ne";
    }
    return "any";
}

TargetClass target_from_string(const std::string& s) {
    if (s == "any") return TargetClass::Any;
    if (s == "p_upsilon") return TargetClass::PUpsilon;
    if (s == "monotone") return TargetClass::Monotone;
    if (s == "multi_ne") return TargetClass::MultiNe;
    throw Error("unknown target class '" + s + "' (any, p_upsilon, monotone, multi_ne)");
}

void GeneratorSpec::validate() const {
    require(kind == "siso" || kind == "mimo", "generator: kind must be siso or mimo");
    require(I >= 1, "generator: I must be positive");
    require(max_draws >= 1, "generator: max_draws must be positive");
    if (kind == "siso") {
        require(N >= 1, "generator: N must be positive");
        require(L >= 1 && L <= N, "generator: need 1 <= L <= N");
        require(mask > 0.0, "generator: mask must be positive");
    } else {
        require(antennas >= 1, "generator: antennas must be positive");
        require(null_dims >= 0 && null_dims < antennas, "generator: need 0 <= null_dims < antennas");
        require(shaping_rows >= 0 && shaping_rows <= 3, "generator: at most three shaping rows");
    }
    require(alpha >= 0.0, "generator: alpha must be nonnegative");
}

std::string GeneratorSpec::to_json() const {
    json j{{"kind", kind},        {"I", I},
           {"N", N},              {"antennas", antennas},
           {"L", L},              {"snr_db", snr_db},
           {"cross_db", cross_db}, {"mask", mask},
           {"alpha", alpha},      {"null_dims", null_dims},
           {"shaping_rows", shaping_rows}, {"seed", seed},
           {"target", nepvi::to_string(target)}, {"max_draws", max_draws}};
    return j.dump(1);
}

GeneratorSpec GeneratorSpec::from_json(const std::string& text) {
    const json j = json::parse(text);
    GeneratorSpec g;
    g.kind = j.value("kind", g.kind);
    g.I = j.value("I", g.I);
    g.N = j.value("N", g.N);
    g.antennas = j.value("antennas", g.antennas);
    g.L = j.value("L", g.L);
    g.snr_db = j.value("snr_db", g.snr_db);
    g.cross_db = j.value("cross_db", g.cross_db);
    g.mask = j.value("mask", g.mask);
    g.alpha = j.value("alpha", g.alpha);
    g.null_dims = j.value("null_dims", g.null_dims);
    g.shaping_rows = j.value("shaping_rows", g.shaping_rows);
    g.seed = j.value("seed", g.seed);
    g.target = target_from_string(j.value("target", std::string("any")));
    g.max_draws = j.value("max_draws", g.max_draws);
    g.validate();
    return g;
}

bool siso_p_certified(const SisoScenario& s) { return z_matrix_p_test(condensed_siso(s).cm); }

bool siso_monotone_certified(const SisoScenario& s) {
    for (const auto& jg : condensed_siso(s).jg_low)
        if (!is_positive_semidefinite(jg, false)) return false;
    return true;
}

bool mimo_p_certified(const MimoScenario& s) { return z_matrix_p_test(condensed_mimo(s).cm); }

bool mimo_monotone_certified(const MimoScenario& s) {
    return is_positive_semidefinite(condensed_mimo(s).upsilon, false);
}

namespace {

struct ClassCounts {
    int p = 0, mono = 0, multi = 0, draws = 0;
    std::string str() const {
        std::ostringstream os;
        os << draws << " draws: " << p << " P-certified, " << mono << " monotone, " << multi << " monotone with rho(Gamma) >= 1";
        return os.str();
    }
};

bool matches(TargetClass t, bool p, bool mono) {
    switch (t) {
        case TargetClass::Any: return true;
        case TargetClass::PUpsilon: return p;
        case TargetClass::Monotone: return mono;
        case TargetClass::MultiNe: return mono && !p;
    }
    return false;
}

// |sum_l h_l e^{-j 2 pi k l / N}|^2 for an L-tap CN(0, 1/L) filter
Vec fir_gains(int L, int N, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, std::sqrt(0.5 / L));
    std::vector<cplx> taps(L);
    for (auto& t : taps) t = cplx(nd(rng), nd(rng));
    Vec g(N);
    for (int k = 0; k < N; ++k) {
        cplx h = 0.0;
        for (int l = 0; l < L; ++l) h += taps[l] * std::polar(1.0, -2.0 * std::numbers::pi * k * l / N);
        g(k) = std::norm(h);
    }
    return g;
}

SisoScenario draw_siso(const GeneratorSpec& sp, std::mt19937_64& rng) {
    SisoScenario s;
    s.I = sp.I;
    s.N = sp.N;
    s.gains.assign(sp.N, Mat::Zero(sp.I, sp.I));
    const double att = std::pow(10.0, sp.cross_db / 10.0);
    for (int i = 0; i < sp.I; ++i)
        for (int j = 0; j < sp.I; ++j) {
            const Vec g = fir_gains(sp.L, sp.N, rng);
            for (int k = 0; k < sp.N; ++k) s.gains[k](i, j) = (i == j ? 1.0 : att) * g(k);
        }
    s.sigma2 = Mat::Ones(sp.I, sp.N);
    s.P = Vec::Constant(sp.I, std::pow(10.0, sp.snr_db / 10.0));
    s.pmax = sp.mask * s.P.replicate(1, sp.N);
    s.W.assign(sp.I, Mat(0, sp.N));
    s.alpha.assign(sp.I, Vec(0));
    if (sp.alpha > 0.0)
        for (int i = 0; i < sp.I; ++i) {
            const Mat w = att * fir_gains(sp.L, sp.N, rng).transpose();
            // a cap the mask already enforces would be a vacuous row
            if ((w * s.pmax.row(i).transpose())(0) <= sp.alpha) continue;
            s.W[i] = w;
            s.alpha[i] = Vec::Constant(1, sp.alpha);
        }
    return s;
}

MimoScenario draw_mimo(const GeneratorSpec& sp, std::mt19937_64& rng) {
    const int n = sp.antennas;
    MimoScenario s;
    s.I = sp.I;
    s.nT = n;
    s.nR.assign(sp.I, n);
    const double att = std::sqrt(std::pow(10.0, sp.cross_db / 10.0));
    s.H.assign(sp.I, {});
    for (int i = 0; i < sp.I; ++i)
        for (int j = 0; j < sp.I; ++j) s.H[i].push_back((i == j ? 1.0 : att) * random_complex(n, n, rng));
    s.Rn.assign(sp.I, CMat::Identity(n, n));
    s.P = Vec::Constant(sp.I, std::pow(10.0, sp.snr_db / 10.0));
    s.w = Vec::Ones(sp.I);
    s.U.assign(sp.I, CMat(n, 0));
    s.G.assign(sp.I, {});
    s.Iave.assign(sp.I, Vec(0));
    for (int i = 0; i < sp.I; ++i) {
        if (sp.null_dims > 0) s.U[i] = random_complex(n, sp.null_dims, rng);
        Vec caps(sp.shaping_rows);
        for (int p = 0; p < sp.shaping_rows; ++p) {
            const CMat g = att * random_complex(n, n, rng);
            // binds for allocations spending a third of the budget isotropically
            caps(p) = s.P(i) / (3.0 * n) * g.squaredNorm();
            s.G[i].push_back(g);
        }
        s.Iave[i] = caps;
    }
    return s;
}

}  // namespace

SisoScenario generate_siso(const GeneratorSpec& spec) {
    spec.validate();
    require(spec.kind == "siso", "generate_siso: spec kind is not siso");
    std::mt19937_64 rng(spec.seed);
    ClassCounts cc;
    for (; cc.draws < spec.max_draws;) {
        SisoScenario s = draw_siso(spec, rng);
        ++cc.draws;
        const bool p = siso_p_certified(s);
        const bool mono = siso_monotone_certified(s);
        cc.p += p;
        cc.mono += mono;
        cc.multi += mono && !p;
        if (matches(spec.target, p, mono)) return s;
    }
    throw Error("generate_siso: target class " + to_string(spec.target) + " not reached after " + cc.str());
}

MimoScenario generate_mimo(const GeneratorSpec& spec) {
    spec.validate();
    require(spec.kind == "mimo", "generate_mimo: spec kind is not mimo");
    std::mt19937_64 rng(spec.seed);
    ClassCounts cc;
    for (; cc.draws < spec.max_draws;) {
        MimoScenario s = draw_mimo(spec, rng);
        ++cc.draws;
        const bool p = mimo_p_certified(s);
        const bool mono = mimo_monotone_certified(s);
        cc.p += p;
        cc.mono += mono;
        cc.multi += mono && !p;
        if (matches(spec.target, p, mono)) return s;
    }
    throw Error("generate_mimo: target class " + to_string(spec.target) + " not reached after " + cc.str());
}

Trajectory tikhonov_gradient_baseline(const NepProblem& game, const Vec& x0, const GradientBaselineOptions& opt) {
    require(opt.horizon >= 1, "tikhonov_gradient_baseline: horizon must be positive");
    Trajectory traj;
    Vec x = game.project(x0);
    if (opt.record_iterates) traj.iterates.push_back(x);
    const int I = game.num_players();
    for (int n = 1; n <= opt.horizon; ++n) {
        const double gam = std::pow(static_cast<double>(n), -opt.gamma_exp);
        const double del = std::pow(static_cast<double>(n), -opt.delta_exp);
        const Vec next = game.project(x - gam * (game.F(x) + del * x));
        IterationRecord rec;
        rec.iter = n - 1;
        rec.player_step = Vec(I);
        for (int i = 0; i < I; ++i) rec.player_step(i) = (game.block(next, i) - game.block(x, i)).norm();
        rec.step_norm = (next - x).norm();
        rec.nat_residual = natural_map_residual(game, next);
        x = next;
        if (opt.record_iterates) traj.iterates.push_back(x);
        const double res = rec.nat_residual.norm();
        traj.records.push_back(std::move(rec));
        traj.iterations = n;
        traj.final_residual = res;
        if (opt.stop_residual > 0.0 && res <= opt.stop_residual) {
            traj.converged = true;
            break;
        }
    }
    traj.x = x;
    traj.message = traj.converged ? "residual target reached" : "horizon exhausted";
    return traj;
}

void RunConfig::validate() const {
    static const char* algs[] = {"abr", "pda", "apda", "ptra", "tikhonov-grad"};
    require(std::find(std::begin(algs), std::end(algs), algorithm) != std::end(algs),
            "run config: unknown algorithm '" + algorithm + "'");
    require(!scenario_path.empty() || generator.has_value() || !scenario_json.empty(),
            "run config: a scenario path or generator spec is required");
    require(tol > 0.0, "run config: tol must be positive");
    require(max_iter >= 1, "run config: max_iter must be positive");
    require(std::isnan(tau) || tau >= 0.0, "run config: tau must be nonnegative");
    require(eps0 >= 0.0 && eps_rate >= 0.0, "run config: Tikhonov sequence parameters must be nonnegative");
    require(eta > 0.0 && eta < 2.0, "run config: eta must lie in (0, 2)");
    require(merit == "interference" || merit == "none" || merit.rfind("custom:", 0) == 0,
            "run config: merit must be interference, none or custom:<path>");
    require(schedule == "jacobi" || schedule == "gauss-seidel" || schedule.rfind("async:", 0) == 0,
            "run config: schedule must be jacobi, gauss-seidel or async:<seed>:<maxdelay>");
}

std::string RunConfig::to_json() const {
    json j;
    j["scenario_path"] = scenario_path;
    if (generator) j["generator"] = json::parse(generator->to_json());
    if (!scenario_json.empty()) j["scenario"] = json::parse(scenario_json);
    j["algorithm"] = algorithm;
    j["schedule"] = schedule;
    if (!schedule_json.empty()) j["schedule_table"] = json::parse(schedule_json);
    if (std::isnan(tau))
        j["tau"] = nullptr;
    else
        j["tau"] = tau;
    j["eps0"] = eps0;
    j["eps_rate"] = eps_rate;
    j["eta"] = eta;
    j["tol"] = tol;
    j["max_iter"] = max_iter;
    j["seed"] = seed;
    j["merit"] = merit;
    j["merit_sign"] = merit_sign;
    j["output"] = output;
    j["force"] = force;
    return j.dump(1);
}

RunConfig RunConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("run config: ") + e.what());
    }
    RunConfig c;
    c.scenario_path = j.value("scenario_path", std::string());
    if (j.contains("generator")) c.generator = GeneratorSpec::from_json(j["generator"].dump());
    if (j.contains("scenario")) c.scenario_json = j["scenario"].dump(1);
    c.algorithm = j.value("algorithm", c.algorithm);
    c.schedule = j.value("schedule", c.schedule);
    if (j.contains("schedule_table")) c.schedule_json = j["schedule_table"].dump();
    if (j.contains("tau") && !j["tau"].is_null()) c.tau = j["tau"].get<double>();
    c.eps0 = j.value("eps0", c.eps0);
    c.eps_rate = j.value("eps_rate", c.eps_rate);
    c.eta = j.value("eta", c.eta);
    c.tol = j.value("tol", c.tol);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.seed = j.value("seed", c.seed);
    c.merit = j.value("merit", c.merit);
    c.merit_sign = j.value("merit_sign", c.merit_sign);
    c.output = j.value("output", c.output);
    c.force = j.value("force", c.force);
    c.validate();
    return c;
}

namespace {

Schedule make_schedule(const RunConfig& c, int players, int horizon) {
    if (c.schedule == "jacobi") return Schedule::jacobi(players, horizon);
    if (c.schedule == "gauss-seidel") return Schedule::gauss_seidel(players, horizon);
    if (!c.schedule_json.empty()) {
        Schedule s = Schedule::from_json(c.schedule_json);
        require(s.players() == players, "run: recorded schedule has the wrong number of players");
        return s;
    }
    // async:<seed>:<maxdelay>
    const std::string rest = c.schedule.substr(6);
    const auto colon = rest.find(':');
    require(colon != std::string::npos, "run: schedule must read async:<seed>:<maxdelay>");
    try {
        const auto seed = static_cast<std::uint64_t>(std::stoull(rest.substr(0, colon)));
        const int delay = std::stoi(rest.substr(colon + 1));
        require(delay >= 0, "run: max delay must be nonnegative");
        return Schedule::random_delay(players, horizon, delay, seed);
    } catch (const std::logic_error&) {
        throw Error("run: schedule must read async:<seed>:<maxdelay>");
    }
}

// The scenario-specific pieces run() needs, behind one interface.
struct Instance {
    std::string kind;
    NepProblem game;
    bool p_cert = false;
    bool mono_cert = false;
    double rho_gamma = 0.0;
    double tau_bar = 0.0;
    double tau_select = 0.0;  // smallest tau the selection routine accepts
    std::function<double(const Vec&)> sum_rate;
    Vec interference_price;
    SisoScenario siso;
    MimoScenario mimo;
};

Instance load_instance(const std::string& text) {
    Instance in;
    in.kind = scenario_kind(text);
    if (in.kind == "siso") {
        in.siso = siso_from_json(text);
        in.game = make_siso_game(in.siso);
        const auto c = condensed_siso(in.siso);
        in.p_cert = z_matrix_p_test(c.cm);
        in.mono_cert = siso_monotone_certified(in.siso);
        in.rho_gamma = spectral_radius(c.cm.gamma);
        in.tau_bar = tau_bar(c.cm);
        in.tau_select = std::max(in.tau_bar, tau_bound_siso(in.siso));
        const SisoScenario s = in.siso;
        in.sum_rate = [s](const Vec& x) { return sum_rate(s, x); };
        in.interference_price = interference_prices(s, Vec::Ones(s.I));
    } else if (in.kind == "mimo") {
        in.mimo = mimo_from_json(text);
        in.game = make_mimo_game(in.mimo);
        const auto c = condensed_mimo(in.mimo);
        in.p_cert = z_matrix_p_test(c.cm);
        in.mono_cert = is_positive_semidefinite(c.upsilon, false);
        in.rho_gamma = spectral_radius(c.cm.gamma);
        in.tau_bar = tau_bar(c.cm);
        in.tau_select = in.tau_bar;
        const MimoScenario s = in.mimo;
        in.sum_rate = [s](const Vec& x) { return mimo_sum_rate(s, split_covariances(x, s.I, s.nT)); };
        const Vec w = s.w.size() == s.I ? s.w : Vec::Ones(s.I);
        in.interference_price = stack_covariances(mimo_interference_prices(s, w));
    } else {
        throw Error("run: scenario kind '" + in.kind + "' cannot be solved");
    }
    return in;
}

std::string sumrate_dat(const Trajectory& t, const std::function<double(const Vec&)>& sr) {
    std::ostringstream os;
    os << "# iter sum_rate\n";
    char buf[64];
    for (std::size_t k = 0; k < t.iterates.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu %.17g\n", k, sr(t.iterates[k]));
        os << buf;
    }
    return os.str();
}

const char* kPlotScript =
    "set xlabel 'iteration'\n"
    "set ylabel 'sum-rate'\n"
    "set grid\n"
    "plot 'sumrate.dat' using 1:2 with lines title 'sum-rate'\n";

}  // namespace

RunResult run(RunConfig config) {
    config.validate();
    if (config.scenario_json.empty()) {
        if (!config.scenario_path.empty()) {
            config.scenario_json = read_text_file(config.scenario_path);
        } else {
            const GeneratorSpec& g = *config.generator;
            config.scenario_json = g.kind == "siso" ? siso_to_json(generate_siso(g)) : mimo_to_json(generate_mimo(g));
        }
    }
    Instance in = load_instance(config.scenario_json);
    const int I = in.game.num_players();

    RunResult res;
    const std::string& alg = config.algorithm;
    res.certified = alg == "abr" ? in.p_cert : (in.p_cert || in.mono_cert);

    const double tau_default = std::max(0.0, (alg == "ptra" ? in.tau_select : in.tau_bar)) + 1.0;
    const double tau = std::isnan(config.tau) ? tau_default : config.tau;

    const Schedule sched = make_schedule(config, I, config.max_iter + 1);
    if (sched.kind() == Schedule::Kind::Random) config.schedule_json = sched.to_json();

    json summary;
    summary["algorithm"] = alg;
    summary["schedule"] = config.schedule;
    summary["scenario_kind"] = in.kind;
    summary["certificate"] = {{"p_upsilon", in.p_cert},
                              {"monotone", in.mono_cert},
                              {"rho_gamma", in.rho_gamma},
                              {"tau_bar", in.tau_bar},
                              {"tau_selection_bound", in.tau_select}};
    summary["certified"] = res.certified;
    summary["forced"] = config.force && !res.certified;

    std::filesystem::create_directories(config.output);
    const std::filesystem::path out(config.output);

    if (!res.certified && !config.force) {
        res.refused = true;
        res.exit_code = 3;
        summary["refused"] = true;
        summary["message"] = alg == "abr" ? "scenario is not certified P_Upsilon; pass --force to run anyway"
                                          : "scenario is not certified monotone; pass --force to run anyway";
        res.summary_json = summary.dump(1);
        write_text_file((out / "summary.json").string(), res.summary_json + "\n");
        write_text_file((out / "run_config.json").string(), config.to_json() + "\n");
        return res;
    }
    if (!res.certified) summary["label"] = "uncertified";

    const Vec x0 = in.game.feasible_point();
    Vec price;
    if (config.merit == "interference") {
        price = config.merit_sign * in.interference_price;
    } else if (config.merit.rfind("custom:", 0) == 0) {
        const json mj = json::parse(read_text_file(config.merit.substr(7)));
        require(mj.contains("gradient"), "run: custom merit file needs a 'gradient' array");
        const auto g = mj["gradient"].get<std::vector<double>>();
        require(static_cast<int>(g.size()) == in.game.dim(), "run: custom merit gradient has the wrong length");
        price = config.merit_sign * Eigen::Map<const Vec>(g.data(), static_cast<Eigen::Index>(g.size()));
    } else {
        price = Vec::Zero(in.game.dim());
    }

    ProxConfig pc;
    pc.tau = tau;
    pc.tau_min = in.tau_bar;
    pc.outer_tol = config.tol;
    pc.max_outer = config.max_iter;
    pc.eta = SequenceSpec::constant(config.eta);
    pc.metric = in.sum_rate;
    pc.inner_schedule = sched.kind() == Schedule::Kind::Random ? Schedule::Kind::Jacobi : sched.kind();

    Trajectory traj;
    if (alg == "abr") {
        AbrOptions o;
        o.metric = in.sum_rate;
        traj = async_best_response(in.game, sched, x0, config.tol, config.max_iter, o);
    } else if (alg == "pda") {
        traj = pda(in.game, pc, x0);
    } else if (alg == "apda") {
        pc.eps = SequenceSpec::inverse_square(config.tol);
        traj = apda(in.game, pc, x0);
    } else if (alg == "ptra") {
        SelectionConfig sel;
        sel.tikhonov = SequenceSpec::harmonic(config.eps0, config.eps_rate);
        sel.merit_gradient = [price](const Vec&) { return price; };
        sel.merit_value = [price](const Vec& x) { return price.dot(x); };
        pc.tau_min = in.tau_select;
        if (!(tau > in.tau_select))
            throw Error("run: tau = " + std::to_string(tau) + " must exceed the selection bound " +
                        std::to_string(in.tau_select));
        traj = ptra(in.game, sel, pc, x0);
    } else {
        GradientBaselineOptions go;
        go.horizon = config.max_iter;
        go.stop_residual = config.tol;
        go.record_iterates = true;
        traj = tikhonov_gradient_baseline(in.game, x0, go);
        for (std::size_t k = 0; k < traj.records.size(); ++k) traj.records[k].metric = in.sum_rate(traj.iterates[k + 1]);
    }
    traj.final_residual = natural_map_residual(in.game, traj.x).norm();

    res.converged = traj.converged;
    res.exit_code = traj.converged ? 0 : 2;
    res.sum_rate = in.sum_rate(traj.x);
    summary["tau"] = (alg == "abr" || alg == "tikhonov-grad") ? json(nullptr) : json(tau);
    summary["merit"] = config.merit;
    summary["merit_sign"] = config.merit_sign;
    summary["merit_value"] = price.dot(traj.x);
    summary["converged"] = traj.converged;
    summary["iterations"] = traj.iterations;
    summary["inner_iterations"] = traj.inner_iterations;
    summary["final_residual"] = traj.final_residual;
    summary["sum_rate"] = res.sum_rate;
    summary["message"] = traj.message;
    summary["x"] = std::vector<double>(traj.x.data(), traj.x.data() + traj.x.size());
    res.summary_json = summary.dump(1);

    traj.write_csv((out / "trajectory.csv").string());
    write_text_file((out / "summary.json").string(), res.summary_json + "\n");
    write_text_file((out / "sumrate.dat").string(), sumrate_dat(traj, in.sum_rate));
    write_text_file((out / "plot.gp").string(), kPlotScript);
    write_text_file((out / "run_config.json").string(), config.to_json() + "\n");
    res.traj = std::move(traj);
    return res;
}

}  // namespace nepvi
