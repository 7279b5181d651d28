#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "dbec/errors.hpp"
#include "dbec/io.hpp"
#include "dbec/observables.hpp"
#include "dbec/optimizer.hpp"
#include "recipes.hpp"
#include "run_config.hpp"

using namespace dbec;
using dbec::app::RunConfig;
using dbec::app::RunDir;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool fine = false;
};

RunConfig resolve(const CommonArgs& a) {
    RunConfig cfg = a.config_path.empty() ? RunConfig{} : RunConfig::load(a.config_path);
    if (!a.out_dir.empty())
        cfg.output_dir = a.out_dir;
    if (a.seed)
        cfg.seed = *a.seed;
    if (a.fine)
        cfg.apply_fine_discretization();
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "JSON run configuration");
    cmd->add_option("--out", a.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", a.seed, "RNG seed (overrides config)");
    cmd->add_flag("--fine", a.fine, "switch to the doubled cross-check discretization");
}

double wall_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_groundstate(const CommonArgs& args) {
    const RunConfig cfg = resolve(args);
    const RunDir rd = app::open_run_dir(cfg, "groundstate");
    const auto t0 = std::chrono::steady_clock::now();

    auto g = cfg.grid();
    std::uint64_t khash = 0;
    auto kernel = app::load_or_precompute_kernel(cfg, &khash);
    const app::GroundStates gs = app::compute_ground_states(cfg, g, kernel, cfg.N0);

    io::save_field(gs.psi0, rd.file("psi0", ""), 0.0);
    io::save_field(gs.psi_d, rd.file("psid", ""), 0.0);
    app::write_result_json(rd, {{"energy_psi0", gs.e0},
                                {"energy_psid", gs.e_d},
                                {"peak_psi0", peak_density(gs.psi0)},
                                {"peak_psid", peak_density(gs.psi_d)},
                                {"kernel_hash", io::hash_hex(khash)},
                                {"wall_s", wall_seconds(t0)}});
    std::printf("states written to %s\n", rd.dir.string().c_str());
    return 0;
}

int cmd_propagate(const CommonArgs& args, const std::string& psi0_path,
                  const std::string& controls_path, bool linear) {
    const RunConfig cfg = resolve(args);
    const RunDir rd = app::open_run_dir(
        cfg, "propagate",
        {{"psi0", psi0_path}, {"controls", controls_path}, {"linear", linear}});
    const auto t0 = std::chrono::steady_clock::now();

    auto g = cfg.grid();
    std::uint64_t khash = 0;
    auto kernel = app::load_or_precompute_kernel(cfg, &khash);
    ComplexField psi0 = io::load_field(psi0_path);
    if (!psi0.grid->same_as(*g))
        throw ConfigError("propagate: psi0 grid does not match the configuration");

    std::optional<ControlSet> controls;
    if (linear || controls_path.empty()) {
        controls = assemble_controls(linear_ramp_coefficients(1, cfg.T_ms), 1,
                                     cfg.endpoints(), cfg.T_ms);
    } else {
        controls = io::load_controls(controls_path, cfg.units());
        if (std::abs(controls->horizon() - cfg.T_ms) > 1e-9)
            throw ConfigError("propagate: control horizon does not match T_ms");
    }

    const double t_total = cfg.T_ms + cfg.hold_ms;
    app::PropagationOutput out = app::propagate_with_observables(
        cfg, g, kernel, std::move(psi0), *controls, t_total, &rd);
    io::write_series_csv(out.series, rd.file("observables", ".csv"));
    io::write_control_csv(*controls, cfg.units(), cfg.T_ms, 401, rd.file("controls", ".csv"));
    io::save_field(out.final_state, rd.file("psi-final", ""), t_total);

    app::write_result_json(rd, {{"atoms_initial", out.series.atoms_total.front()},
                                {"atoms_final", out.series.atoms_total.back()},
                                {"warnings", out.trajectory.warnings},
                                {"kernel_hash", io::hash_hex(khash)},
                                {"wall_s", wall_seconds(t0)}});
    std::printf("observables written to %s\n", rd.dir.string().c_str());
    return 0;
}

int cmd_optimize(const CommonArgs& args, const std::string& psi0_path,
                 const std::string& psid_path, const std::string& mode_flag) {
    RunConfig cfg = resolve(args);
    if (!mode_flag.empty())
        cfg.mode = mode_flag;
    const RunDir rd = app::open_run_dir(
        cfg, "optimize", {{"psi0", psi0_path}, {"psid", psid_path}, {"mode", cfg.mode}});
    const auto t0 = std::chrono::steady_clock::now();

    auto g = cfg.grid();
    std::uint64_t khash = 0;
    auto kernel = app::load_or_precompute_kernel(cfg, &khash);

    ProblemSpec problem;
    problem.model = cfg.model();
    problem.grid = g;
    problem.kernel = kernel;
    problem.psi0 = io::load_field(psi0_path);
    problem.psi_d = io::load_field(psid_path);
    if (!problem.psi0.grid->same_as(*g) || !problem.psi_d.grid->same_as(*g))
        throw ConfigError("optimize: state grids do not match the configuration");
    problem.T = cfg.T_ms;
    problem.solver = cfg.solver();
    problem.endpoints = cfg.endpoints();
    problem.bounds = cfg.bounds();

    const OptimizerConfig ocfg = cfg.optimizer();
    MultilevelResult res;
    if (cfg.mode == "multilevel") {
        res = multilevel_optimize(problem, ocfg);
    } else if (cfg.mode == "direct-level-4") {
        res = direct_level_optimize(problem, 4, ocfg);
    } else if (cfg.mode == "sum-of-sines") {
        res = sum_of_sines_optimize(problem, cfg.sum_of_sines_K, ocfg);
    } else {
        throw ConfigError("optimize: unknown mode " + cfg.mode);
    }

    io::write_history_csv(res.history, rd.file("history", ".csv"));
    const ControlSet best =
        (cfg.mode == "sum-of-sines")
            ? sum_of_sines_controls(res.best, cfg.sum_of_sines_K, problem.endpoints, problem.T)
            : assemble_controls(res.best, res.final_level, problem.endpoints, problem.T);
    io::save_controls(best, cfg.units(), rd.file("best-controls", ".json"));
    io::write_control_csv(best, cfg.units(), cfg.T_ms, 401, rd.file("best-controls", ".csv"));

    const double jb = res.history.best();
    app::write_result_json(rd, {{"mode", cfg.mode},
                                {"J_linear", res.history.J_linear},
                                {"J_best", jb},
                                {"J_best_normalized", jb / res.history.J_linear},
                                {"evaluations", res.history.records.size()},
                                {"kernel_hash", io::hash_hex(khash)},
                                {"wall_s", wall_seconds(t0)}});
    std::printf("mode=%s: J/J_linear = %.6g after %zu evaluations -> %s\n", cfg.mode.c_str(),
                jb / res.history.J_linear, res.history.records.size(),
                rd.dir.string().c_str());
    return 0;
}

int cmd_kernel_bench(const CommonArgs& args) {
    const RunConfig cfg = resolve(args);
    const RunDir rd = app::open_run_dir(cfg, "kernel-bench");
    std::FILE* csv = std::fopen(rd.file("kernel-bench", ".csv").string().c_str(), "w");
    if (!csv)
        throw ConfigError("kernel-bench: cannot open output CSV");
    std::fprintf(csv, "case,J,method,max_rel_err,seconds\n");

    auto report = [&](const char* name, int J, const char* method, double err, double s) {
        std::fprintf(csv, "%s,%d,%s,%.6e,%.3f\n", name, J, method, err, s);
        std::printf("%-12s J=%-3d %-10s err=%.3e (%.2fs)\n", name, J, method, err, s);
    };
    auto max_rel = [](const RealField& a, const RealField& b) {
        double err = 0, scale = 0;
        for (std::size_t i = 0; i < a.v.size(); ++i) {
            err = std::max(err, std::abs(a.v[i] - b.v[i]));
            scale = std::max(scale, std::abs(b.v[i]));
        }
        return err / scale;
    };
    auto gaussian_rho = [](std::shared_ptr<const Grid3D> g, double s) {
        RealField rho(std::move(g));
        const Grid3D& gr = *rho.grid;
        const double pref = 1.0 / std::pow(2.0 * std::numbers::pi * s * s, 1.5);
        for (int i = 0; i < gr.Jx; ++i)
            for (int j = 0; j < gr.Jy; ++j)
                for (int k = 0; k < gr.Jz; ++k) {
                    const double x = gr.x(i), y = gr.y(j), z = gr.z(k);
                    rho.v[gr.idx(i, j, k)] =
                        pref * std::exp(-0.5 * (x * x + y * y + z * z) / (s * s));
                }
        return rho;
    };

    // truncated kernel vs the erf oracle on the unit box
    for (int J : {16, 24, 32, 48, 64}) {
        const auto t0 = std::chrono::steady_clock::now();
        auto g = make_grid(1.0, 1.0, 1.0, J, J, J);
        const auto k = precompute_truncated_kernel(g);
        const RealField phi = free_space_poisson(gaussian_rho(g, 0.06), k);
        const RealField ref = gaussian_reference_potential(0.06, 1.0, {0, 0, 0}, g);
        report("unit-box", J, "truncated", max_rel(phi, ref), wall_seconds(t0));
    }

    // aspect-ratio-2 box at the reference resolution, q = 4
    {
        const auto t0 = std::chrono::steady_clock::now();
        auto g = make_grid(12.0, 12.0, 24.0, cfg.Jx, cfg.Jy, cfg.Jz);
        const auto k = precompute_truncated_kernel(g);
        const RealField phi = free_space_poisson(gaussian_rho(g, 0.72), k);
        const RealField ref = gaussian_reference_potential(0.72, 1.0, {0, 0, 0}, g);
        report("zeta-2-box", cfg.Jx, "truncated", max_rel(phi, ref), wall_seconds(t0));
    }

    // naive dipolar baseline vs the analytic isotropic reference
    for (int J : {16, 32, 64}) {
        const auto t0 = std::chrono::steady_clock::now();
        auto g = make_grid(1.0, 1.0, 1.0, J, J, J);
        const RealField rho = gaussian_rho(g, 0.13);
        ComplexField psi(g);
        for (std::size_t i = 0; i < rho.v.size(); ++i)
            psi.v[i] = std::sqrt(rho.v[i]);
        const RealField phi = dipolar_potential_naive(psi, PolarizationAxis::z(), 1.0);
        const RealField ref = gaussian_reference_dipolar_potential(
            0.13, 1.0, {0, 0, 0}, PolarizationAxis::z(), 1.0, g);
        report("unit-box", J, "naive", max_rel(phi, ref), wall_seconds(t0));
    }

    std::fclose(csv);
    app::write_result_json(rd, {{"csv", rd.file("kernel-bench", ".csv").string()}});
    return 0;
}

int cmd_perturb(const CommonArgs& args, const std::string& controls_path,
                const std::string& psid_path, double sigma, std::vector<double> factors) {
    const RunConfig cfg = resolve(args);
    const RunDir rd = app::open_run_dir(cfg, "perturb",
                                        {{"controls", controls_path},
                                         {"psid", psid_path},
                                         {"sigma", sigma},
                                         {"factors", factors}});
    const auto t0 = std::chrono::steady_clock::now();

    if (factors.size() != 4)
        throw ConfigError("perturb: --factors needs 4 values (a_s_i, a_s_f, w_rho_i, w_z_i)");

    auto g = cfg.grid();
    std::uint64_t khash = 0;
    auto kernel = app::load_or_precompute_kernel(cfg, &khash);
    const ControlSet controls = io::load_controls(controls_path, cfg.units());
    ComplexField psi_d = io::load_field(psid_path);
    if (!psi_d.grid->same_as(*g))
        throw ConfigError("perturb: psi_d grid does not match the configuration");

    // the initial state is recomputed with 10 percent fewer atoms
    const double n_tilde = 0.9 * cfg.N0;
    std::printf("recomputing the initial state at N = %g\n", n_tilde);
    const GroundStateResult gs0 = app::compute_trapped_state(cfg, g, kernel, n_tilde);

    // normalization: linear-ramp cost of the unperturbed problem
    ProblemSpec problem;
    problem.model = cfg.model();
    problem.grid = g;
    problem.kernel = kernel;
    problem.psi0 = gs0.psi;
    problem.psi_d = psi_d;
    problem.T = cfg.T_ms;
    problem.solver = cfg.solver();
    problem.endpoints = cfg.endpoints();
    problem.bounds = cfg.bounds();
    const double j_linear = linear_ramp_cost(problem);

    const PerturbedControls perturbed(
        controls, {factors[0], factors[1], factors[2], factors[3]}, sigma, cfg.seed,
        cfg.dt_ms, cfg.T_ms + cfg.hold_ms);

    app::PropagationOutput out = app::propagate_with_observables(
        cfg, g, kernel, gs0.psi, perturbed, cfg.T_ms + cfg.hold_ms, &rd);
    io::write_series_csv(out.series, rd.file("observables", ".csv"));
    io::write_control_csv(perturbed, cfg.units(), cfg.T_ms, 401,
                          rd.file("perturbed-controls", ".csv"));

    // cost at final time T (the hold interval does not enter the cost)
    ComplexField at_T = gs0.psi;
    {
        ModelParams m = cfg.model();
        Propagator prop(m, g, kernel, cfg.solver());
        prop.propagate(at_T, perturbed, cfg.T_ms);
    }
    const double overlap = overlap_with_target(at_T, psi_d);
    const double j = std::pow(cfg.N0 - overlap, 2);
    app::write_result_json(rd, {{"N_tilde", n_tilde},
                                {"sigma", sigma},
                                {"factors", factors},
                                {"J", j},
                                {"J_linear", j_linear},
                                {"J_normalized", j / j_linear},
                                {"kernel_hash", io::hash_hex(khash)},
                                {"wall_s", wall_seconds(t0)}});
    std::printf("perturbed run: J/J_linear = %.6g -> %s\n", j / j_linear,
                rd.dir.string().c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and optimal control of dipolar condensate droplet formation"};
    app.require_subcommand(1);

    CommonArgs gs_args, prop_args, opt_args, bench_args, pert_args;
    std::string psi0_path, controls_path, mode_flag;
    std::string opt_psi0, opt_psid;
    std::string pert_controls, pert_psid;
    bool linear = false;
    double pert_sigma = 0.03;
    std::vector<double> pert_factors{1.03, 0.97, 1.03, 0.97};

    CLI::App* c_gs = app.add_subcommand("groundstate", "compute psi0 and psi_d");
    add_common(c_gs, gs_args);

    CLI::App* c_prop = app.add_subcommand("propagate", "propagate psi0 under given controls");
    add_common(c_prop, prop_args);
    c_prop->add_option("--psi0", psi0_path, "initial state file base")->required();
    c_prop->add_option("--controls", controls_path, "controls JSON file");
    c_prop->add_flag("--linear", linear, "use exact linear ramps");

    CLI::App* c_opt = app.add_subcommand("optimize", "run the control optimization");
    add_common(c_opt, opt_args);
    c_opt->add_option("--psi0", opt_psi0, "initial state file base")->required();
    c_opt->add_option("--psid", opt_psid, "target state file base")->required();
    c_opt->add_option("--mode", mode_flag, "multilevel | direct-level-4 | sum-of-sines");

    CLI::App* c_bench = app.add_subcommand("kernel-bench", "kernel accuracy sweeps");
    add_common(c_bench, bench_args);

    CLI::App* c_pert = app.add_subcommand("perturb", "robustness study with perturbed controls");
    add_common(c_pert, pert_args);
    c_pert->add_option("--controls", pert_controls, "optimized controls JSON")->required();
    c_pert->add_option("--psid", pert_psid, "target state file base")->required();
    c_pert->add_option("--sigma", pert_sigma, "noise standard deviation");
    c_pert->add_option("--factors", pert_factors, "endpoint factors: a_s_i a_s_f w_rho_i w_z_i")
        ->expected(4);

    try {
        app.parse(argc, argv);
        if (c_gs->parsed())
            return cmd_groundstate(gs_args);
        if (c_prop->parsed())
            return cmd_propagate(prop_args, psi0_path, controls_path, linear);
        if (c_opt->parsed())
            return cmd_optimize(opt_args, opt_psi0, opt_psid, mode_flag);
        if (c_bench->parsed())
            return cmd_kernel_bench(bench_args);
        if (c_pert->parsed())
            return cmd_perturb(pert_args, pert_controls, pert_psid, pert_sigma, pert_factors);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const NumericFault& e) {
        std::fprintf(stderr, "numeric fault: %s\n", e.what());
        return 3;
    } catch (const NonConvergence& e) {
        std::fprintf(stderr, "non-convergence: %s\n", e.what());
        if (!e.energy_history.empty()) {
            std::fprintf(stderr, "energy history tail:");
            const std::size_t n = e.energy_history.size();
            for (std::size_t i = n > 8 ? n - 8 : 0; i < n; ++i)
                std::fprintf(stderr, " %.8g", e.energy_history[i]);
            std::fprintf(stderr, "\n");
        }
        return 4;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
