#include "run_config.hpp"

#include <fstream>
#include <numbers>

#include "dbec/errors.hpp"
#include "dbec/io.hpp"

namespace dbec::app {

using nlohmann::json;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
    if (j.contains(key))
        out = j.at(key).get<T>();
}
} // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    RunConfig c;
    if (j.contains("species")) {
        const json& s = j["species"];
        get_if_present(s, "mass_u", c.mass_u);
        get_if_present(s, "mu_muB", c.mu_muB);
        get_if_present(s, "L3_m6_per_s", c.L3_m6_per_s);
    }
    get_if_present(j, "N0", c.N0);
    if (j.contains("grid")) {
        const json& g = j["grid"];
        get_if_present(g, "Lx_um", c.Lx_um);
        get_if_present(g, "Ly_um", c.Ly_um);
        get_if_present(g, "Lz_um", c.Lz_um);
        get_if_present(g, "Jx", c.Jx);
        get_if_present(g, "Jy", c.Jy);
        get_if_present(g, "Jz", c.Jz);
    }
    if (j.contains("solver")) {
        const json& s = j["solver"];
        get_if_present(s, "dt_ms", c.dt_ms);
        get_if_present(s, "T_ms", c.T_ms);
        get_if_present(s, "record_stride", c.record_stride);
        get_if_present(s, "boundary_warn_threshold", c.boundary_warn_threshold);
        get_if_present(s, "hold_ms", c.hold_ms);
        get_if_present(s, "snapshot_times_ms", c.snapshot_times_ms);
    }
    if (j.contains("controls")) {
        const json& s = j["controls"];
        get_if_present(s, "a_s_initial_a0", c.a_s_initial_a0);
        get_if_present(s, "a_s_final_a0", c.a_s_final_a0);
        get_if_present(s, "omega_rho_initial_Hz", c.omega_rho_initial_Hz);
        get_if_present(s, "omega_rho_final_Hz", c.omega_rho_final_Hz);
        get_if_present(s, "omega_z_initial_Hz", c.omega_z_initial_Hz);
        get_if_present(s, "omega_z_final_Hz", c.omega_z_final_Hz);
        get_if_present(s, "a_s_lb_a0", c.a_s_lb_a0);
        get_if_present(s, "a_s_ub_a0", c.a_s_ub_a0);
        get_if_present(s, "omega_rho_lb_Hz", c.omega_rho_lb_Hz);
        get_if_present(s, "omega_rho_ub_Hz", c.omega_rho_ub_Hz);
        get_if_present(s, "omega_z_lb_Hz", c.omega_z_lb_Hz);
        get_if_present(s, "omega_z_ub_Hz", c.omega_z_ub_Hz);
    }
    if (j.contains("groundstate")) {
        const json& s = j["groundstate"];
        get_if_present(s, "dt_ms", c.gs_dt_ms);
        get_if_present(s, "tol", c.gs_tol);
        get_if_present(s, "max_steps", c.gs_max_steps);
        get_if_present(s, "droplet_seed_trap_Hz", c.droplet_seed_trap_Hz);
    }
    if (j.contains("optimizer")) {
        const json& s = j["optimizer"];
        get_if_present(s, "mode", c.mode);
        get_if_present(s, "eval_budget", c.eval_budget);
        get_if_present(s, "iters_per_level", c.iters_per_level);
        get_if_present(s, "fd_step", c.fd_step);
        get_if_present(s, "penalty_weight_rel", c.penalty_weight_rel);
        get_if_present(s, "sum_of_sines_K", c.sum_of_sines_K);
        std::uint64_t seed = c.seed;
        get_if_present(s, "seed", seed);
        c.seed = seed;
        get_if_present(s, "max_level", c.max_level);
        get_if_present(s, "n_workers", c.n_workers);
    }
    if (j.contains("observables")) {
        const json& s = j["observables"];
        get_if_present(s, "cylinder_radius_um", c.cylinder_radius_um);
        get_if_present(s, "cylinder_half_length_um", c.cylinder_half_length_um);
    }
    get_if_present(j, "output_dir", c.output_dir);
    return c;
}

json RunConfig::to_json() const {
    return json{
        {"species", {{"mass_u", mass_u}, {"mu_muB", mu_muB}, {"L3_m6_per_s", L3_m6_per_s}}},
        {"N0", N0},
        {"grid",
         {{"Lx_um", Lx_um}, {"Ly_um", Ly_um}, {"Lz_um", Lz_um}, {"Jx", Jx}, {"Jy", Jy}, {"Jz", Jz}}},
        {"solver",
         {{"dt_ms", dt_ms},
          {"T_ms", T_ms},
          {"record_stride", record_stride},
          {"boundary_warn_threshold", boundary_warn_threshold},
          {"hold_ms", hold_ms},
          {"snapshot_times_ms", snapshot_times_ms}}},
        {"controls",
         {{"a_s_initial_a0", a_s_initial_a0},
          {"a_s_final_a0", a_s_final_a0},
          {"omega_rho_initial_Hz", omega_rho_initial_Hz},
          {"omega_rho_final_Hz", omega_rho_final_Hz},
          {"omega_z_initial_Hz", omega_z_initial_Hz},
          {"omega_z_final_Hz", omega_z_final_Hz},
          {"a_s_lb_a0", a_s_lb_a0},
          {"a_s_ub_a0", a_s_ub_a0},
          {"omega_rho_lb_Hz", omega_rho_lb_Hz},
          {"omega_rho_ub_Hz", omega_rho_ub_Hz},
          {"omega_z_lb_Hz", omega_z_lb_Hz},
          {"omega_z_ub_Hz", omega_z_ub_Hz}}},
        {"groundstate",
         {{"dt_ms", gs_dt_ms},
          {"tol", gs_tol},
          {"max_steps", gs_max_steps},
          {"droplet_seed_trap_Hz", droplet_seed_trap_Hz}}},
        {"optimizer",
         {{"mode", mode},
          {"eval_budget", eval_budget},
          {"iters_per_level", iters_per_level},
          {"fd_step", fd_step},
          {"penalty_weight_rel", penalty_weight_rel},
          {"sum_of_sines_K", sum_of_sines_K},
          {"seed", seed},
          {"max_level", max_level},
          {"n_workers", n_workers}}},
        {"observables",
         {{"cylinder_radius_um", cylinder_radius_um},
          {"cylinder_half_length_um", cylinder_half_length_um}}},
        {"output_dir", output_dir}};
}

void RunConfig::apply_fine_discretization() {
    Jx *= 2;
    Jy *= 2;
    Jz *= 2;
    dt_ms *= 0.5;
    gs_dt_ms *= 0.5;
}

SpeciesParams RunConfig::species() const {
    SpeciesParams s;
    s.mass_m = mass_u * PhysicalConstants::atomic_mass_unit;
    s.magnetic_moment_mu = mu_muB * PhysicalConstants::bohr_magneton_muB;
    s.loss_L3 = L3_m6_per_s;
    return s;
}

ModelParams RunConfig::model() const { return ModelParams::from_species(species(), N0); }

UnitSystem RunConfig::units() const { return UnitSystem::um_ms_atom(species().mass_m); }

std::shared_ptr<const Grid3D> RunConfig::grid() const {
    return make_grid(Lx_um, Ly_um, Lz_um, Jx, Jy, Jz);
}

ControlEndpoints RunConfig::endpoints() const {
    const UnitSystem u = units();
    const double a0 = PhysicalConstants::bohr_radius_a0;
    ControlEndpoints e;
    e.a_s_i = u.length_from_si(a_s_initial_a0 * a0);
    e.a_s_f = u.length_from_si(a_s_final_a0 * a0);
    e.w_rho_i = u.frequency_from_si(kTwoPi * omega_rho_initial_Hz);
    e.w_rho_f = u.frequency_from_si(kTwoPi * omega_rho_final_Hz);
    e.w_z_i = u.frequency_from_si(kTwoPi * omega_z_initial_Hz);
    e.w_z_f = u.frequency_from_si(kTwoPi * omega_z_final_Hz);
    return e;
}

ControlBounds RunConfig::bounds() const {
    const UnitSystem u = units();
    const double a0 = PhysicalConstants::bohr_radius_a0;
    ControlBounds b;
    b.a_s_lb = u.length_from_si(a_s_lb_a0 * a0);
    b.a_s_ub = u.length_from_si(a_s_ub_a0 * a0);
    b.w_rho_lb = u.frequency_from_si(kTwoPi * omega_rho_lb_Hz);
    b.w_rho_ub = u.frequency_from_si(kTwoPi * omega_rho_ub_Hz);
    b.w_z_lb = u.frequency_from_si(kTwoPi * omega_z_lb_Hz);
    b.w_z_ub = u.frequency_from_si(kTwoPi * omega_z_ub_Hz);
    return b;
}

SolverConfig RunConfig::solver() const {
    return {dt_ms, record_stride, boundary_warn_threshold};
}

CylinderRegion RunConfig::cylinder() const {
    return {cylinder_radius_um, cylinder_half_length_um};
}

OptimizerConfig RunConfig::optimizer() const {
    OptimizerConfig o;
    o.iters_per_level = iters_per_level;
    o.eval_budget = eval_budget;
    o.fd_step = fd_step;
    o.algorithm = (mode == "sum-of-sines") ? Algorithm::nelder_mead_penalty
                                           : Algorithm::projected_quasi_newton;
    o.penalty_weight = 0; // resolved against J_linear by the driver
    o.seed = seed;
    o.max_level = max_level;
    o.n_workers = n_workers;
    return o;
}

RunDir open_run_dir(const RunConfig& cfg, const std::string& command,
                    const json& invocation_args) {
    json manifest;
    manifest["command"] = command;
    manifest["args"] = invocation_args;
    manifest["config"] = cfg.to_json();
    manifest["seed"] = cfg.seed;
    manifest["code_version"] = "dbec 1.0.0";
    const std::string payload = manifest.dump(2);
    const std::string tag = io::hash_hex(io::fnv1a(payload.data(), payload.size()));

    RunDir rd;
    rd.tag = tag;
    rd.dir = std::filesystem::path(cfg.output_dir) / (command + "-" + tag);
    std::filesystem::create_directories(rd.dir);
    std::ofstream out(rd.dir / "manifest.json");
    out << payload << "\n";
    if (!out)
        throw ConfigError("cannot write manifest in " + rd.dir.string());
    return rd;
}

void write_result_json(const RunDir& rd, const json& results) {
    std::ofstream out(rd.dir / "result.json");
    out << results.dump(2) << "\n";
}

std::shared_ptr<const TruncatedKernelSpectrum>
load_or_precompute_kernel(const RunConfig& cfg, std::uint64_t* content_hash) {
    auto g = cfg.grid();
    char key[128];
    std::snprintf(key, sizeof key, "kernel-%dx%dx%d-%g-%g-%g.bin", g->Jx, g->Jy, g->Jz,
                  g->Lx, g->Ly, g->Lz);
    const std::filesystem::path path = std::filesystem::path(cfg.output_dir) / "kernels" / key;

    TruncatedKernelSpectrum k;
    if (!io::try_load_kernel(path, *g, k)) {
        k = precompute_truncated_kernel(g);
        io::save_kernel(k, path);
    }
    if (content_hash)
        *content_hash = io::fnv1a(k.multiplier.data(), k.multiplier.size() * sizeof(double));
    return std::make_shared<const TruncatedKernelSpectrum>(std::move(k));
}

} // namespace dbec::app
