#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbec/control.hpp"
#include "dbec/grid.hpp"
#include "dbec/kernel.hpp"
#include "dbec/model.hpp"
#include "dbec/observables.hpp"
#include "dbec/optimizer.hpp"
#include "dbec/solver.hpp"

namespace dbec::app {

/// Resolved run configuration. All config-file keys carry explicit units
/// (um, ms, Hz, a0); defaults reproduce the reference droplet study.
struct RunConfig {
    // species
    double mass_u = 163.93;
    double mu_muB = 9.93;
    double L3_m6_per_s = 1.2e-41;
    double N0 = 1e4;

    // grid
    double Lx_um = 12.0, Ly_um = 12.0, Lz_um = 24.0;
    int Jx = 72, Jy = 72, Jz = 64;

    // solver
    double dt_ms = 0.005;
    double T_ms = 2.0;
    int record_stride = 5;
    double boundary_warn_threshold = 1e-10;
    double hold_ms = 8.0;
    std::vector<double> snapshot_times_ms{2.0, 3.0, 4.0, 6.0, 10.0};

    // controls (lab units)
    double a_s_initial_a0 = 130.0, a_s_final_a0 = 80.0;
    double omega_rho_initial_Hz = 70.0, omega_rho_final_Hz = 0.0;
    double omega_z_initial_Hz = 52.5, omega_z_final_Hz = 0.0;
    double a_s_lb_a0 = 80.0, a_s_ub_a0 = 130.0;
    double omega_rho_lb_Hz = 0.0, omega_rho_ub_Hz = 318.3;
    double omega_z_lb_Hz = 0.0, omega_z_ub_Hz = 318.3;

    // ground state computation
    double gs_dt_ms = 0.005;
    double gs_tol = 1e-9;
    int gs_max_steps = 100000;
    double droplet_seed_trap_Hz = 10.0;

    // optimizer
    std::string mode = "multilevel"; // multilevel | direct-level-4 | sum-of-sines
    int eval_budget = 2500;
    int iters_per_level = 15;
    double fd_step = 1e-3;
    double penalty_weight_rel = 1e3;
    int sum_of_sines_K = 9;
    std::uint64_t seed = 1234;
    int max_level = 4;
    int n_workers = 2;

    // observables
    double cylinder_radius_um = 0.75;
    double cylinder_half_length_um = 7.5;

    std::string output_dir = "out";

    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void apply_fine_discretization(); // 2x grid, dt/2 cross-check set

    // derived objects
    SpeciesParams species() const;
    ModelParams model() const;
    UnitSystem units() const;
    std::shared_ptr<const Grid3D> grid() const;
    ControlEndpoints endpoints() const;
    ControlBounds bounds() const;
    SolverConfig solver() const;
    CylinderRegion cylinder() const;
    OptimizerConfig optimizer() const;
};

/// Creates <out>/<command>-<hash>/ with manifest.json written before any
/// heavy compute; returns the directory and the hash tag.
struct RunDir {
    std::filesystem::path dir;
    std::string tag;

    std::filesystem::path file(const std::string& stem, const std::string& ext) const {
        return dir / (stem + "-" + tag + ext);
    }
};

RunDir open_run_dir(const RunConfig& cfg, const std::string& command,
                    const nlohmann::json& invocation_args = nlohmann::json::object());

/// Appends wall times and artifact hashes next to the immutable manifest.
void write_result_json(const RunDir& rd, const nlohmann::json& results);

/// Kernel cache shared across runs: <out>/kernels/kernel-<gridkey>.bin.
std::shared_ptr<const TruncatedKernelSpectrum>
load_or_precompute_kernel(const RunConfig& cfg, std::uint64_t* content_hash = nullptr);

} // namespace dbec::app
