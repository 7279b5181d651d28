#include "recipes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dbec/fft.hpp"
#include "dbec/io.hpp"

namespace dbec::app {

ComplexField trapped_guess(const RunConfig& cfg, std::shared_ptr<const Grid3D> g,
                           double a_s, double w_rho, double w_z, double atoms) {
    const ModelParams m = cfg.model();
    auto width = [&](double w) {
        const double aho = std::sqrt(m.hbar / std::max(w, 1e-6));
        const double mu_tf =
            0.5 * m.hbar * w * std::pow(15.0 * atoms * std::max(a_s, 1e-6) / aho, 0.4);
        const double r_tf = (w > 1e-9) ? std::sqrt(2.0 * mu_tf) / w : aho;
        return std::max(aho / std::sqrt(2.0), 0.5 * r_tf);
    };
    return gaussian_field(g, width(w_rho), width(w_rho), width(w_z), 0, 0, 0, atoms);
}

GroundStateResult compute_trapped_state(const RunConfig& cfg, std::shared_ptr<const Grid3D> g,
                                        std::shared_ptr<const TruncatedKernelSpectrum> kernel,
                                        double atom_count, bool verbose) {
    ModelParams m = cfg.model();
    m.N0 = atom_count;
    const ControlEndpoints ep = cfg.endpoints();
    SolverConfig sc = cfg.solver();
    sc.dt = cfg.gs_dt_ms;
    Propagator prop(m, g, kernel, sc);

    GroundStateOptions opts;
    opts.tol = cfg.gs_tol;
    opts.max_steps = cfg.gs_max_steps;

    const FrozenControls trap(ep.a_s_i, ep.w_rho_i, ep.w_z_i);
    GroundStateResult r = prop.imaginary_time_ground_state(
        trapped_guess(cfg, g, ep.a_s_i, ep.w_rho_i, ep.w_z_i, atom_count), trap, atom_count,
        opts);
    if (verbose) {
        std::printf("psi0: E = %.8g, peak = %.6g atoms/um^3, %d steps\n", r.energy,
                    peak_density(r.psi), r.steps);
        std::fflush(stdout);
    }
    return r;
}

GroundStateResult compute_droplet_state(const RunConfig& cfg, std::shared_ptr<const Grid3D> g,
                                        std::shared_ptr<const TruncatedKernelSpectrum> kernel,
                                        double atom_count, bool verbose) {
    ModelParams m = cfg.model();
    m.N0 = atom_count;
    const ControlEndpoints ep = cfg.endpoints();
    SolverConfig sc = cfg.solver();
    sc.dt = cfg.gs_dt_ms;
    Propagator prop(m, g, kernel, sc);

    GroundStateOptions opts;
    opts.tol = cfg.gs_tol;
    opts.max_steps = cfg.gs_max_steps;

    // stage 1: droplet in a weak seed trap to pin the zero mode
    const double w_seed =
        cfg.units().frequency_from_si(2.0 * std::numbers::pi * cfg.droplet_seed_trap_Hz);
    const FrozenControls seeded(ep.a_s_f, w_seed, w_seed);
    ComplexField guess = gaussian_field(g, 0.3, 0.3, 1.2, 0, 0, 0, atom_count);
    const GroundStateResult r1 = prop.imaginary_time_ground_state(guess, seeded, atom_count, opts);
    // stage 2: trap off, re-centered every 100 steps
    GroundStateOptions free_opts = opts;
    free_opts.recenter = true;
    const FrozenControls free_ctl(ep.a_s_f, 0.0, 0.0);
    GroundStateResult r2 = prop.imaginary_time_ground_state(r1.psi, free_ctl, atom_count, free_opts);
    if (verbose) {
        std::printf("psi_d: E = %.8g, peak = %.6g atoms/um^3, %d steps\n", r2.energy,
                    peak_density(r2.psi), r2.steps);
        std::fflush(stdout);
    }
    return r2;
}

GroundStates compute_ground_states(const RunConfig& cfg, std::shared_ptr<const Grid3D> g,
                                   std::shared_ptr<const TruncatedKernelSpectrum> kernel,
                                   double atom_count, bool verbose) {
    GroundStates out;
    GroundStateResult r0 = compute_trapped_state(cfg, g, kernel, atom_count, verbose);
    out.psi0 = std::move(r0.psi);
    out.e0 = r0.energy;
    GroundStateResult rd = compute_droplet_state(cfg, g, kernel, atom_count, verbose);
    out.psi_d = std::move(rd.psi);
    out.e_d = rd.energy;
    return out;
}

PropagationOutput propagate_with_observables(const RunConfig& cfg,
                                             std::shared_ptr<const Grid3D> g,
                                             std::shared_ptr<const TruncatedKernelSpectrum> kernel,
                                             ComplexField psi, const ControlSampler& controls,
                                             double t_total, const RunDir* rd) {
    ModelParams m = cfg.model();
    Propagator prop(m, g, kernel, cfg.solver());
    const CylinderRegion region = cfg.cylinder();

    PropagationOutput out;
    std::vector<double> pending = cfg.snapshot_times_ms;
    std::sort(pending.begin(), pending.end());
    auto observer = [&](int, double t, const ComplexField& state) {
        out.series.times.push_back(t);
        out.series.peak_density.push_back(peak_density(state));
        out.series.atoms_total.push_back(atom_number(state));
        out.series.atoms_in_Z.push_back(atoms_in_region(state, region));
        while (!pending.empty() && t >= pending.front() - 1e-9) {
            if (rd) {
                char stem[64];
                std::snprintf(stem, sizeof stem, "slice-y0-t%.3fms", t);
                io::save_slice(density_slice(state, SlicePlane::y0), t, rd->file(stem, ""));
                std::snprintf(stem, sizeof stem, "slice-z0-t%.3fms", t);
                io::save_slice(density_slice(state, SlicePlane::z0), t, rd->file(stem, ""));
            }
            pending.erase(pending.begin());
        }
    };
    out.trajectory = prop.propagate(psi, controls, t_total, observer);
    out.final_state = std::move(psi);
    return out;
}

ComplexField spectral_upsample(const ComplexField& psi, std::shared_ptr<const Grid3D> fine) {
    const Grid3D& a = *psi.grid;
    const Grid3D& b = *fine;
    if (b.Jx < a.Jx || b.Jy < a.Jy || b.Jz < a.Jz)
        throw ConfigError("spectral_upsample: target grid is coarser");

    std::vector<complexd> hat(psi.v);
    fft::forward(a.Jx, a.Jy, a.Jz, hat.data());

    ComplexField out(fine);
    // destinations of one source index: the plain mapped mode, or the
    // Nyquist plane split evenly between +N/2 and -N/2 on the finer grid
    struct Dst {
        int idx[2];
        double w[2];
        int n;
    };
    auto axis_map = [](int j, int n_src, int n_dst) {
        Dst d{};
        const int s = (j < n_src / 2) ? j : j - n_src;
        if (s == -n_src / 2 && n_dst > n_src) {
            d.n = 2;
            d.idx[0] = n_src / 2;          // +N/2
            d.idx[1] = n_dst - n_src / 2;  // -N/2
            d.w[0] = d.w[1] = 0.5;
        } else {
            d.n = 1;
            d.idx[0] = (s >= 0) ? s : s + n_dst;
            d.w[0] = 1.0;
        }
        return d;
    };
    for (int i = 0; i < a.Jx; ++i) {
        const Dst dx = axis_map(i, a.Jx, b.Jx);
        for (int j = 0; j < a.Jy; ++j) {
            const Dst dy = axis_map(j, a.Jy, b.Jy);
            for (int k = 0; k < a.Jz; ++k) {
                const Dst dz = axis_map(k, a.Jz, b.Jz);
                const complexd v = hat[(std::size_t(i) * a.Jy + j) * a.Jz + k];
                for (int ix = 0; ix < dx.n; ++ix)
                    for (int iy = 0; iy < dy.n; ++iy)
                        for (int iz = 0; iz < dz.n; ++iz)
                            out.v[(std::size_t(dx.idx[ix]) * b.Jy + dy.idx[iy]) * b.Jz +
                                  dz.idx[iz]] += v * (dx.w[ix] * dy.w[iy] * dz.w[iz]);
            }
        }
    }
    fft::inverse(b.Jx, b.Jy, b.Jz, out.v.data());
    const double scale = double(b.Jx) * b.Jy * b.Jz / (double(a.Jx) * a.Jy * a.Jz);
    for (complexd& v : out.v)
        v *= scale;
    return out;
}

} // namespace dbec::app
