#include "dbec/solver.hpp"

#include <algorithm>
#include <cmath>

#include "dbec/errors.hpp"
#include "dbec/fft.hpp"

namespace dbec {

Propagator::Propagator(ModelParams model, std::shared_ptr<const Grid3D> grid,
                       std::shared_ptr<const TruncatedKernelSpectrum> kernel,
                       SolverConfig config)
    : model_(std::move(model)), grid_(std::move(grid)), kernel_(std::move(kernel)),
      config_(config) {
    if (config_.dt <= 0)
        throw ConfigError("Propagator: dt must be positive");
    if (config_.record_stride < 1)
        throw ConfigError("Propagator: record_stride must be >= 1");
    const Grid3D& g = *grid_;
    if (model_.dipole_enabled) {
        if (!kernel_)
            throw ConfigError("Propagator: dipolar model requires a precomputed kernel");
        if (!kernel_->grid->same_as(g))
            throw ConfigError("Propagator: kernel grid does not match");
        dipole_.emplace(kernel_, model_.polarization);
    }
    rho_.resize(g.size());
    phi_nl_.assign(g.size(), 0.0);
    k2_.resize(g.size());
    for (int i = 0; i < g.Jx; ++i)
        for (int j = 0; j < g.Jy; ++j)
            for (int k = 0; k < g.Jz; ++k)
                k2_[g.idx(i, j, k)] = g.kx[i] * g.kx[i] + g.ky[j] * g.ky[j] +
                                      g.kz[k] * g.kz[k];
}

void Propagator::compute_phi(const ComplexField& psi, double* phi_nl_out) {
    const std::size_t n = psi.v.size();
    for (std::size_t i = 0; i < n; ++i)
        rho_[i] = std::norm(psi.v[i]);
    if (dipole_)
        dipole_->phi_nonlocal(rho_.data(), model_.effective_g_dd(), phi_nl_out);
}

void Propagator::potential_half_step(ComplexField& psi, double t, double tau,
                                     const ControlSampler& controls, TimeKind kind,
                                     const char* stage) {
    const ControlSample c = sample_controls(controls, t, model_);
    compute_phi(psi, phi_nl_.data());

    const Grid3D& g = *grid_;
    const double inv_hbar = 1.0 / model_.hbar;
    const double g_dd = model_.effective_g_dd();
    const double loss = (kind == TimeKind::real) ? 0.5 * model_.hbar * model_.L3 : 0.0;
    const double wr2 = 0.5 * c.w_rho * c.w_rho; // m == 1 in internal units
    const double wz2 = 0.5 * c.w_z * c.w_z;
    double acc = 0.0;
    for (int i = 0; i < g.Jx; ++i) {
        const double x = g.x(i);
        for (int j = 0; j < g.Jy; ++j) {
            const double y = g.y(j);
            const double v_xy = wr2 * (x * x + y * y);
            const std::size_t row = g.idx(i, j, 0);
            for (int k = 0; k < g.Jz; ++k) {
                const std::size_t id = row + k;
                const double z = g.z(k);
                const double rho = rho_[id];
                const double vr = v_xy + wz2 * z * z + c.g * rho +
                                  (dipole_ ? phi_nl_[id] - g_dd * rho : 0.0) +
                                  c.gamma_qf * rho * std::sqrt(rho);
                complexd factor;
                if (kind == TimeKind::real) {
                    const double phase = -vr * tau * inv_hbar;
                    const double damp = std::exp(-loss * rho * rho * tau * inv_hbar);
                    factor = complexd(damp * std::cos(phase), damp * std::sin(phase));
                } else {
                    factor = std::exp(-vr * tau * inv_hbar);
                }
                psi.v[id] *= factor;
                acc += std::norm(psi.v[id]);
            }
        }
    }
    if (!std::isfinite(acc))
        throw NumericFault(stage);
}

void Propagator::kinetic_step(ComplexField& psi, double dt, TimeKind kind) {
    const Grid3D& g = *grid_;
    if (!kin_valid_ || kin_dt_ != dt || kin_kind_ != kind) {
        kin_phase_.resize(g.size());
        const double a = 0.5 * model_.hbar * dt; // hbar k^2 dt / (2 m), m == 1
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (kind == TimeKind::real)
                kin_phase_[i] = complexd(std::cos(-a * k2_[i]), std::sin(-a * k2_[i]));
            else
                kin_phase_[i] = std::exp(-a * k2_[i]);
        }
        kin_dt_ = dt;
        kin_kind_ = kind;
        kin_valid_ = true;
    }
    fft::forward(g.Jx, g.Jy, g.Jz, psi.v.data());
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        psi.v[i] *= kin_phase_[i];
        acc += std::norm(psi.v[i]);
    }
    fft::inverse(g.Jx, g.Jy, g.Jz, psi.v.data());
    if (!std::isfinite(acc))
        throw NumericFault("kinetic step");
}

ComplexField Propagator::effective_potential(const ComplexField& psi, double t,
                                             const ControlSampler& controls) {
    const ControlSample c = sample_controls(controls, t, model_);
    compute_phi(psi, phi_nl_.data());
    const Grid3D& g = *grid_;
    const double g_dd = model_.effective_g_dd();
    ComplexField v(grid_);
    for (int i = 0; i < g.Jx; ++i) {
        const double x = g.x(i);
        for (int j = 0; j < g.Jy; ++j) {
            const double y = g.y(j);
            for (int k = 0; k < g.Jz; ++k) {
                const std::size_t id = g.idx(i, j, k);
                const double z = g.z(k);
                const double rho = rho_[id];
                const double vr = 0.5 * c.w_rho * c.w_rho * (x * x + y * y) +
                                  0.5 * c.w_z * c.w_z * z * z + c.g * rho +
                                  (dipole_ ? phi_nl_[id] - g_dd * rho : 0.0) +
                                  c.gamma_qf * rho * std::sqrt(rho);
                const double vi = -0.5 * model_.hbar * model_.L3 * rho * rho;
                v.v[id] = complexd(vr, vi);
            }
        }
    }
    return v;
}

void Propagator::strang_step(ComplexField& psi, double t, double dt,
                             const ControlSampler& controls) {
    potential_half_step(psi, t, 0.5 * dt, controls, TimeKind::real,
                        "first potential half-step");
    kinetic_step(psi, dt, TimeKind::real);
    potential_half_step(psi, t + dt, 0.5 * dt, controls, TimeKind::real,
                        "second potential half-step");
}

void Propagator::check_boundary_support(const ComplexField& psi, double t,
                                        std::vector<std::string>& warnings) {
    if (!warnings.empty())
        return; // report the first occurrence only
    const Grid3D& g = *psi.grid;
    double peak = 0.0;
    for (const complexd& c : psi.v)
        peak = std::max(peak, std::norm(c));
    if (peak == 0.0)
        return;
    double edge = 0.0;
    for (int i = 0; i < g.Jx; ++i)
        for (int j = 0; j < g.Jy; ++j) {
            edge = std::max({edge, std::norm(psi.v[g.idx(i, j, 0)]),
                             std::norm(psi.v[g.idx(i, j, g.Jz - 1)])});
        }
    for (int i = 0; i < g.Jx; ++i)
        for (int k = 0; k < g.Jz; ++k)
            edge = std::max({edge, std::norm(psi.v[g.idx(i, 0, k)]),
                             std::norm(psi.v[g.idx(i, g.Jy - 1, k)])});
    for (int j = 0; j < g.Jy; ++j)
        for (int k = 0; k < g.Jz; ++k)
            edge = std::max({edge, std::norm(psi.v[g.idx(0, j, k)]),
                             std::norm(psi.v[g.idx(g.Jx - 1, j, k)])});
    if (edge > config_.boundary_warn_threshold * peak)
        warnings.push_back("boundary density reached " + std::to_string(edge / peak) +
                           " of the peak at t = " + std::to_string(t) + " ms");
}

Trajectory Propagator::propagate(ComplexField& psi, const ControlSampler& controls,
                                 double T, const StepObserver& observer) {
    if (T < 0)
        throw ConfigError("propagate: negative horizon");
    const double steps_exact = T / config_.dt;
    const long long n_steps = std::llround(steps_exact);
    if (std::abs(steps_exact - double(n_steps)) > 1e-9 * std::max(1.0, steps_exact))
        throw ConfigError("propagate: T must be an integer multiple of dt");

    Trajectory traj;
    traj.times.push_back(0.0);
    if (observer)
        observer(0, 0.0, psi);
    for (long long n = 0; n < n_steps; ++n) {
        strang_step(psi, double(n) * config_.dt, config_.dt, controls);
        const long long m = n + 1;
        if (m % config_.record_stride == 0 || m == n_steps) {
            const double t = double(m) * config_.dt;
            traj.times.push_back(t);
            check_boundary_support(psi, t, traj.warnings);
            if (observer)
                observer(int(m), t, psi);
        }
    }
    traj.steps = int(n_steps);
    return traj;
}

namespace {

std::array<double, 3> center_of_mass(const ComplexField& psi) {
    const Grid3D& g = *psi.grid;
    double sx = 0, sy = 0, sz = 0, sn = 0;
    for (int i = 0; i < g.Jx; ++i)
        for (int j = 0; j < g.Jy; ++j)
            for (int k = 0; k < g.Jz; ++k) {
                const double w = std::norm(psi.v[g.idx(i, j, k)]);
                sx += w * g.x(i);
                sy += w * g.y(j);
                sz += w * g.z(k);
                sn += w;
            }
    if (sn == 0)
        return {0, 0, 0};
    return {sx / sn, sy / sn, sz / sn};
}

/// Circular shift by whole grid cells: exactly energy-preserving for a
/// translation-invariant Hamiltonian, unlike a sub-cell spectral shift.
/// Returns false when the drift is below half a cell everywhere.
bool recenter_integer_cells(ComplexField& psi, const std::array<double, 3>& com) {
    const Grid3D& g = *psi.grid;
    const int si = int(std::lround(com[0] / g.dx));
    const int sj = int(std::lround(com[1] / g.dy));
    const int sk = int(std::lround(com[2] / g.dz));
    if (si == 0 && sj == 0 && sk == 0)
        return false;
    std::vector<complexd> shifted(psi.v.size());
    auto wrap = [](int a, int n) { return ((a % n) + n) % n; };
    for (int i = 0; i < g.Jx; ++i)
        for (int j = 0; j < g.Jy; ++j)
            for (int k = 0; k < g.Jz; ++k)
                shifted[g.idx(i, j, k)] =
                    psi.v[g.idx(wrap(i + si, g.Jx), wrap(j + sj, g.Jy), wrap(k + sk, g.Jz))];
    psi.v = std::move(shifted);
    return true;
}

double rms_width(const ComplexField& psi) {
    const Grid3D& g = *psi.grid;
    const std::array<double, 3> com = center_of_mass(psi);
    double s2 = 0, sn = 0;
    for (int i = 0; i < g.Jx; ++i)
        for (int j = 0; j < g.Jy; ++j)
            for (int k = 0; k < g.Jz; ++k) {
                const double w = std::norm(psi.v[g.idx(i, j, k)]);
                const double dx = g.x(i) - com[0], dy = g.y(j) - com[1],
                             dz = g.z(k) - com[2];
                s2 += w * (dx * dx + dy * dy + dz * dz);
                sn += w;
            }
    return sn > 0 ? std::sqrt(s2 / sn) : 0.0;
}

} // namespace

GroundStateResult Propagator::imaginary_time_ground_state(const ComplexField& psi_init,
                                                          const ControlSampler& controls,
                                                          double N_target,
                                                          const GroundStateOptions& opts) {
    if (N_target <= 0 || opts.tol <= 0)
        throw ConfigError("imaginary_time_ground_state: invalid target or tolerance");
    ComplexField psi = normalize_to(psi_init, N_target);
    double dt = config_.dt;
    int halvings = 0;

    std::vector<double> history;
    double e_prev = energy_functional(psi, 0.0, controls);
    history.push_back(e_prev);

    for (int step = 1; step <= opts.max_steps; ++step) {
        potential_half_step(psi, 0.0, 0.5 * dt, controls, TimeKind::imaginary,
                            "imaginary potential half-step");
        kinetic_step(psi, dt, TimeKind::imaginary);
        potential_half_step(psi, 0.0, 0.5 * dt, controls, TimeKind::imaginary,
                            "imaginary potential half-step");
        // renormalize in place after every step
        double n = 0.0;
        for (const complexd& c : psi.v)
            n += std::norm(c);
        n *= grid_->cell_volume();
        if (!(n > 0) || !std::isfinite(n))
            throw NumericFault("imaginary-time renormalization");
        const double s = std::sqrt(N_target / n);
        for (complexd& c : psi.v)
            c *= s;

        if (opts.recenter && step % opts.recenter_stride == 0)
            recenter_integer_cells(psi, center_of_mass(psi));

        if (step % opts.energy_stride == 0) {
            const double e = energy_functional(psi, 0.0, controls);
            const double scale = std::max(std::abs(e), 1e-300);
            // a rising energy means the density-frozen sub-steps overshoot
            // at this dt; halve it and keep going
            if (e > e_prev + 1e-10 * scale) {
                if (++halvings > 8)
                    throw NonConvergence(
                        "imaginary time: energy not monotone at the smallest step size",
                        history);
                dt *= 0.5;
                continue;
            }
            history.push_back(e);
            const double rel_per_step = std::abs(e - e_prev) / (scale * opts.energy_stride);
            if (rel_per_step < opts.tol)
                return {std::move(psi), e, step, std::move(history)};
            // collapse: energy running away negative with the cloud at grid scale
            if (e < 0 && e_prev < 0 && e < 3.0 * e_prev &&
                rms_width(psi) < 2.0 * std::max({grid_->dx, grid_->dy, grid_->dz}))
                throw NonConvergence("imaginary time: collapse detected "
                                     "(energy diverging, width at grid scale)",
                                     history);
            e_prev = e;
        }
    }
    throw NonConvergence("imaginary time: no convergence within " +
                         std::to_string(opts.max_steps) + " steps",
                         history);
}

double Propagator::energy_functional(const ComplexField& psi, double t,
                                     const ControlSampler& controls) {
    const ControlSample c = sample_controls(controls, t, model_);
    const Grid3D& g = *grid_;
    const double g_dd = model_.effective_g_dd();
    compute_phi(psi, phi_nl_.data());

    double e_pot = 0.0;
    for (int i = 0; i < g.Jx; ++i) {
        const double x = g.x(i);
        for (int j = 0; j < g.Jy; ++j) {
            const double y = g.y(j);
            for (int k = 0; k < g.Jz; ++k) {
                const std::size_t id = g.idx(i, j, k);
                const double z = g.z(k);
                const double rho = rho_[id];
                const double v_ext = 0.5 * c.w_rho * c.w_rho * (x * x + y * y) +
                                     0.5 * c.w_z * c.w_z * z * z;
                const double phi = dipole_ ? phi_nl_[id] - g_dd * rho : 0.0;
                e_pot += v_ext * rho + 0.5 * c.g * rho * rho + 0.5 * phi * rho +
                         0.4 * c.gamma_qf * rho * rho * std::sqrt(rho);
            }
        }
    }
    e_pot *= g.cell_volume();

    // spectral kinetic term: hbar^2/2 sum |k|^2 |psi_hat|^2 dV / J
    std::vector<complexd> hat(psi.v);
    fft::forward(g.Jx, g.Jy, g.Jz, hat.data());
    double e_kin = 0.0;
    for (std::size_t i = 0; i < hat.size(); ++i)
        e_kin += k2_[i] * std::norm(hat[i]);
    e_kin *= 0.5 * model_.hbar * model_.hbar * g.cell_volume() / double(g.size());

    const double e = e_kin + e_pot;
    if (!std::isfinite(e))
        throw NumericFault("energy_functional");
    return e;
}

} // namespace dbec
