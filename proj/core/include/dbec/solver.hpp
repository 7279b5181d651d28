#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dbec/control.hpp"
#include "dbec/field.hpp"
#include "dbec/kernel.hpp"
#include "dbec/model.hpp"

namespace dbec {

struct SolverConfig {
    double dt = 0.005;                    // ms
    int record_stride = 1;
    double boundary_warn_threshold = 1e-10;
};

/// Times and metadata recorded along one propagation. Observable series
/// live with the observer that produced them (see observables.hpp).
struct Trajectory {
    std::vector<double> times;
    std::vector<std::string> warnings;
    int steps = 0;
};

/// Called every record_stride steps (and at t = 0 and t = T).
using StepObserver = std::function<void(int step, double t, const ComplexField& psi)>;

struct GroundStateOptions {
    double tol = 1e-10;          // relative energy change per step
    int max_steps = 100000;
    int energy_stride = 25;      // steps between energy checks
    bool recenter = false;       // re-center the zero mode (trap-free states)
    int recenter_stride = 100;
};

struct GroundStateResult {
    ComplexField psi;
    double energy = 0;
    int steps = 0;
    std::vector<double> energy_history;
};

/// Strang-split spectral stepping for the generalized GPE, in real and
/// imaginary time. Owns the FFT buffers for one propagation thread;
/// independent instances may run concurrently sharing the immutable
/// kernel and grid.
class Propagator {
  public:
    Propagator(ModelParams model, std::shared_ptr<const Grid3D> grid,
               std::shared_ptr<const TruncatedKernelSpectrum> kernel,
               SolverConfig config);

    /// V_eff = V_ext + g|psi|^2 + Phi + gamma_qf|psi|^3 - i hbar L3/2 |psi|^4
    /// with the density frozen at psi. The imaginary part is non-positive.
    ComplexField effective_potential(const ComplexField& psi, double t,
                                     const ControlSampler& controls);

    /// One Strang step: potential half-step at t, exact kinetic step,
    /// potential half-step at t+dt (density and Phi recomputed after the
    /// kinetic step). With L3 > 0 the half-steps strictly decrease the atom
    /// number. Throws NumericFault naming the sub-step on NaN/Inf.
    void strang_step(ComplexField& psi, double t, double dt,
                     const ControlSampler& controls);

    /// N = T/dt Strang steps (T/dt must be integral to 1e-9). Boundary
    /// density warnings are recorded in the trajectory.
    Trajectory propagate(ComplexField& psi, const ControlSampler& controls,
                         double T, const StepObserver& observer = {});

    /// Imaginary-time ground state at frozen controls: dt -> -i dt,
    /// renormalization to N_target after every step, termination when the
    /// relative energy change per step drops below opts.tol. L3 is ignored.
    /// Throws NonConvergence (with the energy history) past max_steps and
    /// reports collapse separately.
    GroundStateResult imaginary_time_ground_state(const ComplexField& psi_init,
                                                  const ControlSampler& controls,
                                                  double N_target,
                                                  const GroundStateOptions& opts);

    /// Conservative energy functional (L3 ignored), gradient term spectral:
    /// E = int hbar^2/2 |grad psi|^2 + V_ext|psi|^2 + g/2 |psi|^4
    ///     + 1/2 Phi |psi|^2 + 2/5 gamma_qf |psi|^5 dV.
    double energy_functional(const ComplexField& psi, double t,
                             const ControlSampler& controls);

    const ModelParams& model() const { return model_; }
    const SolverConfig& config() const { return config_; }
    const std::shared_ptr<const Grid3D>& grid() const { return grid_; }

  private:
    enum class TimeKind { real, imaginary };

    void potential_half_step(ComplexField& psi, double t, double dt,
                             const ControlSampler& controls, TimeKind kind,
                             const char* stage);
    void kinetic_step(ComplexField& psi, double dt, TimeKind kind);
    void compute_phi(const ComplexField& psi, double* phi_nl_out);
    void check_boundary_support(const ComplexField& psi, double t,
                                std::vector<std::string>& warnings);

    ModelParams model_;
    std::shared_ptr<const Grid3D> grid_;
    std::shared_ptr<const TruncatedKernelSpectrum> kernel_;
    SolverConfig config_;
    std::optional<DipoleWorkspace> dipole_;
    std::vector<double> rho_;
    std::vector<double> phi_nl_;
    std::vector<double> k2_;      // |k|^2 lookup
    // cached kinetic phase factors for (dt, kind)
    std::vector<complexd> kin_phase_;
    double kin_dt_ = 0;
    TimeKind kin_kind_ = TimeKind::real;
    bool kin_valid_ = false;
};

} // namespace dbec
