#pragma once

// Shared experiment recipes used by the CLI and the acceptance suite:
// ground-state preparation and observable-recording propagation.

#include <memory>

#include "dbec/observables.hpp"
#include "dbec/solver.hpp"
#include "run_config.hpp"

namespace dbec::app {

struct GroundStates {
    ComplexField psi0;   // trapped BEC at a_s_i
    ComplexField psi_d;  // self-bound droplet at a_s_f, trap off
    double e0 = 0, e_d = 0;
};

/// Trap-informed Gaussian initial guess for imaginary time.
ComplexField trapped_guess(const RunConfig& cfg, std::shared_ptr<const Grid3D> g,
                           double a_s, double w_rho, double w_z, double atoms);

/// Trapped BEC at a_s_i by imaginary time.
GroundStateResult compute_trapped_state(const RunConfig& cfg, std::shared_ptr<const Grid3D> g,
                                        std::shared_ptr<const TruncatedKernelSpectrum> kernel,
                                        double atom_count, bool verbose = true);

/// Self-bound droplet at a_s_f in two stages: weak seed trap, then trap off
/// with periodic re-centering of the zero mode.
GroundStateResult compute_droplet_state(const RunConfig& cfg, std::shared_ptr<const Grid3D> g,
                                        std::shared_ptr<const TruncatedKernelSpectrum> kernel,
                                        double atom_count, bool verbose = true);

/// Both states (psi0, psi_d).
GroundStates compute_ground_states(const RunConfig& cfg, std::shared_ptr<const Grid3D> g,
                                   std::shared_ptr<const TruncatedKernelSpectrum> kernel,
                                   double atom_count, bool verbose = true);

struct PropagationOutput {
    ObservableSeries series;
    Trajectory trajectory;
    ComplexField final_state;
};

/// Propagates while recording the standard observable series; when rd is
/// given, density slices are dumped at the configured snapshot times.
PropagationOutput propagate_with_observables(const RunConfig& cfg,
                                             std::shared_ptr<const Grid3D> g,
                                             std::shared_ptr<const TruncatedKernelSpectrum> kernel,
                                             ComplexField psi, const ControlSampler& controls,
                                             double t_total, const RunDir* rd = nullptr);

/// Band-limited upsampling onto a finer grid (zero-padding in k space);
/// used to carry states between discretizations.
ComplexField spectral_upsample(const ComplexField& psi, std::shared_ptr<const Grid3D> fine);

} // namespace dbec::app
