#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "dbec/field.hpp"
#include "dbec/grid.hpp"

namespace dbec {

/// Unit polarization axis of the dipoles.
struct PolarizationAxis {
    double n1 = 0, n2 = 0, n3 = 1;

    PolarizationAxis() = default;
    PolarizationAxis(double a, double b, double c);

    static PolarizationAxis z() { return PolarizationAxis(0, 0, 1); }
};

/// Precomputed Fourier multiplier of the truncated Coulomb-like kernel
/// u_L(r) = rect(|r|/2L) / (4 pi |r|), L = sqrt(Lx^2+Ly^2+Lz^2), on the
/// 2x zero-padding grid. Multiplying the padded density spectrum by this
/// array and transforming back solves the free-space Poisson equation
/// Delta phi = -rho with spectral accuracy for densities supported in the
/// computational box.
///
/// Construction samples u_L_hat(s) = 2 (sin(L|s|/2)/|s|)^2 on a q-fold
/// oversampled k-grid (q = 4 for aspect ratios zeta <= 2.75, q = 6 up to
/// 4.5), transforms to real space, restricts to the central 2x block and
/// transforms forward again. The oscillatory u_L_hat cannot be sampled
/// directly on the 2x grid without losing the spectral rate.
struct TruncatedKernelSpectrum {
    std::shared_ptr<const Grid3D> grid;
    int oversampling = 0;          // 4 or 6
    double L_trunc = 0;            // sqrt(Lx^2+Ly^2+Lz^2)
    std::vector<double> multiplier; // (2Jx, 2Jy, 2Jz), FFT ordering, real

    std::size_t padded_size() const { return 8 * grid->size(); }
};

/// Estimated peak allocation of precompute_truncated_kernel in bytes.
std::size_t kernel_precompute_bytes(const Grid3D& grid);

/// Builds the runtime multiplier. Throws ConfigError for zeta > 4.5 or when
/// the precompute would exceed `memory_cap_bytes` (checked before any
/// allocation).
TruncatedKernelSpectrum
precompute_truncated_kernel(std::shared_ptr<const Grid3D> grid,
                            std::size_t memory_cap_bytes = std::size_t(6) << 30);

/// Free-space Poisson solve Delta phi = -rho via padded convolution with the
/// truncated kernel. rho must live on kernel.grid and be effectively
/// compactly supported; boundary density above `boundary_warn_threshold`
/// times the peak appends a warning instead of failing.
RealField free_space_poisson(const RealField& rho, const TruncatedKernelSpectrum& kernel,
                             std::vector<std::string>* warnings = nullptr,
                             double boundary_warn_threshold = 1e-10);

/// Dipolar interaction potential
///   Phi = -g_dd |psi|^2 - 3 g_dd d_nn phi,  Delta phi = -|psi|^2,
/// with the directional second derivative applied spectrally on the padded
/// grid (multiplier -(n.k)^2 combined with the Poisson multiplier).
RealField dipolar_potential(const ComplexField& psi, const TruncatedKernelSpectrum& kernel,
                            const PolarizationAxis& n, double g_dd,
                            std::vector<std::string>* warnings = nullptr);

/// Second-order baseline: direct DFT of the singular dipole kernel
/// (1 - 3 cos^2 theta)/r^3 sampled on the 2x padded grid with the r = 0
/// sample set to zero. Only used as a convergence-rate foil.
RealField dipolar_potential_naive(const ComplexField& psi, const PolarizationAxis& n,
                                  double g_dd);

/// Analytic potential of an isotropic Gaussian of the given mass and width:
/// phi(r) = M erf(r/(sqrt(2) sigma))/(4 pi r), with the r -> 0 limit
/// M sqrt(2/pi)/(4 pi sigma). Test oracle for the Poisson solver.
RealField gaussian_reference_potential(double sigma, double mass,
                                       const std::array<double, 3>& center,
                                       std::shared_ptr<const Grid3D> grid);

/// Analytic dipolar potential of an isotropic Gaussian (polarization n),
/// derived from the erf potential above. Oracle for kernel benchmarks and
/// the symmetry-cancellation test: it vanishes at the center.
RealField gaussian_reference_dipolar_potential(double sigma, double mass,
                                               const std::array<double, 3>& center,
                                               const PolarizationAxis& n, double g_dd,
                                               std::shared_ptr<const Grid3D> grid);

/// Reusable buffers and plans for repeated dipolar evaluations on one grid.
/// Not thread-safe; use one instance per thread.
class DipoleWorkspace {
  public:
    DipoleWorkspace(std::shared_ptr<const TruncatedKernelSpectrum> kernel,
                    const PolarizationAxis& n);

    /// out += 3 g_dd * d_nn phi[rho], i.e. the nonlocal part of Phi except
    /// for the sign-flipped local term; `accumulate_phi_nl` writes
    /// Phi_nl = -3 g_dd d_nn phi into `out` (J-sized).
    void phi_nonlocal(const double* rho, double g_dd, double* out);

    /// Free-space potential phi itself (J-sized), for energy evaluation.
    void poisson(const double* rho, double* out);

    const Grid3D& grid() const { return *kernel_->grid; }

  private:
    void padded_transform(const double* rho);

    std::shared_ptr<const TruncatedKernelSpectrum> kernel_;
    PolarizationAxis n_;
    std::vector<double> pad_;          // (2Jx, 2Jy, 2Jz) real workspace
    std::vector<complexd> spec_;       // half-spectrum workspace
    std::vector<complexd> spec_work_;  // multiplier application buffer
};

} // namespace dbec
