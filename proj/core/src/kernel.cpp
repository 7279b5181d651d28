#include "dbec/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dbec/errors.hpp"
#include "dbec/fft.hpp"

namespace dbec {

namespace {

constexpr double kPi = std::numbers::pi;

double signed_freq_index(int j, int n) { return (j < n / 2) ? j : j - n; }

/// u_L_hat(s) = 2 (sin(L|s|/2)/|s|)^2 with the entire-function limit L^2/2.
double u_L_hat(double s, double L) {
    if (s == 0.0)
        return L * L / 2.0;
    const double q = std::sin(L * s / 2.0) / s;
    return 2.0 * q * q;
}

std::vector<double> fft_wavevectors(int n, double L) {
    std::vector<double> k(n);
    const double dk = 2.0 * kPi / L;
    for (int j = 0; j < n; ++j)
        k[j] = dk * signed_freq_index(j, n);
    return k;
}

} // namespace

PolarizationAxis::PolarizationAxis(double a, double b, double c) : n1(a), n2(b), n3(c) {
    const double norm = std::sqrt(a * a + b * b + c * c);
    if (std::abs(norm - 1.0) > 1e-12) {
        if (norm == 0.0)
            throw ConfigError("PolarizationAxis: zero vector");
        n1 /= norm;
        n2 /= norm;
        n3 /= norm;
    }
}

std::size_t kernel_precompute_bytes(const Grid3D& g) {
    const double zeta = g.aspect_ratio();
    const std::size_t q = zeta <= 2.75 ? 4 : 6;
    const std::size_t nx = q * g.Jx, ny = q * g.Jy, nz = q * g.Jz;
    const std::size_t mx = 2 * std::size_t(g.Jx), my = 2 * std::size_t(g.Jy),
                      mz = 2 * std::size_t(g.Jz);
    const std::size_t oversampled = nx * ny * nz * 8 + nx * ny * (nz / 2 + 1) * 16;
    const std::size_t restricted =
        mx * my * mz * 8 * 2 + mx * my * (mz / 2 + 1) * 16;
    return std::max(oversampled, restricted) + mx * my * mz * 8;
}

TruncatedKernelSpectrum precompute_truncated_kernel(std::shared_ptr<const Grid3D> grid,
                                                    std::size_t memory_cap_bytes) {
    const Grid3D& g = *grid;
    const double zeta = g.aspect_ratio();
    int q = 0;
    if (zeta <= 2.75)
        q = 4;
    else if (zeta <= 4.5)
        q = 6;
    else
        throw ConfigError("precompute_truncated_kernel: aspect ratio " +
                          std::to_string(zeta) + " exceeds the supported limit 4.5");

    const std::size_t need = kernel_precompute_bytes(g);
    if (need > memory_cap_bytes)
        throw ConfigError("precompute_truncated_kernel: estimated " +
                          std::to_string(need >> 20) + " MiB exceeds the cap of " +
                          std::to_string(memory_cap_bytes >> 20) + " MiB");

    const double L = std::sqrt(g.Lx * g.Lx + g.Ly * g.Ly + g.Lz * g.Lz);
    const int nx = q * g.Jx, ny = q * g.Jy, nz = q * g.Jz;
    const int nzh = nz / 2 + 1;

    // Sample u_L_hat on the oversampled half-spectrum (k spacing 2 pi / (q L_axis))
    // and transform to the real-space kernel on the oversampled box.
    std::vector<complexd> spec(std::size_t(nx) * ny * nzh);
    const double dkx = 2.0 * kPi / (q * g.Lx);
    const double dky = 2.0 * kPi / (q * g.Ly);
    const double dkz = 2.0 * kPi / (q * g.Lz);
    for (int i = 0; i < nx; ++i) {
        const double sx = dkx * signed_freq_index(i, nx);
        for (int j = 0; j < ny; ++j) {
            const double sy = dky * signed_freq_index(j, ny);
            const std::size_t row = (std::size_t(i) * ny + j) * nzh;
            for (int k = 0; k < nzh; ++k) {
                const double sz = dkz * k;
                const double s = std::sqrt(sx * sx + sy * sy + sz * sz);
                spec[row + k] = u_L_hat(s, L);
            }
        }
    }
    std::vector<double> real_kernel(std::size_t(nx) * ny * nz);
    fft::inverse_c2r(nx, ny, nz, spec.data(), real_kernel.data());
    spec.clear();
    spec.shrink_to_fit();

    // Restrict to the central (2Jx, 2Jy, 2Jz) block in FFT ordering.
    const int mx = 2 * g.Jx, my = 2 * g.Jy, mz = 2 * g.Jz;
    auto src_index = [](int m, int half, int n_over) {
        return (m < half) ? m : m - 2 * half + n_over;
    };
    std::vector<double> restricted(std::size_t(mx) * my * mz);
    for (int i = 0; i < mx; ++i) {
        const int si = src_index(i, g.Jx, nx);
        for (int j = 0; j < my; ++j) {
            const int sj = src_index(j, g.Jy, ny);
            const std::size_t dst_row = (std::size_t(i) * my + j) * mz;
            const std::size_t src_row = (std::size_t(si) * ny + sj) * nz;
            for (int k = 0; k < mz; ++k)
                restricted[dst_row + k] = real_kernel[src_row + src_index(k, g.Jz, nz)];
        }
    }
    real_kernel.clear();
    real_kernel.shrink_to_fit();

    // Forward transform and unfold the Hermitian half-spectrum into the full
    // real multiplier array.
    const int mzh = mz / 2 + 1;
    std::vector<complexd> half(std::size_t(mx) * my * mzh);
    fft::forward_r2c(mx, my, mz, restricted.data(), half.data());

    TruncatedKernelSpectrum out;
    out.grid = std::move(grid);
    out.oversampling = q;
    out.L_trunc = L;
    out.multiplier.assign(std::size_t(mx) * my * mz, 0.0);
    double max_re = 0.0, max_im = 0.0;
    for (int i = 0; i < mx; ++i) {
        for (int j = 0; j < my; ++j) {
            for (int k = 0; k < mzh; ++k) {
                const complexd w = half[(std::size_t(i) * my + j) * mzh + k];
                max_re = std::max(max_re, std::abs(w.real()));
                max_im = std::max(max_im, std::abs(w.imag()));
                out.multiplier[(std::size_t(i) * my + j) * mz + k] = w.real();
                if (k > 0 && k < mz / 2) {
                    const int ii = (mx - i) % mx, jj = (my - j) % my;
                    out.multiplier[(std::size_t(ii) * my + jj) * mz + (mz - k)] = w.real();
                }
            }
        }
    }
    if (max_im > 1e-10 * max_re)
        throw NumericFault("precompute_truncated_kernel: multiplier not real");
    return out;
}

DipoleWorkspace::DipoleWorkspace(std::shared_ptr<const TruncatedKernelSpectrum> kernel,
                                 const PolarizationAxis& n)
    : kernel_(std::move(kernel)), n_(n) {
    const Grid3D& g = *kernel_->grid;
    const std::size_t mx = 2 * g.Jx, my = 2 * g.Jy, mz = 2 * g.Jz;
    pad_.assign(mx * my * mz, 0.0);
    spec_.assign(mx * my * (mz / 2 + 1), complexd(0));
    spec_work_.assign(spec_.size(), complexd(0));
}

void DipoleWorkspace::padded_transform(const double* rho) {
    const Grid3D& g = *kernel_->grid;
    const int mx = 2 * g.Jx, my = 2 * g.Jy, mz = 2 * g.Jz;
    std::fill(pad_.begin(), pad_.end(), 0.0);
    for (int i = 0; i < g.Jx; ++i)
        for (int j = 0; j < g.Jy; ++j) {
            const double* src = rho + g.idx(i, j, 0);
            double* dst = pad_.data() + (std::size_t(i) * my + j) * mz;
            std::copy(src, src + g.Jz, dst);
        }
    fft::forward_r2c(mx, my, mz, pad_.data(), spec_.data());
}

void DipoleWorkspace::phi_nonlocal(const double* rho, double g_dd, double* out) {
    const Grid3D& g = *kernel_->grid;
    const int mx = 2 * g.Jx, my = 2 * g.Jy, mz = 2 * g.Jz;
    const int mzh = mz / 2 + 1;
    padded_transform(rho);

    // Phi_nl = -3 g_dd d_nn phi = 3 g_dd F^-1[(n.k)^2 W rho_hat]
    const std::vector<double> kpx = fft_wavevectors(mx, 2 * g.Lx);
    const std::vector<double> kpy = fft_wavevectors(my, 2 * g.Ly);
    const std::vector<double> kpz = fft_wavevectors(mz, 2 * g.Lz);
    const double* W = kernel_->multiplier.data();
    for (int i = 0; i < mx; ++i) {
        const double nx = n_.n1 * kpx[i];
        for (int j = 0; j < my; ++j) {
            const double nxy = nx + n_.n2 * kpy[j];
            const std::size_t hrow = (std::size_t(i) * my + j) * mzh;
            const std::size_t frow = (std::size_t(i) * my + j) * mz;
            for (int k = 0; k < mzh; ++k) {
                const double nk = nxy + n_.n3 * kpz[k];
                spec_work_[hrow + k] = spec_[hrow + k] * (nk * nk * W[frow + k]);
            }
        }
    }
    fft::inverse_c2r(mx, my, mz, spec_work_.data(), pad_.data());
    const double scale = 3.0 * g_dd;
    for (int i = 0; i < g.Jx; ++i)
        for (int j = 0; j < g.Jy; ++j) {
            const double* src = pad_.data() + (std::size_t(i) * my + j) * mz;
            double* dst = out + g.idx(i, j, 0);
            for (int k = 0; k < g.Jz; ++k)
                dst[k] = scale * src[k];
        }
}

void DipoleWorkspace::poisson(const double* rho, double* out) {
    const Grid3D& g = *kernel_->grid;
    const int mx = 2 * g.Jx, my = 2 * g.Jy, mz = 2 * g.Jz;
    const int mzh = mz / 2 + 1;
    padded_transform(rho);
    const double* W = kernel_->multiplier.data();
    for (int i = 0; i < mx; ++i)
        for (int j = 0; j < my; ++j) {
            const std::size_t hrow = (std::size_t(i) * my + j) * mzh;
            const std::size_t frow = (std::size_t(i) * my + j) * mz;
            for (int k = 0; k < mzh; ++k)
                spec_work_[hrow + k] = spec_[hrow + k] * W[frow + k];
        }
    fft::inverse_c2r(mx, my, mz, spec_work_.data(), pad_.data());
    for (int i = 0; i < g.Jx; ++i)
        for (int j = 0; j < g.Jy; ++j) {
            const double* src = pad_.data() + (std::size_t(i) * my + j) * mz;
            std::copy(src, src + g.Jz, out + g.idx(i, j, 0));
        }
}

namespace {

void boundary_support_check(const RealField& rho, double threshold,
                            std::vector<std::string>* warnings) {
    if (!warnings)
        return;
    const Grid3D& g = *rho.grid;
    double peak = 0.0;
    for (double v : rho.v)
        peak = std::max(peak, std::abs(v));
    if (peak == 0.0)
        return;
    double edge = 0.0;
    for (int i = 0; i < g.Jx; ++i)
        for (int j = 0; j < g.Jy; ++j)
            for (int k = 0; k < g.Jz; ++k) {
                const bool face = i == 0 || i == g.Jx - 1 || j == 0 || j == g.Jy - 1 ||
                                  k == 0 || k == g.Jz - 1;
                if (face)
                    edge = std::max(edge, std::abs(rho.v[g.idx(i, j, k)]));
            }
    if (edge > threshold * peak)
        warnings->push_back("density at the box boundary is " +
                            std::to_string(edge / peak) +
                            " of the peak; free-space assumption degraded");
}

} // namespace

RealField free_space_poisson(const RealField& rho, const TruncatedKernelSpectrum& kernel,
                             std::vector<std::string>* warnings,
                             double boundary_warn_threshold) {
    if (!rho.grid || !rho.grid->same_as(*kernel.grid))
        throw ConfigError("free_space_poisson: density grid does not match the kernel");
    boundary_support_check(rho, boundary_warn_threshold, warnings);
    // non-owning view; the workspace never outlives this call
    std::shared_ptr<const TruncatedKernelSpectrum> k(&kernel, [](auto*) {});
    DipoleWorkspace ws(k, PolarizationAxis::z());
    RealField phi(rho.grid);
    ws.poisson(rho.v.data(), phi.v.data());
    return phi;
}

RealField dipolar_potential(const ComplexField& psi, const TruncatedKernelSpectrum& kernel,
                            const PolarizationAxis& n, double g_dd,
                            std::vector<std::string>* warnings) {
    if (!psi.grid || !psi.grid->same_as(*kernel.grid))
        throw ConfigError("dipolar_potential: field grid does not match the kernel");
    RealField rho(psi.grid);
    for (std::size_t i = 0; i < psi.v.size(); ++i)
        rho.v[i] = std::norm(psi.v[i]);
    boundary_support_check(rho, 1e-10, warnings);

    std::shared_ptr<const TruncatedKernelSpectrum> k(&kernel, [](auto*) {});
    DipoleWorkspace ws(k, n);
    RealField phi(psi.grid);
    ws.phi_nonlocal(rho.v.data(), g_dd, phi.v.data());
    for (std::size_t i = 0; i < phi.v.size(); ++i)
        phi.v[i] -= g_dd * rho.v[i];
    return phi;
}

RealField dipolar_potential_naive(const ComplexField& psi, const PolarizationAxis& n,
                                  double g_dd) {
    const Grid3D& g = *psi.grid;
    const int mx = 2 * g.Jx, my = 2 * g.Jy, mz = 2 * g.Jz;
    const int mzh = mz / 2 + 1;

    // Singular kernel sampled in real space on the padded box, U(0) := 0.
    std::vector<double> U(std::size_t(mx) * my * mz, 0.0);
    for (int i = 0; i < mx; ++i) {
        const double x = (i < g.Jx ? i : i - mx) * g.dx;
        for (int j = 0; j < my; ++j) {
            const double y = (j < g.Jy ? j : j - my) * g.dy;
            for (int k = 0; k < mz; ++k) {
                const double z = (k < g.Jz ? k : k - mz) * g.dz;
                const double r2 = x * x + y * y + z * z;
                if (r2 == 0.0)
                    continue;
                const double nr = n.n1 * x + n.n2 * y + n.n3 * z;
                U[(std::size_t(i) * my + j) * mz + k] =
                    (1.0 - 3.0 * nr * nr / r2) / (r2 * std::sqrt(r2));
            }
        }
    }
    std::vector<complexd> Uhat(std::size_t(mx) * my * mzh);
    fft::forward_r2c(mx, my, mz, U.data(), Uhat.data());

    std::vector<double>& pad = U; // reuse
    std::fill(pad.begin(), pad.end(), 0.0);
    for (int i = 0; i < g.Jx; ++i)
        for (int j = 0; j < g.Jy; ++j)
            for (int k = 0; k < g.Jz; ++k)
                pad[(std::size_t(i) * my + j) * mz + k] = std::norm(psi.v[g.idx(i, j, k)]);
    std::vector<complexd> rhohat(std::size_t(mx) * my * mzh);
    fft::forward_r2c(mx, my, mz, pad.data(), rhohat.data());
    for (std::size_t i = 0; i < rhohat.size(); ++i)
        rhohat[i] *= Uhat[i];
    fft::inverse_c2r(mx, my, mz, rhohat.data(), pad.data());

    RealField out(psi.grid);
    const double scale = 3.0 * g_dd / (4.0 * kPi) * g.cell_volume();
    for (int i = 0; i < g.Jx; ++i)
        for (int j = 0; j < g.Jy; ++j)
            for (int k = 0; k < g.Jz; ++k)
                out.v[g.idx(i, j, k)] = scale * pad[(std::size_t(i) * my + j) * mz + k];
    return out;
}

RealField gaussian_reference_potential(double sigma, double mass,
                                       const std::array<double, 3>& center,
                                       std::shared_ptr<const Grid3D> grid) {
    if (sigma <= 0)
        throw ConfigError("gaussian_reference_potential: sigma must be positive");
    RealField phi(std::move(grid));
    const Grid3D& g = *phi.grid;
    const double a = 1.0 / (std::sqrt(2.0) * sigma);
    const double center_value = mass / (4.0 * kPi) * std::sqrt(2.0 / kPi) / sigma;
    for (int i = 0; i < g.Jx; ++i) {
        const double x = g.x(i) - center[0];
        for (int j = 0; j < g.Jy; ++j) {
            const double y = g.y(j) - center[1];
            for (int k = 0; k < g.Jz; ++k) {
                const double z = g.z(k) - center[2];
                const double r = std::sqrt(x * x + y * y + z * z);
                phi.v[g.idx(i, j, k)] =
                    (r < 1e-12) ? center_value : mass * std::erf(a * r) / (4.0 * kPi * r);
            }
        }
    }
    return phi;
}

RealField gaussian_reference_dipolar_potential(double sigma, double mass,
                                               const std::array<double, 3>& center,
                                               const PolarizationAxis& n, double g_dd,
                                               std::shared_ptr<const Grid3D> grid) {
    RealField out(std::move(grid));
    const Grid3D& g = *out.grid;
    const double a = 1.0 / (std::sqrt(2.0) * sigma);
    const double c0 = 2.0 * a / std::sqrt(kPi); // d/dr erf(a r) at prefactor level
    const double rho0 = mass / (std::pow(2.0 * kPi, 1.5) * sigma * sigma * sigma);
    for (int i = 0; i < g.Jx; ++i) {
        const double x = g.x(i) - center[0];
        for (int j = 0; j < g.Jy; ++j) {
            const double y = g.y(j) - center[1];
            for (int k = 0; k < g.Jz; ++k) {
                const double z = g.z(k) - center[2];
                const double r2 = x * x + y * y + z * z;
                const double r = std::sqrt(r2);
                const double rho = rho0 * std::exp(-0.5 * r2 / (sigma * sigma));
                double dnn;
                if (a * r < 1e-2) {
                    // series of f''(r) u + f'(r)(1-u)/r around r = 0
                    const double a2 = a * a, a4 = a2 * a2, a6 = a4 * a2;
                    const double u = (r2 == 0.0) ? 0.0
                                                 : std::pow(n.n1 * x + n.n2 * y + n.n3 * z, 2) / r2;
                    const double fpp = c0 * (-2.0 * a2 / 3.0 + 1.2 * a4 * r2 - (30.0 / 42.0) * a6 * r2 * r2);
                    const double fp_over_r = c0 * (-2.0 * a2 / 3.0 + 0.4 * a4 * r2 - (6.0 / 42.0) * a6 * r2 * r2);
                    dnn = mass / (4.0 * kPi) * (fpp * u + fp_over_r * (1.0 - u));
                } else {
                    const double E = std::erf(a * r);
                    const double G = c0 * std::exp(-a * a * r2);
                    const double Gp = -2.0 * a * a * r * G;
                    const double fp = G / r - E / r2;
                    const double fpp = Gp / r - 2.0 * G / r2 + 2.0 * E / (r2 * r);
                    const double u = std::pow(n.n1 * x + n.n2 * y + n.n3 * z, 2) / r2;
                    dnn = mass / (4.0 * kPi) * (fpp * u + fp * (1.0 - u) / r);
                }
                out.v[g.idx(i, j, k)] = -g_dd * rho - 3.0 * g_dd * dnn;
            }
        }
    }
    return out;
}

} // namespace dbec
