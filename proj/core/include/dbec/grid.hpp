#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "dbec/errors.hpp"

namespace dbec {

/// Uniform periodic-box discretization of the computational domain
/// [-Lx/2, Lx/2) x [-Ly/2, Ly/2) x [-Lz/2, Lz/2), with grid points
/// x_j = -L/2 + j dx and per-axis angular wavevectors in FFT ordering.
/// Immutable after construction; fields are stored row-major with z
/// contiguous, index (i*Jy + j)*Jz + k.
struct Grid3D {
    double Lx = 0, Ly = 0, Lz = 0;
    int Jx = 0, Jy = 0, Jz = 0;
    double dx = 0, dy = 0, dz = 0;
    std::vector<double> kx, ky, kz;

    std::size_t size() const { return std::size_t(Jx) * Jy * Jz; }
    double cell_volume() const { return dx * dy * dz; }
    double volume() const { return Lx * Ly * Lz; }

    double x(int i) const { return -Lx / 2 + i * dx; }
    double y(int j) const { return -Ly / 2 + j * dy; }
    double z(int k) const { return -Lz / 2 + k * dz; }

    std::size_t idx(int i, int j, int k) const {
        return (std::size_t(i) * Jy + j) * Jz + k;
    }

    /// zeta = max(L)/min(L); controls the kernel oversampling requirement.
    double aspect_ratio() const;

    bool same_as(const Grid3D& o) const {
        return Lx == o.Lx && Ly == o.Ly && Lz == o.Lz && Jx == o.Jx &&
               Jy == o.Jy && Jz == o.Jz;
    }
};

/// Validates inputs and fills spacings and wavevector tables.
/// Requires positive lengths and even J >= 8 per axis.
Grid3D build_grid(double Lx, double Ly, double Lz, int Jx, int Jy, int Jz);

inline std::shared_ptr<const Grid3D> make_grid(double Lx, double Ly, double Lz,
                                               int Jx, int Jy, int Jz) {
    return std::make_shared<const Grid3D>(build_grid(Lx, Ly, Lz, Jx, Jy, Jz));
}

} // namespace dbec
