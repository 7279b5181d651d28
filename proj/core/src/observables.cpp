#include "dbec/observables.hpp"

#include <algorithm>
#include <cmath>

#include "dbec/errors.hpp"

namespace dbec {

double peak_density(const ComplexField& psi) {
    double peak = 0.0;
    for (const complexd& c : psi.v)
        peak = std::max(peak, std::norm(c));
    return peak;
}

double atoms_in_region(const ComplexField& psi, const CylinderRegion& region) {
    if (region.radius <= 0 || region.half_length <= 0)
        throw ConfigError("atoms_in_region: region dimensions must be positive");
    const Grid3D& g = *psi.grid;
    if (2 * region.radius > std::min(g.Lx, g.Ly) || 2 * region.half_length > g.Lz)
        throw ConfigError("atoms_in_region: cylinder exceeds the computational box");
    const double r2 = region.radius * region.radius;
    double acc = 0.0;
    for (int i = 0; i < g.Jx; ++i) {
        const double x = g.x(i);
        for (int j = 0; j < g.Jy; ++j) {
            const double y = g.y(j);
            if (x * x + y * y > r2)
                continue;
            for (int k = 0; k < g.Jz; ++k) {
                if (std::abs(g.z(k)) > region.half_length)
                    continue;
                acc += std::norm(psi.v[g.idx(i, j, k)]);
            }
        }
    }
    return acc * g.cell_volume();
}

DensitySlice density_slice(const ComplexField& psi, SlicePlane plane) {
    const Grid3D& g = *psi.grid;
    DensitySlice s;
    s.plane = plane;
    if (plane == SlicePlane::y0) {
        // grid index nearest y = 0 (exactly Jy/2 for even J, cell-centered at 0)
        int best = 0;
        for (int j = 1; j < g.Jy; ++j)
            if (std::abs(g.y(j)) < std::abs(g.y(best)))
                best = j;
        s.fixed_index = best;
        s.n0 = g.Jx;
        s.n1 = g.Jz;
        s.d0 = g.dx;
        s.d1 = g.dz;
        s.origin0 = g.x(0);
        s.origin1 = g.z(0);
        s.density.resize(std::size_t(g.Jx) * g.Jz);
        for (int i = 0; i < g.Jx; ++i)
            for (int k = 0; k < g.Jz; ++k)
                s.density[std::size_t(i) * g.Jz + k] = std::norm(psi.v[g.idx(i, best, k)]);
    } else {
        int best = 0;
        for (int k = 1; k < g.Jz; ++k)
            if (std::abs(g.z(k)) < std::abs(g.z(best)))
                best = k;
        s.fixed_index = best;
        s.n0 = g.Jx;
        s.n1 = g.Jy;
        s.d0 = g.dx;
        s.d1 = g.dy;
        s.origin0 = g.x(0);
        s.origin1 = g.y(0);
        s.density.resize(std::size_t(g.Jx) * g.Jy);
        for (int i = 0; i < g.Jx; ++i)
            for (int j = 0; j < g.Jy; ++j)
                s.density[std::size_t(i) * g.Jy + j] = std::norm(psi.v[g.idx(i, j, best)]);
    }
    return s;
}

double overlap_with_target(const ComplexField& psi, const ComplexField& psi_d) {
    return std::abs(inner_product(psi_d, psi));
}

} // namespace dbec
