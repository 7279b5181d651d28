#include "dbec/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dbec {

double Grid3D::aspect_ratio() const {
    const double lo = std::min({Lx, Ly, Lz});
    const double hi = std::max({Lx, Ly, Lz});
    return hi / lo;
}

namespace {

std::vector<double> fft_wavevectors(int J, double L) {
    std::vector<double> k(J);
    const double dk = 2.0 * std::numbers::pi / L;
    for (int j = 0; j < J; ++j) {
        const int s = (j < J / 2) ? j : j - J;
        k[j] = dk * s;
    }
    return k;
}

} // namespace

Grid3D build_grid(double Lx, double Ly, double Lz, int Jx, int Jy, int Jz) {
    if (Lx <= 0 || Ly <= 0 || Lz <= 0)
        throw ConfigError("build_grid: box side lengths must be positive");
    for (int J : {Jx, Jy, Jz}) {
        if (J < 8)
            throw ConfigError("build_grid: fewer than 8 points per axis");
        if (J % 2 != 0)
            throw ConfigError("build_grid: odd point counts are not supported");
    }
    Grid3D g;
    g.Lx = Lx; g.Ly = Ly; g.Lz = Lz;
    g.Jx = Jx; g.Jy = Jy; g.Jz = Jz;
    g.dx = Lx / Jx; g.dy = Ly / Jy; g.dz = Lz / Jz;
    g.kx = fft_wavevectors(Jx, Lx);
    g.ky = fft_wavevectors(Jy, Ly);
    g.kz = fft_wavevectors(Jz, Lz);
    return g;
}

} // namespace dbec
