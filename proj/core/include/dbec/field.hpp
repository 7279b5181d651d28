#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "dbec/grid.hpp"

namespace dbec {

using complexd = std::complex<double>;

/// Condensate wavefunction samples on a grid. Value type; the grid is
/// shared immutably. The atom number is N = sum |psi|^2 dV.
struct ComplexField {
    std::shared_ptr<const Grid3D> grid;
    std::vector<complexd> v;

    ComplexField() = default;
    explicit ComplexField(std::shared_ptr<const Grid3D> g)
        : grid(std::move(g)), v(grid->size()) {}

    static ComplexField zeros(std::shared_ptr<const Grid3D> g) { return ComplexField(std::move(g)); }
};

/// Real scalar field on a grid (densities, potentials).
struct RealField {
    std::shared_ptr<const Grid3D> grid;
    std::vector<double> v;

    RealField() = default;
    explicit RealField(std::shared_ptr<const Grid3D> g)
        : grid(std::move(g)), v(grid->size(), 0.0) {}
};

/// N = sum |psi|^2 dV. Throws NumericFault on NaN.
double atom_number(const ComplexField& f);

/// sum conj(a) b dV on a common grid.
complexd inner_product(const ComplexField& a, const ComplexField& b);

/// Rescales so atom_number(result) == N_target. Throws on zero-norm input.
ComplexField normalize_to(const ComplexField& f, double N_target);

/// Gaussian exp(-sum (r_i-c_i)^2/(2 sigma_i^2)) scaled to the given atom
/// number; the standard initial guess and test payload.
ComplexField gaussian_field(std::shared_ptr<const Grid3D> grid,
                            double sigma_x, double sigma_y, double sigma_z,
                            double cx, double cy, double cz, double N_atoms);

} // namespace dbec
