#include "dbec/field.hpp"

#include <cmath>
#include <numbers>

#include "dbec/errors.hpp"

namespace dbec {

double atom_number(const ComplexField& f) {
    double acc = 0.0;
    for (const complexd& c : f.v)
        acc += std::norm(c);
    const double n = acc * f.grid->cell_volume();
    if (!std::isfinite(n))
        throw NumericFault("atom_number");
    return n;
}

complexd inner_product(const ComplexField& a, const ComplexField& b) {
    if (!a.grid || !b.grid || !a.grid->same_as(*b.grid))
        throw ConfigError("inner_product: fields live on different grids");
    complexd acc = 0.0;
    const std::size_t n = a.v.size();
    for (std::size_t i = 0; i < n; ++i)
        acc += std::conj(a.v[i]) * b.v[i];
    acc *= a.grid->cell_volume();
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
        throw NumericFault("inner_product");
    return acc;
}

ComplexField normalize_to(const ComplexField& f, double N_target) {
    if (N_target <= 0)
        throw ConfigError("normalize_to: target atom number must be positive");
    const double n = atom_number(f);
    if (n <= 0)
        throw ConfigError("normalize_to: zero-norm input");
    ComplexField out = f;
    const double s = std::sqrt(N_target / n);
    for (complexd& c : out.v)
        c *= s;
    return out;
}

ComplexField gaussian_field(std::shared_ptr<const Grid3D> grid, double sigma_x,
                            double sigma_y, double sigma_z, double cx, double cy,
                            double cz, double N_atoms) {
    ComplexField f(std::move(grid));
    const Grid3D& g = *f.grid;
    for (int i = 0; i < g.Jx; ++i) {
        const double ex = (g.x(i) - cx) / sigma_x;
        for (int j = 0; j < g.Jy; ++j) {
            const double ey = (g.y(j) - cy) / sigma_y;
            for (int k = 0; k < g.Jz; ++k) {
                const double ez = (g.z(k) - cz) / sigma_z;
                f.v[g.idx(i, j, k)] = std::exp(-0.25 * (ex * ex + ey * ey + ez * ez));
            }
        }
    }
    return normalize_to(f, N_atoms);
}

} // namespace dbec
