#pragma once

#include <string>
#include <vector>

#include "dbec/field.hpp"

namespace dbec {

/// Cylinder |{x,y}| <= radius, |z| <= half_length around the z axis;
/// defaults closely surround the target droplet.
struct CylinderRegion {
    double radius = 0.75;       // um
    double half_length = 7.5;   // um
};

/// Time series of the standard diagnostics, one entry per recorded step.
struct ObservableSeries {
    std::vector<double> times;
    std::vector<double> peak_density;
    std::vector<double> atoms_total;
    std::vector<double> atoms_in_Z;

    std::size_t size() const { return times.size(); }
};

/// max over the grid of |psi|^2 (atoms/um^3 internally).
double peak_density(const ComplexField& psi);

/// sum of |psi|^2 dV over grid points inside the cylinder; sharp indicator,
/// no sub-cell weighting. Throws if the region exceeds the box.
double atoms_in_region(const ComplexField& psi, const CylinderRegion& region);

enum class SlicePlane { y0, z0 };

/// |psi|^2 restricted to the grid plane nearest the requested coordinate
/// zero, with axis metadata for plotting.
struct DensitySlice {
    SlicePlane plane = SlicePlane::y0;
    int fixed_index = 0;          // grid index of the slicing plane
    int n0 = 0, n1 = 0;           // slice dimensions (rows, cols)
    double d0 = 0, d1 = 0;        // spacings along the slice axes
    double origin0 = 0, origin1 = 0;
    std::vector<double> density;  // row-major (n0, n1)
};

DensitySlice density_slice(const ComplexField& psi, SlicePlane plane);

/// |<psi_d, psi>| in atom-number units; global-phase invariant and bounded
/// by sqrt(N(psi) N(psi_d)).
double overlap_with_target(const ComplexField& psi, const ComplexField& psi_d);

} // namespace dbec
