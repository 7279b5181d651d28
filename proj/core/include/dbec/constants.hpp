#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dbec {

/// CODATA-style reference values, SI. Single source of truth for every
/// physical constant used in the toolkit.
struct PhysicalConstants {
    static constexpr double hbar = 1.054571817e-34;          // J s
    static constexpr double atomic_mass_unit = 1.66053906660e-27; // kg
    static constexpr double bohr_radius_a0 = 5.29177210903e-11;   // m
    static constexpr double bohr_magneton_muB = 9.2740100783e-24; // J/T
    static constexpr double vacuum_permeability_mu0 = 1.25663706212e-6; // N/A^2
};

/// One magnetic species: mass, magnetic moment and three-body loss rate.
/// Derived dipolar quantities are recomputed from the raw fields so they
/// can never drift out of sync.
struct SpeciesParams {
    double mass_m = 0.0;           // kg
    double magnetic_moment_mu = 0.0; // J/T
    double loss_L3 = 0.0;          // m^6/s

    /// a_dd = m mu0 mu^2 / (12 pi hbar^2), in meters.
    double dipolar_length_add() const {
        const double h = PhysicalConstants::hbar;
        return mass_m * PhysicalConstants::vacuum_permeability_mu0 *
               magnetic_moment_mu * magnetic_moment_mu /
               (12.0 * std::numbers::pi * h * h);
    }

    /// g_dd = 4 pi hbar^2 a_dd / m = mu0 mu^2 / 3, in J m^3.
    double g_dd() const {
        return PhysicalConstants::vacuum_permeability_mu0 *
               magnetic_moment_mu * magnetic_moment_mu / 3.0;
    }

    /// 164Dy parameters used throughout the droplet study.
    static SpeciesParams dy164() {
        SpeciesParams s;
        s.mass_m = 163.93 * PhysicalConstants::atomic_mass_unit;
        s.magnetic_moment_mu = 9.93 * PhysicalConstants::bohr_magneton_muB;
        s.loss_L3 = 1.2e-41;
        return s;
    }
};

} // namespace dbec
