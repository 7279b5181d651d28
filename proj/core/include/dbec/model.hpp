#pragma once

#include <cmath>

#include "dbec/constants.hpp"
#include "dbec/kernel.hpp"
#include "dbec/units.hpp"

namespace dbec {

/// All model coefficients of the generalized GPE in internal units
/// (lengths um, times ms, masses in atom masses, so m = 1 and the kinetic
/// prefactor is hbar^2/2). Couplings derive from the scattering length:
///   g(a_s)        = 4 pi a_s hbar^2
///   gamma_qf(a_s) = (32/3) g sqrt(a_s^3/pi) (1 + 1.5 a_dd^2/a_s^2)
struct ModelParams {
    SpeciesParams species;     // SI, kept for reference/manifests
    double N0 = 0;             // atom number
    PolarizationAxis polarization = PolarizationAxis::z();

    double hbar = 0;           // internal
    double a_dd = 0;           // internal length
    double g_dd = 0;           // internal energy x volume
    double L3 = 0;             // internal um^6/ms
    bool lhy_enabled = true;
    bool dipole_enabled = true;

    static ModelParams from_species(const SpeciesParams& s, double N0_atoms) {
        const UnitSystem u = UnitSystem::um_ms_atom(s.mass_m);
        ModelParams m;
        m.species = s;
        m.N0 = N0_atoms;
        m.hbar = u.hbar_internal();
        m.a_dd = u.length_from_si(s.dipolar_length_add());
        m.g_dd = u.coupling_from_si(s.g_dd());
        m.L3 = u.loss_from_si(s.loss_L3);
        return m;
    }

    UnitSystem units() const { return UnitSystem::um_ms_atom(species.mass_m); }

    double g_of_as(double a_s) const {
        return 4.0 * std::numbers::pi * a_s * hbar * hbar;
    }

    double gamma_qf_of_as(double a_s) const {
        if (!lhy_enabled || a_s <= 0.0)
            return 0.0;
        const double g = g_of_as(a_s);
        const double ratio = a_dd / a_s;
        return (32.0 / 3.0) * g * std::sqrt(a_s * a_s * a_s / std::numbers::pi) *
               (1.0 + 1.5 * ratio * ratio);
    }

    double effective_g_dd() const { return dipole_enabled ? g_dd : 0.0; }
};

} // namespace dbec
