#pragma once

#include "dbec/constants.hpp"

namespace dbec {

/// Internal unit system: lengths in micrometers, times in milliseconds and
/// masses in units of one atom mass. This keeps all solver quantities O(1);
/// for 164Dy the reduced Planck constant becomes hbar/m ~ 0.3875 um^2/ms.
class UnitSystem {
  public:
    UnitSystem(double length_m, double time_s, double mass_kg)
        : length_m_(length_m), time_s_(time_s), mass_kg_(mass_kg) {
        if (length_m <= 0 || time_s <= 0 || mass_kg <= 0)
            throw std::invalid_argument("UnitSystem: units must be positive");
    }

    static UnitSystem um_ms_atom(double mass_kg) {
        return UnitSystem(1e-6, 1e-3, mass_kg);
    }

    double length_m() const { return length_m_; }
    double time_s() const { return time_s_; }
    double mass_kg() const { return mass_kg_; }
    double energy_J() const { return mass_kg_ * length_m_ * length_m_ / (time_s_ * time_s_); }

    // SI -> internal
    double length_from_si(double m) const { return m / length_m_; }
    double time_from_si(double s) const { return s / time_s_; }
    double mass_from_si(double kg) const { return kg / mass_kg_; }
    double energy_from_si(double J) const { return J / energy_J(); }
    double frequency_from_si(double rad_per_s) const { return rad_per_s * time_s_; }
    /// action (J s)
    double action_from_si(double Js) const { return Js / (energy_J() * time_s_); }
    /// energy x volume (J m^3), the contact/dipolar coupling unit
    double coupling_from_si(double Jm3) const {
        return Jm3 / (energy_J() * length_m_ * length_m_ * length_m_);
    }
    /// m^6/s, the three-body loss unit
    double loss_from_si(double m6_per_s) const {
        const double l6 = std::pow(length_m_, 6);
        return m6_per_s * time_s_ / l6;
    }

    // internal -> SI
    double length_to_si(double v) const { return v * length_m_; }
    double time_to_si(double v) const { return v * time_s_; }
    double frequency_to_si(double v) const { return v / time_s_; }
    double energy_to_si(double v) const { return v * energy_J(); }

    /// hbar in internal units.
    double hbar_internal() const { return action_from_si(PhysicalConstants::hbar); }

  private:
    double length_m_;
    double time_s_;
    double mass_kg_;
};

} // namespace dbec
