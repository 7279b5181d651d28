#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "dbec/bspline.hpp"
#include "dbec/model.hpp"

namespace dbec {

/// Physical control values at one instant, internal units
/// (a_s in um, angular frequencies in rad/ms).
struct PhysControls {
    double a_s = 0;
    double w_rho = 0;
    double w_z = 0;
};

/// Controls plus the derived couplings the solver needs.
struct ControlSample {
    double a_s = 0;
    double w_rho = 0;
    double w_z = 0;
    double g = 0;
    double gamma_qf = 0;
};

/// Initial/final values of the three controls, internal units.
struct ControlEndpoints {
    double a_s_i = 0, a_s_f = 0;
    double w_rho_i = 0, w_rho_f = 0;
    double w_z_i = 0, w_z_f = 0;

    /// a_s 130 -> 80 a0, omega_rho 2pi 70 -> 0 Hz, omega_z 2pi 52.5 -> 0 Hz.
    static ControlEndpoints defaults(const UnitSystem& u);
};

/// Box constraints on the physical controls, internal units.
struct ControlBounds {
    double a_s_lb = 0, a_s_ub = 0;
    double w_rho_lb = 0, w_rho_ub = 0;
    double w_z_lb = 0, w_z_ub = 0;

    /// a_s in [80, 130] a0, both trap frequencies in [0, 2pi 318.3] Hz.
    static ControlBounds defaults(const UnitSystem& u);
};

/// Normalized sum-of-sines curve u(t) = t/T + sum_k c_k sin(k pi t / T);
/// endpoint values 0 and 1 independent of the coefficients.
struct SineSeries {
    double T = 0;
    std::vector<double> coeffs;

    double eval(double t) const;
};

using ControlCurve = std::variant<BSplineCurve, SineSeries>;

double curve_value(const ControlCurve& c, double t);

/// Time-dependent control inputs consumed by the solver. Implementations
/// must be pure with respect to the query time.
class ControlSampler {
  public:
    virtual ~ControlSampler() = default;
    /// Controls at time t; t > T returns the frozen final values.
    virtual PhysControls at(double t) const = 0;
    virtual double horizon() const = 0;
};

/// Constant controls (ground-state computations, frozen-control tests).
class FrozenControls final : public ControlSampler {
  public:
    FrozenControls(double a_s, double w_rho, double w_z)
        : c_{a_s, w_rho, w_z} {}
    PhysControls at(double) const override { return c_; }
    double horizon() const override { return 0.0; }

  private:
    PhysControls c_;
};

/// The three normalized curves u_1..u_3 with u_i(0) = 0, u_i(T) = 1,
/// realizing a_s(t) = a_s_i + (a_s_f - a_s_i) u_1(t) and likewise for the
/// trap frequencies.
class ControlSet final : public ControlSampler {
  public:
    ControlSet(ControlCurve u1, ControlCurve u2, ControlCurve u3,
               ControlEndpoints endpoints, double T);

    PhysControls at(double t) const override;
    double horizon() const override { return T_; }

    const ControlCurve& u(int i) const { return u_[i]; }
    const ControlEndpoints& endpoints() const { return ep_; }

  private:
    std::array<ControlCurve, 3> u_;
    ControlEndpoints ep_;
    double T_ = 0;
};

/// Flat vector of the free interior coefficients, ordered
/// (c_{1,2}..c_{1,K-1}, c_{2,2}.., c_{3,2}..). Lengths 6/9/15/27 on the
/// standard four-level ladder.
using CoefficientVector = std::vector<double>;

int coefficients_per_level(int level);

/// Builds the three B-spline curves from the free interior coefficients;
/// boundary coefficients 0 and 1 are fixed by the endpoint conditions.
ControlSet assemble_controls(const CoefficientVector& c, int level,
                             const ControlEndpoints& endpoints, double T);

/// Interior coefficients that make all three controls exact linear ramps
/// (Greville abscissae divided by T).
CoefficientVector linear_ramp_coefficients(int level, double T);

/// Per-coefficient box constraints obtained by inverting the affine
/// endpoint maps; coefficients inside these boxes guarantee the physical
/// trajectories respect `bounds` for all t (convex hull property).
struct CoefficientBounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

CoefficientBounds coefficient_bounds(int level, const ControlBounds& bounds,
                                     const ControlEndpoints& endpoints);

/// Per-control normalized box [u_lb, u_ub], the building block of
/// coefficient_bounds (exposed for the penalty method).
std::array<std::array<double, 2>, 3> normalized_control_boxes(
    const ControlBounds& bounds, const ControlEndpoints& endpoints);

/// Sum-of-sines baseline: K coefficients per control, flat layout
/// (c_{1,1}..c_{1,K}, c_{2,1}.., c_{3,1}..).
ControlSet sum_of_sines_controls(const std::vector<double>& c, int K,
                                 const ControlEndpoints& endpoints, double T);

/// Physical values plus derived couplings at time t.
ControlSample sample_controls(const ControlSampler& set, double t,
                              const ModelParams& model);

/// Systematic endpoint scaling plus per-time-step additive white Gaussian
/// noise scaled by each control's maximum over [0, T]. The noise sequence
/// is drawn once at construction from the seed (one draw per control per
/// solver step, held constant within the step), so equal seeds reproduce
/// bitwise-identical controls.
class PerturbedControls final : public ControlSampler {
  public:
    struct EndpointFactors {
        double a_s_i = 1.0, a_s_f = 1.0, w_rho_i = 1.0, w_z_i = 1.0;
    };

    PerturbedControls(const ControlSet& base, const EndpointFactors& factors,
                      double noise_sigma, std::uint64_t seed, double dt,
                      double t_max);

    PhysControls at(double t) const override;
    double horizon() const override;

  private:
    ControlSet base_;
    ControlEndpoints perturbed_ep_;
    double dt_;
    std::array<double, 3> noise_scale_; // sigma x max |control| over [0, T]
    std::array<std::vector<double>, 3> noise_;
};

} // namespace dbec
