#include "dbec/control.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dbec {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

ControlEndpoints ControlEndpoints::defaults(const UnitSystem& u) {
    const double a0 = PhysicalConstants::bohr_radius_a0;
    ControlEndpoints e;
    e.a_s_i = u.length_from_si(130.0 * a0);
    e.a_s_f = u.length_from_si(80.0 * a0);
    e.w_rho_i = u.frequency_from_si(kTwoPi * 70.0);
    e.w_rho_f = 0.0;
    e.w_z_i = u.frequency_from_si(kTwoPi * 52.5);
    e.w_z_f = 0.0;
    return e;
}

ControlBounds ControlBounds::defaults(const UnitSystem& u) {
    const double a0 = PhysicalConstants::bohr_radius_a0;
    ControlBounds b;
    b.a_s_lb = u.length_from_si(80.0 * a0);
    b.a_s_ub = u.length_from_si(130.0 * a0);
    b.w_rho_lb = 0.0;
    b.w_rho_ub = u.frequency_from_si(kTwoPi * 318.3);
    b.w_z_lb = 0.0;
    b.w_z_ub = u.frequency_from_si(kTwoPi * 318.3);
    return b;
}

double SineSeries::eval(double t) const {
    double v = t / T;
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        v += coeffs[k] * std::sin(double(k + 1) * std::numbers::pi * t / T);
    return v;
}

double curve_value(const ControlCurve& c, double t) {
    return std::visit([t](const auto& u) { return u.eval(t); }, c);
}

ControlSet::ControlSet(ControlCurve u1, ControlCurve u2, ControlCurve u3,
                       ControlEndpoints endpoints, double T)
    : u_{std::move(u1), std::move(u2), std::move(u3)}, ep_(endpoints), T_(T) {
    if (T <= 0)
        throw ConfigError("ControlSet: horizon must be positive");
    for (const ControlCurve& c : u_) {
        if (std::abs(curve_value(c, 0.0)) > 1e-10 ||
            std::abs(curve_value(c, T) - 1.0) > 1e-10)
            throw ConfigError("ControlSet: curves must satisfy u(0) = 0, u(T) = 1");
    }
}

PhysControls ControlSet::at(double t) const {
    if (t < 0)
        throw ConfigError("ControlSet: control evaluated at negative time");
    if (t >= T_) // frozen at the final values past the horizon
        return {ep_.a_s_f, ep_.w_rho_f, ep_.w_z_f};
    const double v1 = curve_value(u_[0], t);
    const double v2 = curve_value(u_[1], t);
    const double v3 = curve_value(u_[2], t);
    return {ep_.a_s_i + (ep_.a_s_f - ep_.a_s_i) * v1,
            ep_.w_rho_i + (ep_.w_rho_f - ep_.w_rho_i) * v2,
            ep_.w_z_i + (ep_.w_z_f - ep_.w_z_i) * v3};
}

int coefficients_per_level(int level) {
    const KnotVector kv = open_uniform_knots(level, 1.0, true);
    return 3 * (kv.basis_count() - 2);
}

ControlSet assemble_controls(const CoefficientVector& c, int level,
                             const ControlEndpoints& endpoints, double T) {
    const KnotVector kv = open_uniform_knots(level, T, true);
    const int K = kv.basis_count();
    const int per = K - 2;
    if (int(c.size()) != 3 * per)
        throw ConfigError("assemble_controls: expected " + std::to_string(3 * per) +
                          " coefficients for level " + std::to_string(level));
    std::array<ControlCurve, 3> curves;
    for (int i = 0; i < 3; ++i) {
        BSplineCurve cur;
        cur.knots = kv;
        cur.coeffs.reserve(K);
        cur.coeffs.push_back(0.0);
        cur.coeffs.insert(cur.coeffs.end(), c.begin() + i * per, c.begin() + (i + 1) * per);
        cur.coeffs.push_back(1.0);
        curves[i] = std::move(cur);
    }
    return ControlSet(std::move(curves[0]), std::move(curves[1]), std::move(curves[2]),
                      endpoints, T);
}

CoefficientVector linear_ramp_coefficients(int level, double T) {
    const KnotVector kv = open_uniform_knots(level, T, true);
    const std::vector<double> grev = greville_points(kv);
    CoefficientVector c;
    for (int i = 0; i < 3; ++i)
        for (std::size_t m = 1; m + 1 < grev.size(); ++m)
            c.push_back(grev[m] / T);
    return c;
}

std::array<std::array<double, 2>, 3> normalized_control_boxes(
    const ControlBounds& bounds, const ControlEndpoints& endpoints) {
    auto invert = [](double vi, double vf, double lb, double ub) -> std::array<double, 2> {
        if (vi < lb - 1e-12 || vi > ub + 1e-12 || vf < lb - 1e-12 || vf > ub + 1e-12)
            throw ConfigError("coefficient_bounds: endpoints outside physical bounds");
        const double d = vf - vi;
        if (d == 0.0)
            return {0.0, 1.0}; // constant control; the curve is irrelevant
        double u_lo = (lb - vi) / d;
        double u_hi = (ub - vi) / d;
        if (u_lo > u_hi)
            std::swap(u_lo, u_hi);
        return {u_lo, u_hi};
    };
    return {invert(endpoints.a_s_i, endpoints.a_s_f, bounds.a_s_lb, bounds.a_s_ub),
            invert(endpoints.w_rho_i, endpoints.w_rho_f, bounds.w_rho_lb, bounds.w_rho_ub),
            invert(endpoints.w_z_i, endpoints.w_z_f, bounds.w_z_lb, bounds.w_z_ub)};
}

CoefficientBounds coefficient_bounds(int level, const ControlBounds& bounds,
                                     const ControlEndpoints& endpoints) {
    const auto boxes = normalized_control_boxes(bounds, endpoints);
    const KnotVector kv = open_uniform_knots(level, 1.0, true);
    const int per = kv.basis_count() - 2;
    CoefficientBounds out;
    for (int i = 0; i < 3; ++i)
        for (int m = 0; m < per; ++m) {
            out.lower.push_back(boxes[i][0]);
            out.upper.push_back(boxes[i][1]);
        }
    return out;
}

ControlSet sum_of_sines_controls(const std::vector<double>& c, int K,
                                 const ControlEndpoints& endpoints, double T) {
    if (K < 1)
        throw ConfigError("sum_of_sines_controls: K must be >= 1");
    if (int(c.size()) != 3 * K)
        throw ConfigError("sum_of_sines_controls: expected 3K coefficients");
    std::array<ControlCurve, 3> curves;
    for (int i = 0; i < 3; ++i) {
        SineSeries s;
        s.T = T;
        s.coeffs.assign(c.begin() + i * K, c.begin() + (i + 1) * K);
        curves[i] = std::move(s);
    }
    return ControlSet(std::move(curves[0]), std::move(curves[1]), std::move(curves[2]),
                      endpoints, T);
}

ControlSample sample_controls(const ControlSampler& set, double t, const ModelParams& model) {
    const PhysControls p = set.at(t);
    return {p.a_s, p.w_rho, p.w_z, model.g_of_as(p.a_s), model.gamma_qf_of_as(p.a_s)};
}

namespace {

/// Deterministic standard normal from raw mt19937_64 output (Box-Muller on
/// exact (0,1] uniforms); std::normal_distribution is not portable.
double gauss_draw(std::mt19937_64& rng) {
    const double u1 = (double(rng() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = double(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

} // namespace

PerturbedControls::PerturbedControls(const ControlSet& base, const EndpointFactors& f,
                                     double noise_sigma, std::uint64_t seed, double dt,
                                     double t_max)
    : base_(base), dt_(dt) {
    if (noise_sigma < 0 || dt <= 0 || t_max <= 0)
        throw ConfigError("PerturbedControls: invalid sigma, dt or horizon");
    perturbed_ep_ = base.endpoints();
    perturbed_ep_.a_s_i *= f.a_s_i;
    perturbed_ep_.a_s_f *= f.a_s_f;
    perturbed_ep_.w_rho_i *= f.w_rho_i;
    perturbed_ep_.w_z_i *= f.w_z_i;

    // noise scale: sigma times the maximum of each (systematically
    // perturbed) control over [0, T], sampled densely
    const double T = base.horizon();
    std::array<double, 3> mx{0, 0, 0};
    const int samples = 2001;
    for (int s = 0; s < samples; ++s) {
        const double t = T * double(s) / (samples - 1);
        const double u1 = curve_value(base.u(0), t);
        const double u2 = curve_value(base.u(1), t);
        const double u3 = curve_value(base.u(2), t);
        mx[0] = std::max(mx[0], std::abs(perturbed_ep_.a_s_i + (perturbed_ep_.a_s_f - perturbed_ep_.a_s_i) * u1));
        mx[1] = std::max(mx[1], std::abs(perturbed_ep_.w_rho_i + (perturbed_ep_.w_rho_f - perturbed_ep_.w_rho_i) * u2));
        mx[2] = std::max(mx[2], std::abs(perturbed_ep_.w_z_i + (perturbed_ep_.w_z_f - perturbed_ep_.w_z_i) * u3));
    }
    for (int i = 0; i < 3; ++i)
        noise_scale_[i] = noise_sigma * mx[i];

    const int n_steps = int(std::ceil(t_max / dt - 1e-9)) + 1;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 3; ++i)
        noise_[i].resize(n_steps + 1);
    // one draw per control per step time, interleaved so the stream is
    // stable under horizon changes up to the common prefix
    for (int s = 0; s <= n_steps; ++s)
        for (int i = 0; i < 3; ++i)
            noise_[i][s] = gauss_draw(rng);
}

PhysControls PerturbedControls::at(double t) const {
    if (t < 0)
        throw ConfigError("PerturbedControls: control evaluated at negative time");
    const double T = base_.horizon();
    double u1, u2, u3;
    if (t >= T) {
        u1 = u2 = u3 = 1.0;
    } else {
        u1 = curve_value(base_.u(0), t);
        u2 = curve_value(base_.u(1), t);
        u3 = curve_value(base_.u(2), t);
    }
    PhysControls p{perturbed_ep_.a_s_i + (perturbed_ep_.a_s_f - perturbed_ep_.a_s_i) * u1,
                   perturbed_ep_.w_rho_i + (perturbed_ep_.w_rho_f - perturbed_ep_.w_rho_i) * u2,
                   perturbed_ep_.w_z_i + (perturbed_ep_.w_z_f - perturbed_ep_.w_z_i) * u3};
    const std::size_t s =
        std::min(std::size_t(std::llround(t / dt_)), noise_[0].size() - 1);
    p.a_s += noise_scale_[0] * noise_[0][s];
    p.w_rho += noise_scale_[1] * noise_[1][s];
    p.w_z += noise_scale_[2] * noise_[2][s];
    return p;
}

double PerturbedControls::horizon() const { return base_.horizon(); }

} // namespace dbec
