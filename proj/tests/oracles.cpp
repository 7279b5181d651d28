#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

double de_boor_eval(const dbec::KnotVector& kv, const std::vector<double>& coeffs, double t) {
    const int p = kv.degree;
    const std::vector<double>& xi = kv.knots;
    // last span with xi[j] <= t and xi[j+1] > xi[j]
    int j = int(std::upper_bound(xi.begin(), xi.end(), t) - xi.begin()) - 1;
    while (j > 0 && xi[j + 1] <= xi[j])
        --j;
    j = std::clamp(j, p, int(coeffs.size()) - 1);

    std::vector<double> d(p + 1);
    for (int r = 0; r <= p; ++r)
        d[r] = coeffs[j - p + r];
    for (int k = 1; k <= p; ++k) {
        for (int r = p; r >= k; --r) {
            const int i = j - p + r;
            const double den = xi[i + p - k + 1] - xi[i];
            const double alpha = (den == 0.0) ? 0.0 : (t - xi[i]) / den;
            d[r] = (1.0 - alpha) * d[r - 1] + alpha * d[r];
        }
    }
    return d[p];
}

dbec::BSplineCurve knot_insertion_refine(const dbec::BSplineCurve& curve,
                                         const dbec::KnotVector& target) {
    const int p = curve.knots.degree;
    std::vector<double> xi = curve.knots.knots;
    std::vector<double> c = curve.coeffs;

    // multiset difference target \ source, nondecreasing
    std::vector<double> to_insert;
    std::size_t si = 0;
    for (double t : target.knots) {
        if (si < xi.size() && xi[si] == t)
            ++si;
        else
            to_insert.push_back(t);
    }

    for (double that : to_insert) {
        int j = int(std::upper_bound(xi.begin(), xi.end(), that) - xi.begin()) - 1;
        std::vector<double> cn(c.size() + 1);
        for (int i = 0; i < int(cn.size()); ++i) {
            if (i <= j - p) {
                cn[i] = c[i];
            } else if (i > j) {
                cn[i] = c[i - 1];
            } else {
                const double den = xi[i + p] - xi[i];
                const double alpha = (den == 0.0) ? 0.0 : (that - xi[i]) / den;
                cn[i] = alpha * c[i] + (1.0 - alpha) * c[i - 1];
            }
        }
        c = std::move(cn);
        xi.insert(std::upper_bound(xi.begin(), xi.end(), that), that);
    }
    dbec::BSplineCurve out;
    out.knots.degree = p;
    out.knots.knots = std::move(xi);
    out.coeffs = std::move(c);
    return out;
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double fa,
                            double b, double fb, double m, double fm, double whole,
                            double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, simpson(a, fa, b, fb, fm), tol, 48);
}

double radial_poisson_quadrature(double r, double sigma, double mass) {
    const double pref = mass / std::pow(2.0 * std::numbers::pi * sigma * sigma, 1.5);
    auto rho = [&](double s) { return pref * std::exp(-0.5 * s * s / (sigma * sigma)); };
    // phi(r) = (1/r) int_0^r rho s^2 ds + int_r^inf rho s ds
    const double inner =
        adaptive_simpson([&](double s) { return rho(s) * s * s; }, 0.0, r, 1e-14) / r;
    const double outer =
        adaptive_simpson([&](double s) { return rho(s) * s; }, r, r + 14.0 * sigma, 1e-14);
    return inner + outer;
}

double gaussian_phi_zz(const std::array<double, 3>& p, const std::array<double, 3>& sig,
                       double mass) {
    const auto integrand = [&](double s) {
        const double vx = sig[0] * sig[0] + 2.0 * s;
        const double vy = sig[1] * sig[1] + 2.0 * s;
        const double vz = sig[2] * sig[2] + 2.0 * s;
        const double g = mass *
                         std::exp(-0.5 * (p[0] * p[0] / vx + p[1] * p[1] / vy +
                                          p[2] * p[2] / vz)) /
                         std::sqrt(std::pow(2.0 * std::numbers::pi, 3) * vx * vy * vz);
        return g * (p[2] * p[2] / (vz * vz) - 1.0 / vz);
    };
    // substitute s = t/(1-t) to map (0, inf) to (0, 1)
    return adaptive_simpson(
        [&](double t) {
            if (t >= 1.0)
                return 0.0;
            const double s = t / (1.0 - t);
            return integrand(s) / ((1.0 - t) * (1.0 - t));
        },
        0.0, 1.0, 1e-13);
}

double gaussian_dipolar_oracle(const std::array<double, 3>& p,
                               const std::array<double, 3>& sig, double mass, double g_dd) {
    const double rho =
        mass *
        std::exp(-0.5 * (p[0] * p[0] / (sig[0] * sig[0]) + p[1] * p[1] / (sig[1] * sig[1]) +
                         p[2] * p[2] / (sig[2] * sig[2]))) /
        (std::pow(2.0 * std::numbers::pi, 1.5) * sig[0] * sig[1] * sig[2]);
    return -g_dd * rho - 3.0 * g_dd * gaussian_phi_zz(p, sig, mass);
}

} // namespace oracle
