#pragma once

#include <vector>

#include "dbec/errors.hpp"

namespace dbec {

/// Open knot vector: nondecreasing, first and last knots repeated p+1
/// times, carrying K = len(knots) - (p+1) basis functions.
struct KnotVector {
    std::vector<double> knots;
    int degree = 3;

    int basis_count() const { return int(knots.size()) - (degree + 1); }
    double t_begin() const { return knots.front(); }
    double t_end() const { return knots.back(); }
    bool nested_in(const KnotVector& finer) const;
};

/// Scalar spline u(t) = sum_k c_k N_{k,p}(t). The curve is bounded by
/// [min c, max c] (convex hull) and interpolates c_front/c_back at the
/// interval ends.
struct BSplineCurve {
    KnotVector knots;
    std::vector<double> coeffs;

    double eval(double t) const;
};

/// Cox-de Boor recursion for a single basis function N_{k,p}(t), 0/0 := 0.
/// Right-continuous convention; the last basis function takes the value 1
/// at the right endpoint so endpoint interpolation is exact.
double basis_eval(const KnotVector& knots, int k, double t);

/// Dyadic ladder of cubic open uniform knot vectors on [0, T]:
/// level 1 has no interior knots, level l has 2^(l-1) - 1 uniformly spaced
/// ones. Levels above 4 require allow_extended.
KnotVector open_uniform_knots(int level, double T, bool allow_extended = false);

double curve_eval(const BSplineCurve& curve, double t);

/// Greville abscissae: per-basis averages of p consecutive interior knots.
/// Size equals basis_count(); endpoints coincide with the span endpoints.
std::vector<double> greville_points(const KnotVector& knots);

/// Re-expresses a curve exactly on a finer nested knot vector by solving
/// the Greville collocation system of the target basis. The system is
/// small (K <= 11 on the standard ladder) and solved densely with partial
/// pivoting; singularity cannot occur for open uniform cubics and is
/// asserted.
BSplineCurve refine_curve(const BSplineCurve& curve, const KnotVector& target);

} // namespace dbec
