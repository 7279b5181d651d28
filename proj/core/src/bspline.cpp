#include "dbec/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace dbec {

namespace {

void validate(const KnotVector& kv) {
    const int p = kv.degree;
    const int s = int(kv.knots.size());
    if (p < 0 || s < 2 * (p + 1))
        throw ConfigError("KnotVector: too few knots for the degree");
    if (!std::is_sorted(kv.knots.begin(), kv.knots.end()))
        throw ConfigError("KnotVector: knots must be nondecreasing");
    for (int i = 0; i <= p; ++i) {
        if (kv.knots[i] != kv.knots.front() || kv.knots[s - 1 - i] != kv.knots.back())
            throw ConfigError("KnotVector: not open (endpoint multiplicity < p+1)");
    }
}

/// Cox-de Boor with 0/0 := 0. t is assumed inside the span; the caller
/// handles the right-endpoint convention.
double cox_de_boor(const std::vector<double>& xi, int k, int p, double t) {
    if (p == 0)
        return (xi[k] <= t && t < xi[k + 1]) ? 1.0 : 0.0;
    double left = 0.0, right = 0.0;
    const double dl = xi[k + p] - xi[k];
    if (dl > 0.0)
        left = (t - xi[k]) / dl * cox_de_boor(xi, k, p - 1, t);
    const double dr = xi[k + p + 1] - xi[k + 1];
    if (dr > 0.0)
        right = (xi[k + p + 1] - t) / dr * cox_de_boor(xi, k + 1, p - 1, t);
    return left + right;
}

} // namespace

bool KnotVector::nested_in(const KnotVector& finer) const {
    if (degree != finer.degree)
        return false;
    for (double t : knots) {
        if (!std::binary_search(finer.knots.begin(), finer.knots.end(), t))
            return false;
    }
    return true;
}

double basis_eval(const KnotVector& kv, int k, double t) {
    validate(kv);
    const int K = kv.basis_count();
    if (k < 0 || k >= K)
        throw ConfigError("basis_eval: basis index out of range");
    const double t0 = kv.t_begin(), t1 = kv.t_end();
    if (t < t0 || t > t1)
        throw ConfigError("basis_eval: t outside the knot span");
    if (t == t1)
        return (k == K - 1) ? 1.0 : 0.0; // right-endpoint convention
    return cox_de_boor(kv.knots, k, kv.degree, t);
}

KnotVector open_uniform_knots(int level, double T, bool allow_extended) {
    if (T <= 0)
        throw ConfigError("open_uniform_knots: T must be positive");
    if (level < 1 || (level > 4 && !allow_extended))
        throw ConfigError("open_uniform_knots: level must be in 1..4");
    KnotVector kv;
    kv.degree = 3;
    const int interior = (1 << (level - 1)) - 1; // 0, 1, 3, 7, ...
    kv.knots.assign(4, 0.0);
    for (int i = 1; i <= interior; ++i)
        kv.knots.push_back(T * double(i) / double(interior + 1));
    kv.knots.insert(kv.knots.end(), 4, T);
    return kv;
}

double BSplineCurve::eval(double t) const {
    return curve_eval(*this, t);
}

double curve_eval(const BSplineCurve& curve, double t) {
    const KnotVector& kv = curve.knots;
    validate(kv);
    const int K = kv.basis_count();
    if (int(curve.coeffs.size()) != K)
        throw ConfigError("curve_eval: coefficient count does not match the basis");
    const double t0 = kv.t_begin(), t1 = kv.t_end();
    if (t < t0 || t > t1)
        throw ConfigError("curve_eval: t outside the knot span");
    if (t == t1)
        return curve.coeffs.back();
    // only the p+1 basis functions whose support contains t contribute
    const int p = kv.degree;
    auto it = std::upper_bound(kv.knots.begin(), kv.knots.end(), t);
    int span = int(it - kv.knots.begin()) - 1; // xi[span] <= t < xi[span+1]
    double acc = 0.0;
    for (int k = std::max(0, span - p); k <= std::min(K - 1, span); ++k)
        acc += curve.coeffs[k] * cox_de_boor(kv.knots, k, p, t);
    return acc;
}

std::vector<double> greville_points(const KnotVector& kv) {
    validate(kv);
    const int p = kv.degree;
    const int K = kv.basis_count();
    std::vector<double> pts(K);
    for (int m = 0; m < K; ++m) {
        double s = 0.0;
        for (int i = 1; i <= p; ++i)
            s += kv.knots[m + i];
        // guard against 1-ulp overshoot past the span ends
        pts[m] = std::clamp(s / p, kv.t_begin(), kv.t_end());
    }
    return pts;
}

namespace {

/// Dense Gaussian elimination with partial pivoting; the collocation
/// systems are at most 11x11 on the standard ladder.
std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b) {
    const int n = int(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col]))
                piv = r;
        if (std::abs(A[piv * n + col]) < 1e-14)
            throw NumericFault("refine_curve: singular collocation matrix");
        if (piv != col) {
            for (int c = 0; c < n; ++c)
                std::swap(A[col * n + c], A[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = A[r * n + col] / A[col * n + col];
            if (f == 0.0)
                continue;
            for (int c = col; c < n; ++c)
                A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c)
            s -= A[r * n + c] * x[c];
        x[r] = s / A[r * n + r];
    }
    return x;
}

} // namespace

BSplineCurve refine_curve(const BSplineCurve& curve, const KnotVector& target) {
    validate(curve.knots);
    validate(target);
    if (!curve.knots.nested_in(target))
        throw ConfigError("refine_curve: target knot vector does not contain the source knots");

    const int K = target.basis_count();
    const std::vector<double> grev = greville_points(target);
    std::vector<double> A(std::size_t(K) * K, 0.0);
    std::vector<double> b(K, 0.0);
    for (int m = 0; m < K; ++m) {
        const double t = grev[m];
        for (int k = 0; k < K; ++k)
            A[std::size_t(m) * K + k] = basis_eval(target, k, t);
        b[m] = curve_eval(curve, t);
    }
    BSplineCurve out;
    out.knots = target;
    out.coeffs = solve_dense(std::move(A), std::move(b));
    return out;
}

} // namespace dbec
