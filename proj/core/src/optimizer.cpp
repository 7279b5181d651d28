#include "dbec/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>

#include "dbec/errors.hpp"

namespace dbec {

double ConvergenceHistory::best() const {
    double b = std::numeric_limits<double>::infinity();
    for (const EvaluationRecord& r : records)
        b = std::min(b, r.cost);
    return b;
}

std::vector<double> best_so_far(const ConvergenceHistory& history) {
    if (history.records.empty())
        throw ConfigError("best_so_far: empty history");
    std::vector<double> out;
    out.reserve(history.records.size());
    double b = std::numeric_limits<double>::infinity();
    for (const EvaluationRecord& r : history.records) {
        b = std::min(b, r.cost);
        out.push_back(b);
    }
    return out;
}

namespace {

double propagate_cost(const ProblemSpec& problem, const ControlSampler& controls) {
    Propagator prop(problem.model, problem.grid, problem.kernel, problem.solver);
    ComplexField psi = problem.psi0;
    prop.propagate(psi, controls, problem.T);
    const double overlap = std::abs(inner_product(problem.psi_d, psi));
    const double d = problem.model.N0 - overlap;
    return d * d;
}

} // namespace

double cost(const CoefficientVector& c, int level, const ProblemSpec& problem) {
    try {
        const ControlSet controls = assemble_controls(c, level, problem.endpoints, problem.T);
        return propagate_cost(problem, controls);
    } catch (const NumericFault&) {
        // poisoned evaluation: large sentinel so the optimizer backs off
        return 1e3 * problem.model.N0 * problem.model.N0;
    }
}

double linear_ramp_cost(const ProblemSpec& problem) {
    const ControlSet controls = assemble_controls(linear_ramp_coefficients(1, problem.T),
                                                  1, problem.endpoints, problem.T);
    return propagate_cost(problem, controls);
}

std::vector<double> fd_gradient(const CostFunction& f, const std::vector<double>& c,
                                double f_of_c, double h, const std::vector<double>& lower,
                                const std::vector<double>& upper, int n_workers) {
    const int dim = int(c.size());
    std::vector<std::vector<double>> probes(dim, c);
    std::vector<int> sign(dim, 1);
    for (int i = 0; i < dim; ++i) {
        // one-sided difference into the feasible region at active bounds
        if (c[i] + h <= upper[i]) {
            probes[i][i] = c[i] + h;
        } else {
            probes[i][i] = c[i] - h;
            sign[i] = -1;
        }
        if (probes[i][i] < lower[i] || probes[i][i] > upper[i])
            throw ConfigError("fd_gradient: box narrower than the step size");
    }
    std::vector<double> fp(dim);
    if (n_workers <= 1) {
        for (int i = 0; i < dim; ++i)
            fp[i] = f(probes[i]);
    } else {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int i = next.fetch_add(1); i < dim; i = next.fetch_add(1))
                fp[i] = f(probes[i]);
        };
        std::vector<std::future<void>> pool;
        for (int w = 0; w < std::min(n_workers, dim); ++w)
            pool.push_back(std::async(std::launch::async, worker));
        for (auto& fut : pool)
            fut.get();
    }
    std::vector<double> grad(dim);
    for (int i = 0; i < dim; ++i)
        grad[i] = sign[i] * (fp[i] - f_of_c) / h;
    return grad;
}

namespace {

std::vector<double> project(std::vector<double> x, const std::vector<double>& lo,
                            const std::vector<double>& hi) {
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

/// Budgeted, recorded evaluation frontend shared by the drivers. Gradient
/// probe batches run concurrently but are recorded in index order so
/// histories stay deterministic.
class Evaluator {
  public:
    Evaluator(const CostFunction& f, int budget, int n_workers, const EvalRecorder& record)
        : f_(f), budget_(budget), n_workers_(n_workers), record_(record) {}

    bool exhausted(int needed = 1) const { return used_ + needed > budget_; }
    int used() const { return used_; }

    double eval(const std::vector<double>& x) {
        const double v = f_(x);
        note(x, v);
        return v;
    }

    std::vector<double> eval_batch(const std::vector<std::vector<double>>& xs) {
        std::vector<double> out(xs.size());
        if (n_workers_ <= 1 || xs.size() < 2) {
            for (std::size_t i = 0; i < xs.size(); ++i)
                out[i] = f_(xs[i]);
        } else {
            std::atomic<std::size_t> next{0};
            auto worker = [&] {
                for (std::size_t i = next.fetch_add(1); i < xs.size();
                     i = next.fetch_add(1))
                    out[i] = f_(xs[i]);
            };
            std::vector<std::future<void>> pool;
            const std::size_t n = std::min<std::size_t>(n_workers_, xs.size());
            for (std::size_t w = 0; w < n; ++w)
                pool.push_back(std::async(std::launch::async, worker));
            for (auto& fut : pool)
                fut.get();
        }
        for (std::size_t i = 0; i < xs.size(); ++i)
            note(xs[i], out[i]);
        return out;
    }

    const std::vector<double>& best() const { return best_x_; }
    double best_cost() const { return best_f_; }

  private:
    void note(const std::vector<double>& x, double v) {
        ++used_;
        if (record_)
            record_(x, v);
        if (v < best_f_) {
            best_f_ = v;
            best_x_ = x;
        }
    }

    const CostFunction& f_;
    int budget_;
    int n_workers_;
    const EvalRecorder& record_;
    int used_ = 0;
    double best_f_ = std::numeric_limits<double>::infinity();
    std::vector<double> best_x_;
};

} // namespace

BoxResult box_constrained_quasi_newton(const CostFunction& f, std::vector<double> c0,
                                       const std::vector<double>& lower,
                                       const std::vector<double>& upper, int max_iters,
                                       int eval_budget, double fd_step, int n_workers,
                                       const EvalRecorder& record) {
    const int dim = int(c0.size());
    if (int(lower.size()) != dim || int(upper.size()) != dim)
        throw ConfigError("box_constrained_quasi_newton: bound dimension mismatch");
    Evaluator ev(f, eval_budget, n_workers, record);

    std::vector<double> x = project(std::move(c0), lower, upper);
    if (ev.exhausted())
        return {x, std::numeric_limits<double>::quiet_NaN(), 0, true};
    double fx = ev.eval(x);

    // inverse Hessian approximation, dense (dim <= 27 on the ladder)
    std::vector<double> H(std::size_t(dim) * dim, 0.0);
    auto reset_H = [&] {
        std::fill(H.begin(), H.end(), 0.0);
        for (int i = 0; i < dim; ++i)
            H[std::size_t(i) * dim + i] = 1.0;
    };
    reset_H();

    auto gradient = [&](const std::vector<double>& xx, double fxx) {
        std::vector<std::vector<double>> probes(dim, xx);
        std::vector<int> sign(dim, 1);
        for (int i = 0; i < dim; ++i) {
            if (xx[i] + fd_step <= upper[i]) {
                probes[i][i] = xx[i] + fd_step;
            } else {
                probes[i][i] = xx[i] - fd_step;
                sign[i] = -1;
            }
        }
        const std::vector<double> fp = ev.eval_batch(probes);
        std::vector<double> g(dim);
        for (int i = 0; i < dim; ++i)
            g[i] = sign[i] * (fp[i] - fxx) / fd_step;
        return g;
    };

    if (ev.exhausted(dim))
        return {ev.best(), ev.best_cost(), ev.used(), true};
    std::vector<double> g = gradient(x, fx);

    bool stopped_early = false;
    int ls_failures = 0;
    for (int iter = 0; iter < max_iters; ++iter) {
        // d = -H g, reset to steepest descent if not a descent direction
        std::vector<double> d(dim, 0.0);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                d[i] -= H[std::size_t(i) * dim + j] * g[j];
        if (dot(d, g) >= 0) {
            reset_H();
            for (int i = 0; i < dim; ++i)
                d[i] = -g[i];
        }

        // backtracking Armijo search along the projected path
        bool accepted = false;
        std::vector<double> xn;
        double fn = 0;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            double alpha = 1.0;
            for (int ls = 0; ls < 25; ++ls) {
                std::vector<double> trial(dim);
                for (int i = 0; i < dim; ++i)
                    trial[i] = x[i] + alpha * d[i];
                trial = project(std::move(trial), lower, upper);
                double step2 = 0;
                for (int i = 0; i < dim; ++i)
                    step2 += (trial[i] - x[i]) * (trial[i] - x[i]);
                if (step2 == 0.0)
                    break;
                if (ev.exhausted())
                    return {ev.best(), ev.best_cost(), ev.used(), true};
                const double ft = ev.eval(trial);
                std::vector<double> dx(dim);
                for (int i = 0; i < dim; ++i)
                    dx[i] = trial[i] - x[i];
                if (ft <= fx + 1e-4 * dot(g, dx)) {
                    accepted = true;
                    xn = std::move(trial);
                    fn = ft;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted && attempt == 0) {
                // steepest-descent restart
                reset_H();
                for (int i = 0; i < dim; ++i)
                    d[i] = -g[i];
            }
        }
        if (!accepted) {
            if (++ls_failures >= 2) {
                stopped_early = true;
                break;
            }
            continue;
        }
        ls_failures = 0;

        if (ev.exhausted(dim))
            break;
        const std::vector<double> gn = gradient(xn, fn);

        // damped BFGS update of the inverse Hessian
        std::vector<double> s(dim), yv(dim);
        for (int i = 0; i < dim; ++i) {
            s[i] = xn[i] - x[i];
            yv[i] = gn[i] - g[i];
        }
        const double sy = dot(s, yv);
        const double sn_ = std::sqrt(dot(s, s)), yn_ = std::sqrt(dot(yv, yv));
        if (sy > 1e-10 * sn_ * yn_) {
            const double rho = 1.0 / sy;
            std::vector<double> Hy(dim, 0.0);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    Hy[i] += H[std::size_t(i) * dim + j] * yv[j];
            const double yHy = dot(yv, Hy);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    H[std::size_t(i) * dim + j] +=
                        (1.0 + rho * yHy) * rho * s[i] * s[j] -
                        rho * (s[i] * Hy[j] + Hy[i] * s[j]);
        }

        x = std::move(xn);
        fx = fn;
        g = gn;

        // stop when the projected gradient step is negligible
        double pg = 0;
        for (int i = 0; i < dim; ++i) {
            const double moved = std::clamp(x[i] - g[i], lower[i], upper[i]) - x[i];
            pg = std::max(pg, std::abs(moved));
        }
        if (pg < 1e-14)
            break;
    }
    return {ev.best(), ev.best_cost(), ev.used(), stopped_early};
}

BoxResult nelder_mead(const CostFunction& f, std::vector<double> c0, int eval_budget,
                      const EvalRecorder& record) {
    const int dim = int(c0.size());
    Evaluator ev(f, eval_budget, 1, record);

    // standard coefficients and 0.1 initial simplex edge
    const double alpha = 1.0, gamma = 2.0, rho_c = 0.5, sigma_s = 0.5;
    std::vector<std::vector<double>> x(dim + 1, c0);
    for (int i = 0; i < dim; ++i)
        x[i + 1][i] += 0.1;
    std::vector<double> fx(dim + 1);
    for (int i = 0; i <= dim; ++i) {
        if (ev.exhausted())
            return {ev.best(), ev.best_cost(), ev.used(), true};
        fx[i] = ev.eval(x[i]);
    }

    std::vector<int> order(dim + 1);
    while (!ev.exhausted()) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return fx[a] < fx[b]; });
        const int best = order[0], worst = order[dim], second_worst = order[dim - 1];

        std::vector<double> centroid(dim, 0.0);
        for (int i = 0; i <= dim; ++i) {
            if (i == worst)
                continue;
            for (int j = 0; j < dim; ++j)
                centroid[j] += x[i][j];
        }
        for (double& v : centroid)
            v /= dim;

        auto along = [&](double t) {
            std::vector<double> p(dim);
            for (int j = 0; j < dim; ++j)
                p[j] = centroid[j] + t * (centroid[j] - x[worst][j]);
            return p;
        };

        const std::vector<double> xr = along(alpha);
        const double fr = ev.eval(xr);
        if (fr < fx[best]) {
            if (ev.exhausted()) {
                x[worst] = xr;
                fx[worst] = fr;
                break;
            }
            const std::vector<double> xe = along(alpha * gamma);
            const double fe = ev.eval(xe);
            if (fe < fr) {
                x[worst] = xe;
                fx[worst] = fe;
            } else {
                x[worst] = xr;
                fx[worst] = fr;
            }
        } else if (fr < fx[second_worst]) {
            x[worst] = xr;
            fx[worst] = fr;
        } else {
            if (ev.exhausted())
                break;
            const bool outside = fr < fx[worst];
            std::vector<double> xc(dim);
            for (int j = 0; j < dim; ++j)
                xc[j] = centroid[j] + rho_c * ((outside ? xr[j] : x[worst][j]) - centroid[j]);
            const double fc = ev.eval(xc);
            if (fc < std::min(fr, fx[worst])) {
                x[worst] = xc;
                fx[worst] = fc;
            } else {
                // shrink toward the best vertex
                for (int i = 0; i <= dim; ++i) {
                    if (i == best)
                        continue;
                    for (int j = 0; j < dim; ++j)
                        x[i][j] = x[best][j] + sigma_s * (x[i][j] - x[best][j]);
                    if (ev.exhausted())
                        return {ev.best(), ev.best_cost(), ev.used(), true};
                    fx[i] = ev.eval(x[i]);
                }
            }
        }
    }
    return {ev.best(), ev.best_cost(), ev.used(), false};
}

namespace {

struct RecordingContext {
    ConvergenceHistory* history;
    int level = 0;
    double sentinel = 0; // faulted evaluations return exactly this value
    std::chrono::steady_clock::time_point last;

    EvalRecorder recorder() {
        last = std::chrono::steady_clock::now();
        return [this](const std::vector<double>& c, double J) {
            const auto now = std::chrono::steady_clock::now();
            EvaluationRecord r;
            r.k = int(history->records.size()) + 1;
            r.level = level;
            r.coefficients = c;
            r.cost = J;
            r.wall_ms = std::chrono::duration<double, std::milli>(now - last).count();
            r.fault = (J == sentinel);
            last = now;
            history->records.push_back(std::move(r));
        };
    }
};

CostFunction make_gpe_cost(const ProblemSpec& problem, int level, double sentinel) {
    return [&problem, level, sentinel](const std::vector<double>& c) -> double {
        try {
            const ControlSet controls =
                assemble_controls(c, level, problem.endpoints, problem.T);
            return propagate_cost(problem, controls);
        } catch (const NumericFault&) {
            return sentinel;
        }
    };
}

CoefficientVector refine_coefficients(const CoefficientVector& c, int level, double T,
                                      const CoefficientBounds& next_boxes) {
    const KnotVector src = open_uniform_knots(level, T, true);
    const KnotVector dst = open_uniform_knots(level + 1, T, true);
    const int Ks = src.basis_count(), Kd = dst.basis_count();
    const int per_s = Ks - 2, per_d = Kd - 2;
    if (int(c.size()) != 3 * per_s)
        throw ConfigError("refine_coefficients: coefficient count mismatch");
    CoefficientVector out;
    out.reserve(3 * per_d);
    for (int i = 0; i < 3; ++i) {
        BSplineCurve cur;
        cur.knots = src;
        cur.coeffs.push_back(0.0);
        cur.coeffs.insert(cur.coeffs.end(), c.begin() + i * per_s,
                          c.begin() + (i + 1) * per_s);
        cur.coeffs.push_back(1.0);
        const BSplineCurve fine = refine_curve(cur, dst);
        for (int m = 1; m + 1 < Kd; ++m)
            out.push_back(fine.coeffs[m]);
    }
    // clamp numerical dust back into the boxes
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(out[i], next_boxes.lower[i], next_boxes.upper[i]);
    return out;
}

} // namespace

MultilevelResult multilevel_optimize(const ProblemSpec& problem, const OptimizerConfig& config) {
    MultilevelResult res;
    res.history.J_linear = linear_ramp_cost(problem);
    const double sentinel = 1e3 * res.history.J_linear;

    RecordingContext ctx{&res.history, 1, sentinel, {}};
    CoefficientVector c = linear_ramp_coefficients(1, problem.T);
    for (int level = 1; level <= config.max_level; ++level) {
        const int remaining = config.eval_budget - int(res.history.records.size());
        if (level > 1) {
            // refine on entry so best/final_level stay consistent when the
            // budget runs out at a level boundary
            if (remaining <= 0)
                break;
            const CoefficientBounds next =
                coefficient_bounds(level, problem.bounds, problem.endpoints);
            c = refine_coefficients(c, level - 1, problem.T, next);
        }
        ctx.level = level;
        res.history.level_starts.push_back(int(res.history.records.size()));
        const CoefficientBounds boxes =
            coefficient_bounds(level, problem.bounds, problem.endpoints);
        const CostFunction f = make_gpe_cost(problem, level, sentinel);
        const int iters = (level == config.max_level)
                              ? std::numeric_limits<int>::max()
                              : config.iters_per_level;
        const EvalRecorder rec = ctx.recorder();
        const BoxResult r = box_constrained_quasi_newton(
            f, c, boxes.lower, boxes.upper, iters, remaining, config.fd_step,
            config.n_workers, rec);
        if (!r.best.empty())
            c = r.best;
        res.final_level = level;
    }
    res.best = c;
    return res;
}

MultilevelResult direct_level_optimize(const ProblemSpec& problem, int level,
                                       const OptimizerConfig& config) {
    MultilevelResult res;
    res.history.J_linear = linear_ramp_cost(problem);
    const double sentinel = 1e3 * res.history.J_linear;
    res.history.level_starts.push_back(0);

    RecordingContext ctx{&res.history, level, sentinel, {}};
    const CoefficientBounds boxes = coefficient_bounds(level, problem.bounds, problem.endpoints);
    const CostFunction f = make_gpe_cost(problem, level, sentinel);
    const EvalRecorder rec = ctx.recorder();
    const BoxResult r = box_constrained_quasi_newton(
        f, linear_ramp_coefficients(level, problem.T), boxes.lower, boxes.upper,
        std::numeric_limits<int>::max(), config.eval_budget, config.fd_step,
        config.n_workers, rec);
    res.best = r.best;
    res.final_level = level;
    return res;
}

MultilevelResult sum_of_sines_optimize(const ProblemSpec& problem, int K,
                                       const OptimizerConfig& config) {
    MultilevelResult res;
    res.history.J_linear = linear_ramp_cost(problem);
    const double sentinel = 1e3 * res.history.J_linear;
    const double weight =
        config.penalty_weight > 0 ? config.penalty_weight : 1e3 * res.history.J_linear;
    res.history.level_starts.push_back(0);

    const auto u_boxes = normalized_control_boxes(problem.bounds, problem.endpoints);
    const int samples = std::max(2, config.penalty_samples);

    // NM minimizes J + weight * sum of squared bound violations on dense
    // time samples; feasible trajectories contribute exactly zero penalty.
    const CostFunction f = [&](const std::vector<double>& c) -> double {
        const ControlSet controls = sum_of_sines_controls(c, K, problem.endpoints, problem.T);
        double violation = 0.0;
        for (int s = 0; s < samples; ++s) {
            const double t = problem.T * double(s) / (samples - 1);
            for (int i = 0; i < 3; ++i) {
                const double u = curve_value(controls.u(i), t);
                const double lo = u_boxes[i][0], hi = u_boxes[i][1];
                if (u < lo)
                    violation += (lo - u) * (lo - u);
                else if (u > hi)
                    violation += (u - hi) * (u - hi);
            }
        }
        double J;
        try {
            J = propagate_cost(problem, controls);
        } catch (const NumericFault&) {
            J = sentinel;
        }
        return J + weight * violation;
    };

    RecordingContext ctx{&res.history, 0, sentinel, {}};
    const EvalRecorder rec = ctx.recorder();
    const BoxResult r =
        nelder_mead(f, std::vector<double>(std::size_t(3) * K, 0.0), config.eval_budget, rec);
    res.best = r.best;
    res.final_level = 0;
    return res;
}

CoefficientVector random_in_box(const CoefficientBounds& boxes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    CoefficientVector c(boxes.lower.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double u = double(rng() >> 11) * 0x1.0p-53;
        c[i] = boxes.lower[i] + u * (boxes.upper[i] - boxes.lower[i]);
    }
    return c;
}

} // namespace dbec
