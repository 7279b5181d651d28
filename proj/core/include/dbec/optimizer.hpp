#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dbec/control.hpp"
#include "dbec/field.hpp"
#include "dbec/kernel.hpp"
#include "dbec/model.hpp"
#include "dbec/solver.hpp"

namespace dbec {

/// Everything one cost evaluation needs. psi0 and psi_d must be normalized
/// to the same N0.
struct ProblemSpec {
    ModelParams model;
    std::shared_ptr<const Grid3D> grid;
    std::shared_ptr<const TruncatedKernelSpectrum> kernel;
    ComplexField psi0;
    ComplexField psi_d;
    double T = 2.0;
    SolverConfig solver;
    ControlEndpoints endpoints;
    ControlBounds bounds;
};

struct EvaluationRecord {
    int k = 0;        // 1-based, contiguous
    int level = 0;
    std::vector<double> coefficients;
    double cost = 0;
    double wall_ms = 0;
    bool fault = false;
};

/// Ordered record of cost evaluations across levels. best-so-far sequences
/// are non-increasing; J_linear (the cost of exact linear ramps) is the
/// normalization used everywhere.
struct ConvergenceHistory {
    std::vector<EvaluationRecord> records;
    std::vector<int> level_starts;   // record index where each level begins
    double J_linear = 0;

    double best() const;
};

/// Prefix minimum of the recorded costs.
std::vector<double> best_so_far(const ConvergenceHistory& history);

enum class Algorithm { projected_quasi_newton, nelder_mead_penalty };

struct OptimizerConfig {
    int iters_per_level = 15;
    int eval_budget = 2500;
    double fd_step = 1e-3;
    Algorithm algorithm = Algorithm::projected_quasi_newton;
    double penalty_weight = 0;      // 0 -> 1e3 x J_linear
    std::uint64_t seed = 0;
    int max_level = 4;
    int n_workers = 1;              // concurrent propagations in fd_gradient
    int penalty_samples = 201;      // dense time samples for the penalty term
};

/// J(c) = (N0 - |<psi_d, psi(T)>|)^2 via one propagation of psi0 under the
/// controls assembled from c. Solver faults map to the sentinel cost
/// 1e3 x J_linear (flagged), never to an exception.
double cost(const CoefficientVector& c, int level, const ProblemSpec& problem);

/// Generic evaluation hook so the optimizers run on both the GPE cost and
/// analytic test functions. Must be thread-safe for concurrent calls.
using CostFunction = std::function<double(const std::vector<double>&)>;

/// Forward-difference gradient; coefficients pinned at a box face step
/// one-sided into the feasible region. dim(c) extra evaluations.
std::vector<double> fd_gradient(const CostFunction& f, const std::vector<double>& c,
                                double f_of_c, double h,
                                const std::vector<double>& lower,
                                const std::vector<double>& upper,
                                int n_workers = 1);

struct BoxResult {
    std::vector<double> best;
    double best_cost = 0;
    int evaluations = 0;
    bool stopped_early = false;   // repeated line-search failure
};

/// Recorded by the drivers for every evaluation, in call order.
using EvalRecorder = std::function<void(const std::vector<double>&, double)>;

/// Projected quasi-Newton (damped BFGS + box projection + backtracking
/// line search). Iterates at most max_iters times or until eval_budget
/// evaluations have been recorded.
BoxResult box_constrained_quasi_newton(const CostFunction& f, std::vector<double> c0,
                                       const std::vector<double>& lower,
                                       const std::vector<double>& upper,
                                       int max_iters, int eval_budget, double fd_step,
                                       int n_workers = 1,
                                       const EvalRecorder& record = {});

/// Nelder-Mead with standard coefficients (1, 2, 0.5, 0.5) and initial
/// simplex edge 0.1, minimizing f + penalty where the penalty callback adds
/// the quadratic bound-violation terms.
BoxResult nelder_mead(const CostFunction& f, std::vector<double> c0, int eval_budget,
                      const EvalRecorder& record = {});

struct MultilevelResult {
    CoefficientVector best;     // finest-level coefficients
    int final_level = 4;
    ConvergenceHistory history;
};

/// Levels 1 -> max_level with exact curve refinement between levels;
/// the final level runs until the evaluation budget is exhausted.
MultilevelResult multilevel_optimize(const ProblemSpec& problem, const OptimizerConfig& config);

/// Direct optimization at a single level (the paper's comparison run).
MultilevelResult direct_level_optimize(const ProblemSpec& problem, int level,
                                       const OptimizerConfig& config);

/// Sum-of-sines + Nelder-Mead + quadratic penalty baseline (K sines per
/// control, 3K variables, c0 = 0 i.e. linear ramps).
MultilevelResult sum_of_sines_optimize(const ProblemSpec& problem, int K,
                                       const OptimizerConfig& config);

/// Cost of exact linear ramps (the shared normalization J_linear).
double linear_ramp_cost(const ProblemSpec& problem);

/// Seeded uniform-in-box coefficient sampler for robustness studies.
CoefficientVector random_in_box(const CoefficientBounds& boxes, std::uint64_t seed);

} // namespace dbec
