#pragma once

#include <functional>
#include <limits>
#include <vector>

namespace melast {

/// Objective callback: returns the value at x and, when `grad` is non-null,
/// fills it (same size as x, pre-zeroed by the optimizer). Infeasible points
/// report +inf; the line search then shrinks.
using ObjectiveFn =
    std::function<double(const std::vector<double>& x, std::vector<double>* grad)>;

/// Extra acceptance guard evaluated on line-search candidates (after the
/// Armijo test). Used to keep a secondary functional monotone.
using AcceptFn = std::function<bool(const std::vector<double>& x)>;

struct MinimizeOptions {
    int max_iters = 400;
    double grad_tol = 1e-6;    // on the max-norm of the gradient
    int history = 8;           // L-BFGS memory
    double armijo_c = 1e-4;
    double ls_shrink = 0.5;
    int ls_max = 50;
    double min_step = 1e-15;
};

struct MinimizeReport {
    int iterations = 0;
    int evaluations = 0;
    double value = std::numeric_limits<double>::infinity();
    double grad_norm = std::numeric_limits<double>::infinity();
    bool converged = false;   // grad_norm <= grad_tol
    bool stagnated = false;   // line search could not make progress
};

/// Deterministic limited-memory BFGS with backtracking line search.
/// Monotone: every accepted iterate strictly decreases the objective.
MinimizeReport minimize_lbfgs(const ObjectiveFn& objective, std::vector<double>& x,
                              const MinimizeOptions& opts,
                              const AcceptFn& accept = nullptr);

/// Alternating block sweep: repeatedly minimizes over each index block in
/// turn (the other coordinates frozen). Fallback for badly scaled problems.
MinimizeReport minimize_block_sweep(const ObjectiveFn& objective,
                                    std::vector<double>& x,
                                    const std::vector<std::vector<int>>& blocks,
                                    int sweeps, const MinimizeOptions& opts,
                                    const AcceptFn& accept = nullptr);

}  // namespace melast
