#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "melast/dissipation.hpp"
#include "melast/energy.hpp"
#include "melast/maxwell.hpp"
#include "melast/optimizer.hpp"

namespace melast {

/// Time partition 0 = t^0 < t^1 < ... < t^l = T.
struct Partition {
    std::vector<double> times;

    static Partition uniform(double t_end, int steps);
    void validate(double t_end) const;
    int steps() const { return static_cast<int>(times.size()) - 1; }
};

struct EvolutionOptions {
    MinimizeOptions minimize;
    double det_floor = 1e-6;      // line search rejects det Dy <= det_floor
    bool block_fallback = false;  // alternating (y, theta) sweep after L-BFGS
    int max_bisections = 4;       // per failing interval
    double balance_tol_rel = 1e-6;
    double cn_tol_factor = 2.0;   // cn_tol = factor * h_E * image perimeter
    int work_subdivisions = 8;
};

struct StepDiagnostics {
    double d_inc = 0.0;  // exact dissipation increment from the previous state
    double d_inc_smoothed = 0.0;
    double var_cum = 0.0;
    double balance_residual = 0.0;  // r_i, must stay <= balance tolerance
    double apriori_slack = 0.0;     // filled by check_apriori_bound
    double cn_residual = 0.0;
    int mult_flags = 0;
    double grad_norm = 0.0;  // stationarity of the smoothed objective
    int optimizer_iters = 0;
};

struct TraceEntry {
    double t = 0.0;
    State q;
    EnergyBreakdown breakdown;
    StepDiagnostics diag;

    TraceEntry(double time, State state) : t(time), q(std::move(state)) {}
};

struct EvolutionTrace {
    std::vector<TraceEntry> entries;
    bool aborted = false;
    std::string abort_reason;
    bool cn_valid = true;  // all states within the rasterization CN tolerance
    double cn_tol = 0.0;
    double energy_scale = 1.0;

    double total_variation() const;
};

/// Sum of jump dissipations of the stored piecewise-constant interpolant in
/// (a, b]; equals the supremum over partition refinements for such paths.
double variation(const EvolutionTrace& trace, double a, double b);

struct StepResult {
    State q;
    MinimizeReport report;
    bool failed = false;

    StepResult(State state) : q(std::move(state)) {}
};

/// One incremental minimization: minimize F(t_i, q) + D(q_prev, q) (smoothed
/// dissipation inside the optimizer) starting from q_prev. Line search
/// rejects candidates with det Dy <= det_floor and candidates that would
/// increase F + D_exact, so the exact objective never exceeds F(t_i, q_prev).
StepResult incremental_step(const State& q_prev, double t_i,
                            const LoadSchedule& loads, const MaterialParams& mp,
                            MaxwellContext* maxwell, const EvolutionOptions& opts);

/// Plain energy minimization of q -> F(t, q) (no dissipation term), used by
/// the static mode and to prepare equilibrium initial data.
StepResult minimize_total_energy(const State& q_start, double t,
                                 const LoadSchedule& loads, const MaterialParams& mp,
                                 MaxwellContext* maxwell,
                                 const EvolutionOptions& opts);

/// Sequential incremental minimization over the partition, with up to
/// max_bisections interval bisections on step failure. The trace carries a
/// full diagnostics record per accepted step (apriori slack filled later by
/// check_apriori_bound). Consumes no randomness: identical inputs give
/// identical traces.
EvolutionTrace run_evolution(const State& q0, const Partition& partition,
                             const LoadSchedule& loads, const MaterialParams& mp,
                             MaxwellContext* maxwell, const EvolutionOptions& opts);

/// Global-stability margins F(t, q_hat) + D(q(t), q_hat) - F(t, q(t)) for a
/// finite competitor family: random admissible perturbations of q(t) at three
/// amplitudes, re-minimized random restarts, and the states stored at other
/// times. Negative margins flag stability violations.
struct StabilityReport {
    std::vector<double> margins;
    double worst = 0.0;
    int violations = 0;  // margins below -tol
};
StabilityReport check_stability(const EvolutionTrace& trace, int t_index,
                                int n_competitors, uint64_t seed,
                                const LoadSchedule& loads, const MaterialParams& mp,
                                MaxwellContext* maxwell, const EvolutionOptions& opts,
                                double tol = 1e-8);

/// Upper energy-dissipation estimate per step:
///   r_i = F(t_i,q_i) - F(t_{i-1},q_{i-1}) + D(q_{i-1},q_i) - int dF/dt(tau, q_{i-1}) dtau.
/// Exact minimizers give r_i <= 0; the returned residuals must not exceed
/// the balance tolerance.
std::vector<double> check_energy_balance(const EvolutionTrace& trace,
                                         const LoadSchedule& loads,
                                         const MaterialParams& mp,
                                         int work_subdivisions = 8);

/// Gronwall a-priori bound with a sampled calibration of the weight
///   eta(t) = C (||df/dt|| + ||dg/dt|| + ||dh/dt|| + ||dd/dt||)(t):
/// C is the smallest constant satisfying the time-derivative control on the
/// trace pairs and on `n_samples` random perturbed states. Slack_i =
/// (F(0,q0)+L) e^{H(t_i)} - F(t_i,q_i) - L - sum_{j<=i} D_j must be >= 0.
struct AprioriReport {
    double L = 0.0;
    double eta_constant = 0.0;
    std::vector<double> H;      // H(t_i) per trace entry
    std::vector<double> slack;  // per trace entry (entry 0 included)
    bool all_nonnegative = true;
};
AprioriReport check_apriori_bound(const EvolutionTrace& trace,
                                  const LoadSchedule& loads,
                                  const MaterialParams& mp, uint64_t seed,
                                  int n_samples = 200, double eta_scale = 1.0);

/// Stability of the initial datum (the run_evolution precondition):
/// margins of F(0, q_hat) + D(q0, q_hat) - F(0, q0) over random competitors.
StabilityReport check_stability_initial(const State& q0, const LoadSchedule& loads,
                                        const MaterialParams& mp,
                                        MaxwellContext* maxwell,
                                        const EvolutionOptions& opts,
                                        int n_competitors, uint64_t seed,
                                        double tol = 1e-8);

}  // namespace melast
