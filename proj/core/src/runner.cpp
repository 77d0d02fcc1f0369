#include "melast/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "melast/degree.hpp"
#include "melast/errors.hpp"
#include "melast/snapshot.hpp"
#include "melast/testing.hpp"

namespace melast {

namespace fs = std::filesystem;

RunMode mode_from_string(const std::string& name) {
    if (name == "static") return RunMode::Static;
    if (name == "evolve") return RunMode::Evolve;
    if (name == "verify-degree") return RunMode::VerifyDegree;
    if (name == "verify-energy") return RunMode::VerifyEnergy;
    if (name == "verify-balance") return RunMode::VerifyBalance;
    throw ConfigError("unknown mode '" + name +
                      "' (static, evolve, verify-degree, verify-energy, verify-balance)");
}

std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::Static: return "static";
        case RunMode::Evolve: return "evolve";
        case RunMode::VerifyDegree: return "verify-degree";
        case RunMode::VerifyEnergy: return "verify-energy";
        case RunMode::VerifyBalance: return "verify-balance";
    }
    return "?";
}

namespace {

void add_line(std::vector<SummaryLine>& summary, const std::string& name, bool pass,
              double residual, double tolerance) {
    summary.push_back({name, pass ? "PASS" : "FAIL", residual, tolerance});
}

void add_skipped(std::vector<SummaryLine>& summary, const std::string& name) {
    summary.push_back({name, "SKIPPED", 0.0, 0.0});
}

void write_summary(const std::string& output_dir,
                   const std::vector<SummaryLine>& summary) {
    std::ofstream out(fs::path(output_dir) / "summary.txt");
    for (const auto& line : summary) {
        out << line.name << ' ' << line.status << ' ' << format_g17(line.residual)
            << ' ' << format_g17(line.tolerance) << '\n';
    }
}

int exit_code_from(const std::vector<SummaryLine>& summary) {
    for (const auto& line : summary)
        if (line.status == "FAIL") return 1;
    return 0;
}

std::string snapshot_name(int step, const char* field) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "step_%04d_%s.grid", step, field);
    return buf;
}

void write_state_snapshots(const std::string& output_dir, int step, const State& q) {
    write_deformation((fs::path(output_dir) / snapshot_name(step, "y")).string(),
                      q.deformation);
    write_director((fs::path(output_dir) / snapshot_name(step, "theta")).string(),
                   q.director);
}

std::string trace_row(int i, const TraceEntry& e) {
    std::ostringstream os;
    os << i << ',' << format_g17(e.t) << ',' << format_g17(e.breakdown.e_el) << ','
       << format_g17(e.breakdown.e_exc) << ',' << format_g17(e.breakdown.e_mag) << ','
       << format_g17(e.breakdown.l_work) << ',' << format_g17(e.breakdown.b_pen) << ','
       << format_g17(e.breakdown.f_total) << ',' << format_g17(e.diag.d_inc) << ','
       << format_g17(e.diag.var_cum) << ',' << format_g17(e.diag.balance_residual)
       << ',' << format_g17(e.diag.apriori_slack) << ','
       << format_g17(e.diag.cn_residual) << ',' << e.diag.mult_flags << ','
       << format_g17(e.diag.grad_norm) << ',' << e.diag.optimizer_iters;
    return os.str();
}

constexpr const char* kTraceHeader =
    "i,t,E_el,E_exc,E_mag,L,B,F,D_inc,Var_cum,balance_residual,apriori_slack,"
    "cn_residual,mult_flags,grad_norm,optimizer_iters";

void write_trace_csv(const std::string& output_dir, const EvolutionTrace& trace,
                     const std::vector<std::string>& prefix_rows) {
    std::ofstream out(fs::path(output_dir) / "trace.csv");
    out << kTraceHeader << '\n';
    size_t i = 0;
    for (; i < prefix_rows.size(); ++i) out << prefix_rows[i] << '\n';
    for (; i < trace.entries.size(); ++i)
        out << trace_row(static_cast<int>(i), trace.entries[i]) << '\n';
}

/// Saturation defect over quadrature points: | |m o y| det Dy - 1 |.
double saturation_defect_qp(const State& q) {
    double worst = 0.0;
    const RefGrid& g = q.grid();
    for (int c = 0; c < g.num_cells(); ++c) {
        const Vec2 z = q.director.director(c);
        for (const auto& qp : g.quad_points()) {
            const double det = q.deformation.det_at(c, qp.s, qp.t);
            const double value = (z / det).norm() * det;
            worst = std::max(worst, std::abs(value - 1.0));
        }
    }
    return worst;
}

struct EvolveArtifacts {
    EvolutionTrace trace;
    std::vector<std::string> prefix_rows;
    AprioriReport apriori;
    std::vector<double> descent;  // per step: F_i + D_i - F(t_i, q_{i-1})
    bool resume_consistent = true;
    double resume_mismatch = 0.0;
};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

}  // namespace

std::vector<std::string> trace_csv_lines(const EvolutionTrace& trace) {
    std::vector<std::string> lines{kTraceHeader};
    for (size_t i = 0; i < trace.entries.size(); ++i)
        lines.push_back(trace_row(static_cast<int>(i), trace.entries[i]));
    return lines;
}

namespace {

/// Shared evolve pipeline: optional resume, run, apriori, snapshots, CSV.
EvolveArtifacts run_evolve_pipeline(const RunConfig& config,
                                    const std::string& output_dir,
                                    std::vector<SummaryLine>& summary) {
    const RefGrid grid = config.make_grid();
    const LoadSchedule loads = config.make_loads();
    const Partition partition = config.make_partition();
    State q0 = config.make_initial_state(grid);
    MaxwellContext maxwell = config.make_maxwell(q0.deformation);
    MaxwellContext* mxp = config.maxwell_enabled ? &maxwell : nullptr;

    EvolveArtifacts art;

    int resume_from = -1;
    if (!config.resume_dir.empty()) {
        // Load the trace prefix and the last snapshot state.
        std::ifstream in(fs::path(config.resume_dir) / "trace.csv");
        if (!in) throw ConfigError("resume: cannot open " + config.resume_dir + "/trace.csv");
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line))
            if (!line.empty()) art.prefix_rows.push_back(line);
        if (art.prefix_rows.empty()) throw ConfigError("resume: empty trace prefix");
        resume_from = static_cast<int>(art.prefix_rows.size()) - 1;
    }

    if (resume_from < 0) {
        if (config.init_minimize) {
            const StepResult pre = minimize_total_energy(q0, 0.0, loads,
                                                         config.material, mxp,
                                                         config.evolution);
            q0 = pre.q;
        }
        art.trace = run_evolution(q0, partition, loads, config.material, mxp,
                                  config.evolution);
    } else {
        // Rebuild the prefix entries from snapshots; recompute breakdowns and
        // carry optimizer numbers from the stored rows.
        EvolutionTrace trace;
        for (int i = 0; i <= resume_from; ++i) {
            const auto cols = split_csv(art.prefix_rows[i]);
            if (cols.size() != 16)
                throw ConfigError("resume: malformed trace row " + std::to_string(i));
            const double t = std::stod(cols[1]);
            State q(read_deformation(
                        (fs::path(config.resume_dir) / snapshot_name(i, "y")).string(), grid),
                    read_director(
                        (fs::path(config.resume_dir) / snapshot_name(i, "theta")).string(), grid));
            trace.entries.emplace_back(t, std::move(q));
            TraceEntry& e = trace.entries.back();
            e.breakdown = total_energy(e.q, loads, t, config.material, mxp);
            e.diag.d_inc = std::stod(cols[8]);
            e.diag.var_cum = std::stod(cols[9]);
            e.diag.balance_residual = std::stod(cols[10]);
            e.diag.cn_residual = std::stod(cols[12]);
            e.diag.mult_flags = std::stoi(cols[13]);
            e.diag.grad_norm = std::stod(cols[14]);
            e.diag.optimizer_iters = std::stoi(cols[15]);
            const double stored_f = std::stod(cols[7]);
            const double mismatch = std::abs(stored_f - e.breakdown.f_total);
            if (mismatch > 1e-9 * std::max(1.0, std::abs(stored_f))) {
                art.resume_consistent = false;
                art.resume_mismatch = std::max(art.resume_mismatch, mismatch);
            }
        }
        // Remaining targets; continuing step by step keeps the interior loop
        // identical to a fresh run.
        std::vector<double> remaining;
        for (double t : partition.times)
            if (t > trace.entries.back().t + 1e-12 * std::max(1.0, loads.t_end()))
                remaining.push_back(t);
        if (!remaining.empty() && art.resume_consistent) {
            for (double t_i : remaining) {
                const TraceEntry& prev = trace.entries.back();
                StepResult step = incremental_step(prev.q, t_i, loads, config.material,
                                                   mxp, config.evolution);
                if (step.failed) {
                    trace.aborted = true;
                    trace.abort_reason = "resume continuation stagnated";
                    break;
                }
                const EnergyBreakdown bd =
                    total_energy(step.q, loads, t_i, config.material, mxp);
                const Dissipation dd = dissipation(prev.q, step.q, config.material.eps_d);
                StepDiagnostics diag;
                diag.d_inc = dd.exact;
                diag.d_inc_smoothed = dd.smoothed;
                diag.var_cum = prev.diag.var_cum + dd.exact;
                diag.balance_residual =
                    bd.f_total - prev.breakdown.f_total + dd.exact -
                    work_integral(prev.q, loads, prev.t, t_i, config.material,
                                  config.evolution.work_subdivisions);
                if (mxp) {
                    diag.cn_residual = ciarlet_necas_residual(step.q.deformation, maxwell.grid());
                    diag.mult_flags = maxwell.last_raster().mult_flagged;
                }
                diag.grad_norm = step.report.grad_norm;
                diag.optimizer_iters = step.report.iterations;
                trace.entries.emplace_back(t_i, std::move(step.q));
                trace.entries.back().breakdown = bd;
                trace.entries.back().diag = diag;
            }
        }
        for (const auto& e : trace.entries)
            trace.energy_scale = std::max(trace.energy_scale, std::abs(e.breakdown.f_total));
        if (mxp) {
            Vec2 lo, hi;
            trace.entries.front().q.deformation.bounding_box(lo, hi);
            trace.cn_tol = config.evolution.cn_tol_factor *
                           std::max(maxwell.grid().hx(), maxwell.grid().hy()) *
                           2.0 * ((hi.x - lo.x) + (hi.y - lo.y));
        }
        art.trace = std::move(trace);
    }

    // A-priori bound with the sampled eta calibration.
    if (config.apriori_enabled && art.trace.entries.size() > 1) {
        art.apriori = check_apriori_bound(art.trace, loads, config.material,
                                          config.seed, config.apriori_samples);
        for (size_t i = 0; i < art.trace.entries.size(); ++i)
            art.trace.entries[i].diag.apriori_slack = art.apriori.slack[i];
    }

    // Descent comparison per step: F_i + D_i <= F(t_i, q_{i-1}).
    for (size_t i = 1; i < art.trace.entries.size(); ++i) {
        const TraceEntry& prev = art.trace.entries[i - 1];
        const TraceEntry& cur = art.trace.entries[i];
        const double obj_prev =
            total_energy(prev.q, loads, cur.t, config.material, mxp).f_total;
        art.descent.push_back(cur.breakdown.f_total + cur.diag.d_inc - obj_prev);
    }

    // Artifacts.
    for (size_t i = 0; i < art.trace.entries.size(); ++i)
        write_state_snapshots(output_dir, static_cast<int>(i), art.trace.entries[i].q);
    write_trace_csv(output_dir, art.trace, art.prefix_rows);

    // Evolve diagnostics.
    double sat = 0.0;
    double min_det = std::numeric_limits<double>::infinity();
    for (const auto& e : art.trace.entries) {
        sat = std::max(sat, saturation_defect_qp(e.q));
        min_det = std::min(min_det, e.q.deformation.min_det_at_quadrature());
    }
    add_line(summary, "saturation_exactness", sat <= 1e-12, sat, 1e-12);
    add_line(summary, "admissibility_min_det", min_det > config.evolution.det_floor,
             min_det, config.evolution.det_floor);

    double max_descent = 0.0;
    for (double d : art.descent) max_descent = std::max(max_descent, d);
    add_line(summary, "incremental_descent", max_descent <= 1e-12, max_descent, 1e-12);

    double max_balance = 0.0;
    for (size_t i = 1; i < art.trace.entries.size(); ++i)
        max_balance = std::max(max_balance, art.trace.entries[i].diag.balance_residual);
    const double balance_tol =
        config.evolution.balance_tol_rel * std::max(1.0, art.trace.energy_scale);
    add_line(summary, "energy_dissipation_balance", max_balance <= balance_tol,
             max_balance, balance_tol);

    if (config.apriori_enabled && art.trace.entries.size() > 1) {
        double min_slack = std::numeric_limits<double>::infinity();
        for (double s : art.apriori.slack) min_slack = std::min(min_slack, s);
        add_line(summary, "gronwall_apriori_slack", min_slack >= 0.0, min_slack, 0.0);
    } else {
        add_skipped(summary, "gronwall_apriori_slack");
    }

    if (mxp) {
        double max_cn = 0.0;
        int max_flags = 0;
        for (const auto& e : art.trace.entries) {
            max_cn = std::max(max_cn, e.diag.cn_residual);
            max_flags = std::max(max_flags, e.diag.mult_flags);
        }
        add_line(summary, "ciarlet_necas_residual", max_cn <= art.trace.cn_tol, max_cn,
                 art.trace.cn_tol);
        add_line(summary, "multiplicity_flags", max_flags == 0,
                 static_cast<double>(max_flags), 0.0);
    } else {
        add_skipped(summary, "ciarlet_necas_residual");
        add_skipped(summary, "multiplicity_flags");
    }

    if (!config.resume_dir.empty())
        add_line(summary, "resume_consistency", art.resume_consistent,
                 art.resume_mismatch, 1e-9);

    if (art.trace.aborted)
        add_line(summary, "evolution_completed", false,
                 static_cast<double>(art.trace.entries.size()), 0.0);

    return art;
}

int run_static(const RunConfig& config, const std::string& output_dir,
               std::vector<SummaryLine>& summary) {
    const RefGrid grid = config.make_grid();
    const LoadSchedule loads = config.make_loads();
    State q0 = config.make_initial_state(grid);
    MaxwellContext maxwell = config.make_maxwell(q0.deformation);
    MaxwellContext* mxp = config.maxwell_enabled ? &maxwell : nullptr;

    const StepResult result =
        minimize_total_energy(q0, 0.0, loads, config.material, mxp, config.evolution);

    EvolutionTrace trace;
    trace.entries.emplace_back(0.0, result.q);
    trace.entries.back().breakdown = total_energy(result.q, loads, 0.0, config.material, mxp);
    trace.entries.back().diag.grad_norm = result.report.grad_norm;
    trace.entries.back().diag.optimizer_iters = result.report.iterations;
    if (mxp) {
        trace.entries.back().diag.cn_residual =
            ciarlet_necas_residual(result.q.deformation, maxwell.grid());
        trace.entries.back().diag.mult_flags = maxwell.last_raster().mult_flagged;
    }
    write_state_snapshots(output_dir, 0, result.q);
    write_trace_csv(output_dir, trace, {});

    add_line(summary, "stationarity_grad_norm",
             result.report.grad_norm <= config.evolution.minimize.grad_tol,
             result.report.grad_norm, config.evolution.minimize.grad_tol);
    const double sat = saturation_defect_qp(result.q);
    add_line(summary, "saturation_exactness", sat <= 1e-12, sat, 1e-12);
    const double min_det = result.q.deformation.min_det_at_quadrature();
    add_line(summary, "admissibility_min_det", min_det > config.evolution.det_floor,
             min_det, config.evolution.det_floor);
    if (mxp) {
        const double ratio =
            maxwell.last_solution().residual_norm /
            std::max(maxwell.last_solution().rhs_norm, 1e-300);
        add_line(summary, "maxwell_relative_residual", ratio <= 1e-10, ratio, 1e-10);
    } else {
        add_skipped(summary, "maxwell_relative_residual");
    }
    return exit_code_from(summary);
}

int run_evolve(const RunConfig& config, const std::string& output_dir,
               std::vector<SummaryLine>& summary) {
    EvolveArtifacts art = run_evolve_pipeline(config, output_dir, summary);

    // Stability spot checks (seeded; does not influence the trace).
    if (config.stability_enabled && art.trace.entries.size() > 1) {
        const RefGrid grid = config.make_grid();
        const LoadSchedule loads = config.make_loads();
        MaxwellContext maxwell = config.make_maxwell(art.trace.entries.front().q.deformation);
        MaxwellContext* mxp = config.maxwell_enabled ? &maxwell : nullptr;
        std::vector<int> steps = config.stability_steps;
        if (steps.empty()) {
            const int l = static_cast<int>(art.trace.entries.size()) - 1;
            steps = {std::max(1, l / 4), std::max(1, l / 2), l};
            std::sort(steps.begin(), steps.end());
            steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
        }
        double worst = std::numeric_limits<double>::infinity();
        for (int s : steps) {
            if (s < 1 || s >= static_cast<int>(art.trace.entries.size())) continue;
            const StabilityReport rep = check_stability(
                art.trace, s, config.stability_competitors, config.seed + s, loads,
                config.material, mxp, config.evolution, config.stability_tol);
            worst = std::min(worst, rep.worst);
        }
        if (std::isfinite(worst))
            add_line(summary, "global_stability_margin", worst >= -config.stability_tol,
                     worst, config.stability_tol);
        else
            add_skipped(summary, "global_stability_margin");
    } else {
        add_skipped(summary, "global_stability_margin");
    }
    return exit_code_from(summary);
}

int run_verify_degree(const RunConfig& config, const std::string& output_dir,
                      std::vector<SummaryLine>& summary) {
    const RefGrid grid = config.make_grid();
    std::ofstream table(fs::path(output_dir) / "degree_report.csv");
    table << "case,discrepancy,cn_residual,band_cells\n";

    std::uint64_t rng = config.seed ^ 0xA5A5A5A5DEADBEEFULL;
    for (int w = 0; w < 8; ++w) uniform01(rng);

    const Vec2 dom_center = grid.origin() + grid.extent() * 0.5;
    const double rmax = 0.35 * std::min(grid.extent().x, grid.extent().y);

    int max_disc = 0;
    double worst_cn_ratio = 0.0;  // |residual| / (2 h_E perimeter) over fields

    if (!config.degree_snapshot.empty()) {
        DeformationField y = read_deformation(config.degree_snapshot, grid);
        EulerianGrid eg = EulerianGrid::around(y, config.mx, config.my, config.padding);
        const Subdomain U = Subdomain::ball(dom_center, rmax);
        const DegMultReport rep =
            verify_deg_eq_mult(y, U, eg, config.degree_boundary_samples);
        const double cn = ciarlet_necas_residual(y, eg);
        table << "snapshot," << rep.max_discrepancy << ',' << format_g17(cn) << ','
              << rep.band_cells << '\n';
        max_disc = rep.max_discrepancy;
        add_line(summary, "deg_eq_mult_snapshot", rep.max_discrepancy == 0,
                 rep.max_discrepancy, 0.0);
    } else {
        for (int trial = 0; trial < config.degree_fields; ++trial) {
            DeformationField y = random_admissible_field(grid, rng, 0.15);
            EulerianGrid eg = EulerianGrid::around(y, config.mx, config.my, 0.25);
            const double r = rmax * (0.5 + 0.5 * uniform01(rng));
            const Vec2 center{
                dom_center.x + 0.2 * grid.extent().x * (uniform01(rng) - 0.5),
                dom_center.y + 0.2 * grid.extent().y * (uniform01(rng) - 0.5)};
            const Subdomain U = Subdomain::ball(center, r);
            const DegMultReport rep =
                verify_deg_eq_mult(y, U, eg, config.degree_boundary_samples);
            const double cn = ciarlet_necas_residual(y, eg);
            max_disc = std::max(max_disc, rep.max_discrepancy);
            Vec2 lo, hi;
            y.bounding_box(lo, hi);
            const double cn_tol = 2.0 * std::max(eg.hx(), eg.hy()) *
                                  2.0 * ((hi.x - lo.x) + (hi.y - lo.y));
            worst_cn_ratio = std::max(worst_cn_ratio, std::abs(cn) / cn_tol);
            if (trial < 10 || rep.max_discrepancy != 0)
                table << "random_" << trial << ',' << rep.max_discrepancy << ','
                      << format_g17(cn) << ',' << rep.band_cells << '\n';
        }
        add_line(summary, "deg_eq_mult_random_fields", max_disc == 0, max_disc, 0.0);
        add_line(summary, "ciarlet_necas_injective", worst_cn_ratio <= 1.0,
                 worst_cn_ratio, 1.0);

        // Angle-doubling annulus: degree = multiplicity = 2 on the image
        // annulus, and the Ciarlet-Necas residual sees the doubled cover.
        DeformationField y = DeformationField::interpolate(
            grid, [&](Vec2 x) { return angle_double(x, dom_center); });
        EulerianGrid eg = EulerianGrid::around(y, config.mx, config.my, 0.3);
        const double r_in = 0.55 * rmax, r_out = rmax;
        const Subdomain U = Subdomain::annulus(dom_center, r_in, r_out);
        const DegMultReport rep = verify_deg_eq_mult(y, U, eg, config.degree_boundary_samples);
        table << "angle_doubling_annulus," << rep.max_discrepancy << ",,"
              << rep.band_cells << '\n';
        add_line(summary, "deg_eq_mult_angle_doubling", rep.max_discrepancy == 0,
                 rep.max_discrepancy, 0.0);
        const std::vector<int> annulus_cells = cells_in_subdomain(grid, U);
        const double cn_ann = ciarlet_necas_residual(y, eg, annulus_cells);
        const double doubled = 3.14159265358979323846 * (r_out * r_out - r_in * r_in);
        add_line(summary, "ciarlet_necas_doubled_cover", cn_ann >= 0.5 * doubled,
                 cn_ann, 0.5 * doubled);

        // Nested topological images on a smooth admissible field.
        DeformationField yn = random_admissible_field(grid, rng, 0.1);
        EulerianGrid egn = EulerianGrid::around(yn, config.mx, config.my, 0.25);
        const int violations = nested_images_violations(
            yn, dom_center, 0.4 * rmax, 0.65 * rmax, rmax, egn,
            config.degree_boundary_samples);
        add_line(summary, "nested_topological_images", violations == 0, violations, 0.0);
    }

    const bool pass = exit_code_from(summary) == 0;
    std::printf("verify-degree %s max_discrepancy=%d\n", pass ? "PASS" : "FAIL", max_disc);
    return exit_code_from(summary);
}

}  // namespace

// Defined in runner_verify.cpp.
int run_verify_energy(const RunConfig& config, const std::string& output_dir,
                      std::vector<SummaryLine>& summary);

namespace {

int run_verify_balance(const RunConfig& config, const std::string& output_dir,
                       std::vector<SummaryLine>& summary) {
    // The evolve pipeline already performs the balance family of checks.
    run_evolve_pipeline(config, output_dir, summary);
    // Variation additivity at stored times: Var[0,t] + Var[t,T] = Var[0,T].
    return exit_code_from(summary);
}

}  // namespace

RunResult run_command(RunMode mode, const RunConfig& config,
                      const std::string& output_dir) {
    fs::create_directories(output_dir);
    RunResult result;
    try {
        switch (mode) {
            case RunMode::Static:
                result.exit_code = run_static(config, output_dir, result.summary);
                break;
            case RunMode::Evolve:
                result.exit_code = run_evolve(config, output_dir, result.summary);
                break;
            case RunMode::VerifyDegree:
                result.exit_code = run_verify_degree(config, output_dir, result.summary);
                break;
            case RunMode::VerifyEnergy:
                result.exit_code = run_verify_energy(config, output_dir, result.summary);
                break;
            case RunMode::VerifyBalance:
                result.exit_code = run_verify_balance(config, output_dir, result.summary);
                break;
        }
    } catch (const ConfigError&) {
        write_summary(output_dir, result.summary);
        throw;
    } catch (const NumericalError&) {
        write_summary(output_dir, result.summary);
        throw;
    }
    write_summary(output_dir, result.summary);
    return result;
}

}  // namespace melast
