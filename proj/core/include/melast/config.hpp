#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "melast/evolution.hpp"
#include "melast/expr.hpp"
#include "melast/loads.hpp"
#include "melast/material.hpp"
#include "melast/maxwell.hpp"
#include "melast/ref_grid.hpp"

namespace melast {

/// Fully validated run configuration. Built by parse_config from a key-value
/// document; unknown keys and invalid values are hard errors.
struct RunConfig {
    // grid
    int nx = 32, ny = 32;
    Vec2 origin{0.0, 0.0};
    Vec2 extent{1.0, 1.0};
    QuadratureRule quadrature = QuadratureRule::Gauss2x2;

    MaterialParams material;

    // Eulerian grid and Maxwell solver
    int mx = 64, my = 64;
    double padding = 1.0;
    MaxwellOptions maxwell;
    bool maxwell_enabled = true;

    // loads (component expressions in x1, x2, t)
    std::string f_x = "0", f_y = "0";
    std::string g_x = "0", g_y = "0";
    std::string h_x = "0", h_y = "0";
    std::string d_x = "x1", d_y = "x2";
    std::string sigma_sides = "none";
    std::string gamma_sides = "all";
    double t_end = 1.0;
    int schedule_samples = 21;

    // partition
    int partition_steps = 20;
    std::vector<double> partition_times;  // overrides steps when nonempty

    // initial state
    std::string init_theta = "0";
    std::string init_y_x = "x1", init_y_y = "x2";
    bool init_minimize = false;

    EvolutionOptions evolution;

    // diagnostics
    bool stability_enabled = true;
    int stability_competitors = 50;
    double stability_tol = 1e-8;
    std::vector<int> stability_steps;  // empty = auto (3 spread-out steps)
    bool apriori_enabled = true;
    int apriori_samples = 200;

    std::uint64_t seed = 20250811;

    // verify-degree inputs
    std::string degree_snapshot;  // optional deformation snapshot to check
    int degree_fields = 100;
    int degree_boundary_samples = 512;

    // resume (evolve mode): directory with a trace prefix + snapshots
    std::string resume_dir;

    RefGrid make_grid() const;
    LoadSchedule make_loads() const;
    Partition make_partition() const;
    State make_initial_state(const RefGrid& grid) const;
    MaxwellContext make_maxwell(const DeformationField& y0) const;
};

/// Parses the key = value document (# comments, blank lines allowed).
/// Unknown keys are hard errors; all validation violations are reported
/// together.
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

}  // namespace melast
