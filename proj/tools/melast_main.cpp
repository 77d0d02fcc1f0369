// Command-line front end: one run per invocation.
//   melast --mode evolve --config run.cfg --output-dir out/
// Exit codes: 0 pass, 1 diagnostic failure, 2 configuration error,
// 3 numerical failure.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "melast/errors.hpp"
#include "melast/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Desk-scale 2D magnetoelastic quasistatic simulator"};

    std::string mode_name = "static";
    std::string config_path;
    std::string output_dir = "out";
    std::string resume_dir;
    double seed_override = -1.0;
    double maxwell_padding = -1.0;
    double maxwell_tol = -1.0;
    int maxwell_maxiter = -1;

    app.add_option("--mode", mode_name,
                   "static | evolve | verify-degree | verify-energy | verify-balance");
    app.add_option("--config", config_path, "run configuration file (key = value)");
    app.add_option("--output-dir", output_dir, "artifact directory");
    app.add_option("--resume", resume_dir,
                   "directory with a trace prefix + snapshots to continue from");
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--maxwell-padding", maxwell_padding,
                   "override the Eulerian box padding factor");
    app.add_option("--maxwell-tol", maxwell_tol, "override the stray-field CG tolerance");
    app.add_option("--maxwell-maxiter", maxwell_maxiter,
                   "override the stray-field CG iteration cap");

    CLI11_PARSE(app, argc, argv);

    try {
        melast::RunConfig config =
            config_path.empty() ? melast::parse_config("")
                                : melast::parse_config_file(config_path);
        if (seed_override >= 0.0)
            config.seed = static_cast<std::uint64_t>(seed_override);
        if (maxwell_padding > 0.0) config.padding = maxwell_padding;
        if (maxwell_tol > 0.0) config.maxwell.tol = maxwell_tol;
        if (maxwell_maxiter > 0) config.maxwell.max_iter = maxwell_maxiter;
        if (!resume_dir.empty()) config.resume_dir = resume_dir;

        const melast::RunMode mode = melast::mode_from_string(mode_name);
        const melast::RunResult result = melast::run_command(mode, config, output_dir);
        for (const auto& line : result.summary)
            std::printf("%s %s %.17g %.17g\n", line.name.c_str(), line.status.c_str(),
                        line.residual, line.tolerance);
        return result.exit_code;
    } catch (const melast::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const melast::NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
