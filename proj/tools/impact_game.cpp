#include <iostream>

#include <CLI11.hpp>

#include "impact/errors.hpp"
#include "run.hpp"
#include "sweep.hpp"

int main(int argc, char** argv) {
    using namespace impact::cli;

    CLI::App app{"Open-loop Nash equilibria of the n-trader market impact game"};
    std::string config, backend = "closed_form", sweep, out = ".";
    bool verify = false;
    std::uint64_t seed = 0;
    int steps = 0;
    app.add_option("--config", config, "Scenario JSON file")->check(CLI::ExistingFile);
    auto* backend_opt = app.add_option("--backend", backend, "Solver backend")
        ->check(CLI::IsMember({"closed_form", "riccati", "fixed_point", "mc"}));
    app.add_flag("--verify", verify, "Run the unilateral-deviation test (MC: compare with a deterministic backend)");
    app.add_option("--sweep", sweep, "Preset sweep-fig1..sweep-fig10 or a sweep spec JSON file");
    app.add_option("--out", out, "Output directory");
    auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed");
    auto* steps_opt = app.add_option("--steps", steps, "Number of time steps")->check(CLI::Range(2, 10000000));
    CLI11_PARSE(app, argc, argv);

    if (sweep.empty() && config.empty()) {
        std::cerr << "either --config or --sweep is required\n" << app.help();
        return kSolverError;
    }
    if (!sweep.empty()) {
        try {
            auto spec = resolve_sweep(sweep);
            if (backend_opt->count()) spec.backend = backend;
            const auto result = run_sweep(spec, steps_opt->count() ? std::optional<int>(steps) : std::nullopt);
            write_sweep(result, out);
            for (const auto& a : result.assertions)
                std::cout << (a.passed ? "PASS " : "FAIL ") << a.assertion.statement << " | " << a.detail << '\n';
            return result.all_passed() ? kSuccess : kVerificationFailed;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kSolverError;
        }
    }

    RunOptions opt;
    opt.config_path = config;
    opt.backend = parse_backend(backend);
    opt.verify = verify;
    opt.out_dir = out;
    if (seed_opt->count()) opt.seed = seed;
    if (steps_opt->count()) opt.steps = steps;
    return run(opt);
}
