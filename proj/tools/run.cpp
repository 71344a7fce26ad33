#include "run.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>

#include "export.hpp"
#include "impact/equilibrium_check.hpp"
#include "impact/errors.hpp"
#include "impact/nash_closed_form.hpp"
#include "impact/nash_riccati.hpp"

namespace impact::cli {

using nlohmann::json;

namespace {

constexpr double kMcCompareTol = 2e-2;
constexpr double kMcResidualTol = 1e-2;

double rel_sup(const Matrix& x, const Matrix& ref) {
    const double scale = std::max(ref.cwiseAbs().maxCoeff(), 1e-12);
    return (x - ref).cwiseAbs().maxCoeff() / scale;
}

json mc_diagnostics(const McFbsdeSolution& sol, const Scenario& s, const TrajectorySet& mean, bool* ok) {
    json d;
    d["n_paths"] = sol.n_paths();
    d["n_steps"] = sol.grid.n_steps();
    d["seed"] = s.mc.seed;
    d["basis_degree"] = s.mc.basis_degree;
    d["picard_iterations"] = sol.picard_iterations;
    d["picard_final_change"] = sol.final_residual;
    d["picard_history"] = sol.history;

    bool pass = true;
    json res = json::array();
    const auto stats = fbsde_residual(sol);
    for (std::size_t i = 0; i < stats.size(); ++i) {
        auto j = to_json(stats[i]);
        j["agent"] = i + 1;
        res.push_back(j);
        pass = pass && stats[i].p95_abs <= kMcResidualTol;
    }
    d["fbsde_residual"] = res;
    d["residual_p95_tolerance"] = kMcResidualTol;

    if (s.market.is_deterministic()) {
        const TimeGrid& g = sol.grid;
        const TrajectorySet ref = s.market.is_constant() ? solve_nash_closed_form(s.market, s.agents, g)
                                                         : solve_nash_riccati(s.market, s.agents, g);
        json agents = json::array();
        for (int i = 0; i < s.n(); ++i) {
            const double eQ = rel_sup(mean.Q.row(i), ref.Q.row(i));
            const double eq = rel_sup(mean.q.row(i), ref.q.row(i));
            agents.push_back({{"agent", i + 1}, {"rel_sup_error_Q", eQ}, {"rel_sup_error_q", eq}});
            pass = pass && eQ <= kMcCompareTol && eq <= kMcCompareTol;
        }
        d["comparison"] = {{"reference", ref.provenance}, {"tolerance", kMcCompareTol}, {"agents", agents}};
    } else {
        d["comparison"] = nullptr;
    }
    d["verification_passed"] = pass;
    if (ok) *ok = pass;
    return d;
}

}  // namespace

Backend parse_backend(const std::string& name) {
    if (name == "closed_form") return Backend::ClosedForm;
    if (name == "riccati") return Backend::Riccati;
    if (name == "fixed_point") return Backend::FixedPoint;
    if (name == "mc") return Backend::MonteCarlo;
    throw InvalidArgument("unknown backend '" + name + "'");
}

const char* to_string(Backend b) {
    switch (b) {
        case Backend::ClosedForm: return "closed_form";
        case Backend::Riccati: return "riccati";
        case Backend::FixedPoint: return "fixed_point";
        case Backend::MonteCarlo: return "mc";
    }
    return "?";
}

BackendOutput solve_backend(const Scenario& s, Backend backend) {
    BackendOutput out;
    switch (backend) {
        case Backend::ClosedForm: {
            XiSolution xi;
            out.trajectories = solve_nash_closed_form(s.market, s.agents, make_grid(s.market.T, s.n_steps), &xi);
            out.diagnostics = {{"condition_estimate", xi.condition_estimate},
                               {"initial_residual", xi.initial_residual},
                               {"terminal_residual", xi.terminal_residual}};
            break;
        }
        case Backend::Riccati:
            out.trajectories = solve_nash_riccati(s.market, s.agents, make_grid(s.market.T, s.n_steps));
            out.diagnostics = json::object();
            break;
        case Backend::FixedPoint: {
            auto fp = fixed_point_iterate(s.market, s.agents, make_grid(s.market.T, s.n_steps), s.fp_max_iter,
                                          s.fp_tol);
            out.trajectories = std::move(fp.trajectories);
            out.diagnostics = {{"iterations", fp.iterations}, {"residual", fp.residual}, {"history", fp.history}};
            break;
        }
        case Backend::MonteCarlo: {
            const auto sol =
                picard_solve(s.market, s.agents, mc_factor_model(s), make_grid(s.market.T, s.mc_steps), s.mc);
            out.trajectories = sol.mean_trajectories();
            out.diagnostics = mc_diagnostics(sol, s, out.trajectories, nullptr);
            break;
        }
    }
    return out;
}

int run(const RunOptions& opt) {
    Scenario s;
    try {
        s = load_scenario(opt.config_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolverError;
    }
    if (opt.seed) s.mc.seed = *opt.seed;
    if (opt.steps) (opt.backend == Backend::MonteCarlo ? s.mc_steps : s.n_steps) = *opt.steps;

    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    const auto path = [&](const char* f) { return (std::filesystem::path(opt.out_dir) / f).string(); };

    try {
        const auto rep = validate(s.market, s.agents, s.n());
        write_json(to_json(rep), path("validation.json"));
        if (rep.verdict == Verdict::AssumptionViolated) {
            std::cerr << "AssumptionViolated:";
            for (const auto& note : rep.notes) std::cerr << ' ' << note << ';';
            std::cerr << '\n';
            return kSolverError;
        }

        auto result = solve_backend(s, opt.backend);
        export_csv(result.trajectories, path("trajectories.csv"));

        bool passed = true;
        if (opt.backend == Backend::MonteCarlo) {
            passed = result.diagnostics.at("verification_passed").get<bool>();
            write_json(result.diagnostics, path("mc_diagnostics.json"));
        } else if (opt.verify) {
            const auto dev = deviation_test(result.trajectories, s.market, s.agents, s.epsilons, s.basis_size);
            auto doc = to_json(dev);
            doc["backend"] = to_string(opt.backend);
            doc["backend_diagnostics"] = result.diagnostics;
            write_json(doc, path("deviation.json"));
            passed = dev.passed;
        }
        if (opt.verify && !passed) {
            std::cerr << "verification failed\n";
            return kVerificationFailed;
        }
        return kSuccess;
    } catch (const AssumptionViolated& e) {
        std::cerr << "AssumptionViolated: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
    }
    return kSolverError;
}

}  // namespace impact::cli
