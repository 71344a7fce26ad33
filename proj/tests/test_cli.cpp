#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "export.hpp"
#include "fixtures.hpp"
#include "impact/errors.hpp"
#include "impact/nash_closed_form.hpp"
#include "run.hpp"
#include "scenario.hpp"
#include "sweep.hpp"

using namespace impact;
using namespace impact::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("impact_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const nlohmann::json& doc) {
    const auto p = dir / "config.json";
    std::ofstream(p) << doc.dump(2);
    return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("csv layout") {
    const auto g = make_grid(1.0, 4);
    const auto tr = solve_nash_closed_form(fixture::market(), {{1.0, 1.0, 1.0}}, g);
    const auto text = csv_text(tr);
    CHECK(text.back() == '\n');
    std::stringstream ss(text);
    std::string line;
    int rows = 0;
    std::getline(ss, line);
    CHECK(line == "t,Q_1,q_1");
    while (std::getline(ss, line)) {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 2);
    }
    CHECK(rows == 5);

    const auto three = solve_nash_closed_form(fixture::market(), fixture::agents(), make_grid(1.0, 10));
    CHECK(csv_text(three).rfind("t,Q_1,Q_2,Q_3,q_1,q_2,q_3\n", 0) == 0);
}

TEST_CASE("csv round trip is bitwise") {
    const auto dir = scratch("roundtrip");
    const auto tr = solve_nash_closed_form(fixture::market(), fixture::agents(), make_grid(1.0, 1000));
    export_csv(tr, (dir / "t.csv").string());
    const auto back = read_csv((dir / "t.csv").string());
    CHECK((back.Q.array() == tr.Q.array()).all());
    CHECK((back.q.array() == tr.q.array()).all());
    for (int k = 0; k <= 1000; ++k) CHECK(back.grid.node(k) == tr.grid.node(k));
}

TEST_CASE("config parsing") {
    auto doc = baseline_config();
    doc["market"]["sigma"] = {{"type", "piecewise"}, {"t", {0.0, 0.5}}, {"v", {0.2, 0.4}}};
    const auto s = parse_scenario(doc);
    CHECK(s.n() == 3);
    CHECK(s.market.sigma2_at(0.75) == doctest::Approx(0.16));
    CHECK(s.n_steps == 1000);

    doc["market"]["sigma"] = {{"type", "factor"}, {"kind", "mean_reverting"}, {"level", 0.2}, {"speed", 2.0},
                              {"vol_of_vol", 0.1}, {"floor", 0.05}, {"cap", 0.5}};
    doc["market"]["mu"] = {{"type", "factor"}, {"base", 0.02}, {"loading", 0.1}};
    const auto f = parse_scenario(doc);
    CHECK_FALSE(f.market.is_deterministic());
    const auto fm = mc_factor_model(f);
    CHECK(fm.speed == 2.0);
    CHECK(fm.mu_loading == 0.1);

    CHECK_THROWS_AS(parse_scenario(nlohmann::json{{"market", {{"a", 0.01}}}}), InvalidArgument);
    auto bad = baseline_config();
    bad["market"]["b"] = "x";
    CHECK_THROWS_AS(parse_scenario(bad), InvalidArgument);
}

TEST_CASE("parameter paths") {
    auto doc = baseline_config();
    set_param(doc, "market.mu", 0.07);
    set_param(doc, "agents[*].lambda", 0.3);
    set_param(doc, "agents[2].q0", -1.0);
    const auto s = parse_scenario(doc);
    CHECK(s.market.mu_at(0.5) == 0.07);
    for (const auto& a : s.agents) CHECK(a.lambda == 0.3);
    CHECK(s.agents[2].q0 == -1.0);
    CHECK_THROWS_AS(set_param(doc, "agents[5].alpha", 1.0), InvalidArgument);
    CHECK_THROWS_AS(set_param(doc, "market.nope", 1.0), InvalidArgument);
}

TEST_CASE("run: closed form with verification") {
    const auto dir = scratch("run_cf");
    const auto cfg = write_config(dir, baseline_config());
    RunOptions opt;
    opt.config_path = cfg.string();
    opt.verify = true;
    opt.out_dir = (dir / "out").string();
    CHECK(run(opt) == kSuccess);
    const auto csv = slurp(dir / "out" / "trajectories.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1002);
    const auto dev = nlohmann::json::parse(slurp(dir / "out" / "deviation.json"));
    CHECK(dev.at("passed").get<bool>());
    CHECK(dev.at("agents").size() == 3);
    const auto val = nlohmann::json::parse(slurp(dir / "out" / "validation.json"));
    CHECK(val.at("verdict") == "Unique");
}

TEST_CASE("run: assumption violation exits 1") {
    const auto dir = scratch("run_bad");
    auto doc = baseline_config();
    doc["agents"][0]["alpha"] = 0.001;
    RunOptions opt;
    opt.config_path = write_config(dir, doc).string();
    opt.out_dir = (dir / "out").string();
    CHECK(run(opt) == kSolverError);
    CHECK_FALSE(fs::exists(dir / "out" / "trajectories.csv"));

    opt.config_path = (dir / "missing.json").string();
    CHECK(run(opt) == kSolverError);
}

TEST_CASE("run: solver failure exits 1") {
    const auto dir = scratch("run_fp");
    auto doc = baseline_config();
    doc["fixed_point"] = {{"max_iter", 1}, {"tol", 1e-8}};
    RunOptions opt;
    opt.config_path = write_config(dir, doc).string();
    opt.backend = Backend::FixedPoint;
    opt.out_dir = (dir / "out").string();
    CHECK(run(opt) == kSolverError);
}

TEST_CASE("run: failed verification exits 2") {
    // five Euler steps are far too coarse for the 2% agreement check
    const auto dir = scratch("run_mc_coarse");
    auto doc = baseline_config();
    doc["mc"] = {{"n_paths", 1000}, {"n_steps", 5}};
    RunOptions opt;
    opt.config_path = write_config(dir, doc).string();
    opt.backend = Backend::MonteCarlo;
    opt.verify = true;
    opt.out_dir = (dir / "out").string();
    CHECK(run(opt) == kVerificationFailed);
    const auto d = nlohmann::json::parse(slurp(dir / "out" / "mc_diagnostics.json"));
    CHECK_FALSE(d.at("verification_passed").get<bool>());
}

TEST_CASE("run: Monte Carlo diagnostics and byte-identical reruns") {
    const auto dir = scratch("run_mc");
    auto doc = baseline_config();
    doc["mc"] = {{"n_paths", 4000}, {"n_steps", 25}};
    RunOptions opt;
    opt.config_path = write_config(dir, doc).string();
    opt.backend = Backend::MonteCarlo;
    opt.verify = true;
    opt.seed = 7;
    opt.out_dir = (dir / "a").string();
    CHECK(run(opt) == kSuccess);
    opt.out_dir = (dir / "b").string();
    CHECK(run(opt) == kSuccess);
    for (const char* f : {"trajectories.csv", "mc_diagnostics.json", "validation.json"})
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    const auto d = nlohmann::json::parse(slurp(dir / "a" / "mc_diagnostics.json"));
    CHECK(d.at("seed") == 7);
    CHECK(d.at("comparison").at("reference") == "closed_form");
    CHECK(d.at("verification_passed").get<bool>());
}

TEST_CASE("presets") {
    const auto names = preset_names();
    CHECK(names.size() == 10);
    for (const auto& n : names) {
        const auto p = preset(n);
        REQUIRE(p.has_value());
        CHECK_FALSE(p->values.empty());
        CHECK(p->values_source.find("chosen by this tool") != std::string::npos);
        auto doc = p->base;
        CHECK_NOTHROW(set_param(doc, p->parameter, p->values.front()));
    }
    CHECK_FALSE(preset("sweep-fig11").has_value());
}

TEST_CASE("sweep outputs") {
    const auto dir = scratch("sweep");
    auto spec = *preset("sweep-fig1");
    const auto res = run_sweep(spec, 200);
    write_sweep(res, dir.string());
    CHECK(res.all_passed());
    for (std::size_t v = 0; v < spec.values.size(); ++v)
        CHECK(fs::exists(dir / ("sweep-fig1_" + std::to_string(v) + ".csv")));
    const auto lng = slurp(dir / "sweep-fig1_long.csv");
    CHECK(lng.rfind("value,t,agent,Q,q\n", 0) == 0);
    CHECK(std::count(lng.begin(), lng.end(), '\n') == 1 + 4 * 3 * 201);
    const auto js = nlohmann::json::parse(slurp(dir / "sweep-fig1_assertions.json"));
    CHECK(js.at("all_passed").get<bool>());
    CHECK(js.at("values_source").get<std::string>().find("chosen") != std::string::npos);

    const auto again = run_sweep(spec, 200);
    CHECK(long_csv_text(again) == lng);
}

TEST_CASE("assertion evaluation detects violations") {
    // reversed direction must fail
    auto spec = *preset("sweep-fig2");
    for (auto& a : spec.assertions) a.direction = +1;
    const auto res = run_sweep(spec, 100);
    CHECK_FALSE(res.all_passed());
}

TEST_CASE("sweep spec file") {
    const auto dir = scratch("specfile");
    write_config(dir, baseline_config());
    nlohmann::json spec{{"name", "custom"},
                        {"base", "config.json"},
                        {"parameter", "agents[0].q0"},
                        {"values", {0.5, 1.0, 2.0}},
                        {"backend", "riccati"},
                        {"assertions", {{{"kind", "monotone"}, {"agents", {1}}, {"t", 0.5}, {"direction", 1}}}}};
    std::ofstream(dir / "spec.json") << spec.dump();
    const auto s = resolve_sweep((dir / "spec.json").string());
    CHECK(s.name == "custom");
    CHECK(s.backend == "riccati");
    const auto res = run_sweep(s, 100);
    CHECK(res.all_passed());
    CHECK_THROWS_AS(resolve_sweep("no-such-preset"), InvalidArgument);
}

}
