#include "sweep.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "export.hpp"
#include "impact/errors.hpp"
#include "impact/parallel.hpp"
#include "run.hpp"
#include "scenario.hpp"

namespace impact::cli {

using nlohmann::json;

namespace {

constexpr double kSignTol = 1e-12;

using K = Assertion::Kind;

Assertion monotone(std::string statement, double t, int direction, std::vector<int> agents = {0}) {
    Assertion a;
    a.kind = K::Monotone;
    a.statement = std::move(statement);
    a.t = t;
    a.direction = direction;
    a.agents = std::move(agents);
    return a;
}

Assertion single(K kind, std::string statement, std::string quantity, std::vector<int> agents, int value_index,
                 double t = 0.0, int sign = 0) {
    Assertion a;
    a.kind = kind;
    a.statement = std::move(statement);
    a.quantity = std::move(quantity);
    a.agents = std::move(agents);
    a.value_index = value_index;
    a.t = t;
    a.direction = sign;
    return a;
}

SweepSpec make_preset(const std::string& name, const std::string& parameter, std::vector<double> values,
                      std::vector<Assertion> assertions, json base = baseline_config()) {
    SweepSpec s;
    s.name = name;
    s.base = std::move(base);
    s.parameter = parameter;
    s.values = std::move(values);
    s.values_source = "preset: value grid chosen by this tool around the baseline";
    s.assertions = std::move(assertions);
    return s;
}

std::map<std::string, SweepSpec> build_presets() {
    std::map<std::string, SweepSpec> m;
    const std::string drift = "As the drift increases, the agents tend to liquidate slowly or even start buying at the beginning.";
    m["sweep-fig1"] = make_preset("sweep-fig1", "market.mu", {0.0, 0.02, 0.05, 0.1},
                                  {monotone(drift, 0.5, +1), monotone(drift, 0.1, +1)});

    const std::string vol = "As the volatility increases, the agents tend to liquidate quickly at the beginning to reduce the liquidation risk.";
    m["sweep-fig2"] = make_preset("sweep-fig2", "market.sigma", {0.1, 0.2, 0.4, 0.8},
                                  {monotone(vol, 0.5, -1), monotone(vol, 0.1, -1)});

    const std::string impact = "As the permanent market impact increases, the agents tend to liquidate quickly at the beginning.";
    const std::string shortsell = "For high permanent market impact, the agent with smaller initial inventory tend to short sell and reliquidate.";
    m["sweep-fig3"] = make_preset("sweep-fig3", "market.a", {0.005, 0.01, 0.02, 0.05, 0.1},
                                  {monotone(impact, 0.1, -1), monotone(impact, 0.5, -1),
                                   single(K::DipsBelow, shortsell, "Q", {3}, -1),
                                   single(K::ChangesSign, shortsell, "q", {3}, -1)});

    const std::string slip = "For small slippage, the agent with smaller initial inventory tend to vary between liquidation and purchasing.";
    m["sweep-fig4"] = make_preset("sweep-fig4", "market.b", {0.001, 0.0025, 0.005, 0.01, 0.02},
                                  {single(K::ChangesSign, slip, "q", {3}, 0)});

    // no qualitative statements accompany these figures
    m["sweep-fig5"] = make_preset("sweep-fig5", "agents[*].alpha", {0.1, 0.25, 0.5, 1.0, 2.0}, {});
    m["sweep-fig6"] = make_preset("sweep-fig6", "agents[0].alpha", {0.1, 0.25, 0.5, 1.0, 2.0}, {});
    m["sweep-fig7"] = make_preset("sweep-fig7", "agents[*].lambda", {0.1, 0.25, 0.5, 1.0, 2.0}, {});
    m["sweep-fig8"] = make_preset("sweep-fig8", "agents[0].lambda", {0.1, 0.25, 0.5, 1.0, 2.0}, {});
    m["sweep-fig9"] = make_preset("sweep-fig9", "agents[0].q0", {0.1, 0.5, 1.0, 2.0, 5.0}, {});

    json arb = baseline_config();
    arb["agents"][1]["q0"] = 0.0;
    arb["agents"][2]["q0"] = 0.0;
    const std::string small = "When the initial position of the first agent is small, arbitrageurs tend to first buy and then liquidate.";
    const std::string high = "When the initial position of the first agent is high, arbitrageurs tend to first short sell and then buy.";
    m["sweep-fig10"] = make_preset("sweep-fig10", "agents[0].q0", {0.1, 1.0, 5.0},
                                   {single(K::SignAt, small, "q", {2, 3}, 0, 0.0, +1),
                                    single(K::StaysAbove, small, "Q", {2, 3}, 0),
                                    single(K::ChangesSign, small, "q", {2, 3}, 0),
                                    single(K::SignAt, high, "q", {2, 3}, -1, 0.0, -1),
                                    single(K::DipsBelow, high, "Q", {2, 3}, -1),
                                    single(K::ChangesSign, high, "q", {2, 3}, -1)},
                                   arb);
    return m;
}

const std::map<std::string, SweepSpec>& presets() {
    static const auto m = build_presets();
    return m;
}

const char* kind_name(K k) {
    switch (k) {
        case K::Monotone: return "monotone";
        case K::SignAt: return "sign_at";
        case K::DipsBelow: return "dips_below_zero";
        case K::StaysAbove: return "stays_above_zero";
        case K::ChangesSign: return "changes_sign";
    }
    return "?";
}

K parse_kind(const std::string& s) {
    for (K k : {K::Monotone, K::SignAt, K::DipsBelow, K::StaysAbove, K::ChangesSign})
        if (s == kind_name(k)) return k;
    throw InvalidArgument("unknown assertion kind '" + s + "'");
}

Assertion parse_assertion(const json& j) {
    Assertion a;
    a.kind = parse_kind(j.at("kind").get<std::string>());
    a.statement = j.value("statement", std::string());
    a.quantity = j.value("quantity", std::string("Q"));
    if (a.quantity != "Q" && a.quantity != "q") throw InvalidArgument("assertion quantity must be Q or q");
    if (j.contains("agents")) a.agents = j.at("agents").get<std::vector<int>>();
    a.t = j.value("t", a.kind == K::SignAt ? 0.0 : 0.5);
    a.value_index = j.value("value_index", -1);
    a.direction = j.value("direction", j.value("sign", a.direction));
    return a;
}

json assertion_to_json(const Assertion& a) {
    json j{{"kind", kind_name(a.kind)}, {"statement", a.statement}, {"quantity", a.quantity}, {"agents", a.agents}};
    if (a.kind == K::Monotone) {
        j["t_fraction"] = a.t;
        j["direction"] = a.direction > 0 ? "nondecreasing" : "nonincreasing";
    } else {
        j["value_index"] = a.value_index;
        if (a.kind == K::SignAt) {
            j["t_fraction"] = a.t;
            j["sign"] = a.direction;
        }
    }
    return j;
}

const Matrix& pick(const TrajectorySet& tr, const std::string& quantity) { return quantity == "q" ? tr.q : tr.Q; }

int node_at(const TimeGrid& g, double frac) {
    return static_cast<int>(std::lround(frac * g.n_steps()));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (int k = 1; k <= 10; ++k) out.push_back("sweep-fig" + std::to_string(k));
    return out;
}

std::optional<SweepSpec> preset(const std::string& name) {
    const auto it = presets().find(name);
    if (it == presets().end()) return std::nullopt;
    return it->second;
}

SweepSpec load_sweep_spec(const std::string& path) {
    const json j = read_json_file(path);
    try {
        SweepSpec s;
        s.name = j.value("name", std::filesystem::path(path).stem().string());
        if (!j.contains("base")) throw InvalidArgument("sweep spec needs 'base'");
        if (j.at("base").is_string()) {
            auto base_path = std::filesystem::path(j.at("base").get<std::string>());
            if (base_path.is_relative()) base_path = std::filesystem::path(path).parent_path() / base_path;
            s.base = read_json_file(base_path.string());
        } else {
            s.base = j.at("base");
        }
        s.parameter = j.at("parameter").get<std::string>();
        s.values = j.at("values").get<std::vector<double>>();
        s.backend = j.value("backend", s.backend);
        if (j.contains("assertions"))
            for (const auto& a : j.at("assertions")) s.assertions.push_back(parse_assertion(a));
        if (s.values.empty()) throw InvalidArgument("sweep spec: empty value list");
        json probe = s.base;
        set_param(probe, s.parameter, s.values.front());
        parse_backend(s.backend);
        return s;
    } catch (const json::exception& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
}

SweepSpec resolve_sweep(const std::string& arg) {
    if (auto p = preset(arg)) return *p;
    if (std::filesystem::exists(arg)) return load_sweep_spec(arg);
    throw InvalidArgument("unknown sweep preset or missing spec file: " + arg);
}

bool SweepResult::all_passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const AssertionResult& r) { return r.passed; });
}

std::vector<AssertionResult> evaluate(const std::vector<Assertion>& assertions, const std::vector<double>& values,
                                      const std::vector<TrajectorySet>& runs) {
    std::vector<AssertionResult> out;
    const int nv = static_cast<int>(runs.size());
    for (const auto& a : assertions) {
        AssertionResult r{a, true, ""};
        if (nv == 0) {
            r.passed = false;
            r.detail = "no runs";
            out.push_back(r);
            continue;
        }
        const int n = runs.front().n_agents();
        std::vector<int> agents;
        for (int ag : a.agents) {
            if (ag == 0) {
                for (int i = 1; i <= n; ++i) agents.push_back(i);
            } else if (ag >= 1 && ag <= n) {
                agents.push_back(ag);
            } else {
                r.passed = false;
                r.detail = "agent index out of range";
            }
        }
        const int vi = a.value_index < 0 ? nv + a.value_index : a.value_index;
        if (a.kind != K::Monotone && (vi < 0 || vi >= nv)) {
            r.passed = false;
            r.detail = "value index out of range";
        }
        std::ostringstream det;
        for (int ag : r.passed ? agents : std::vector<int>{}) {
            const int i = ag - 1;
            det << a.quantity << '_' << ag;
            if (a.kind == K::Monotone) {
                det << "(" << fmt(a.t) << "T):";
                double prev = 0.0;
                for (int v = 0; v < nv; ++v) {
                    const double x = pick(runs[static_cast<std::size_t>(v)], a.quantity)(
                        i, node_at(runs[static_cast<std::size_t>(v)].grid, a.t));
                    det << ' ' << fmt(x);
                    if (v > 0 && (a.direction > 0 ? x < prev : x > prev)) r.passed = false;
                    prev = x;
                }
            } else {
                const auto& tr = runs[static_cast<std::size_t>(vi)];
                const Vector row = pick(tr, a.quantity).row(i).transpose();
                det << " at value " << fmt(values[static_cast<std::size_t>(vi)]) << ": ";
                switch (a.kind) {
                    case K::SignAt: {
                        const double x = row(node_at(tr.grid, a.t));
                        det << "value " << fmt(x);
                        r.passed = r.passed && (a.direction > 0 ? x > kSignTol : x < -kSignTol);
                        break;
                    }
                    case K::DipsBelow: {
                        det << "min " << fmt(row.minCoeff());
                        r.passed = r.passed && row.minCoeff() < -kSignTol;
                        break;
                    }
                    case K::StaysAbove: {
                        const double mn = row.tail(row.size() - 1).minCoeff();
                        det << "min over (0,T] " << fmt(mn);
                        r.passed = r.passed && mn > kSignTol;
                        break;
                    }
                    case K::ChangesSign: {
                        det << "min " << fmt(row.minCoeff()) << " max " << fmt(row.maxCoeff());
                        r.passed = r.passed && row.minCoeff() < -kSignTol && row.maxCoeff() > kSignTol;
                        break;
                    }
                    case K::Monotone: break;
                }
            }
            det << "; ";
        }
        if (r.detail.empty()) r.detail = det.str();
        out.push_back(r);
    }
    return out;
}

SweepResult run_sweep(const SweepSpec& spec, std::optional<int> steps) {
    if (spec.values.empty()) throw InvalidArgument("sweep: empty value list");
    const Backend backend = parse_backend(spec.backend);
    std::vector<Scenario> scenarios;
    for (double v : spec.values) {
        json doc = spec.base;
        set_param(doc, spec.parameter, v);
        Scenario s = parse_scenario(doc);
        if (steps) (backend == Backend::MonteCarlo ? s.mc_steps : s.n_steps) = *steps;
        scenarios.push_back(std::move(s));
    }
    SweepResult out;
    out.spec = spec;
    out.runs.resize(scenarios.size());
    parallel_for(static_cast<int>(scenarios.size()), [&](int k) {
        const auto& s = scenarios[static_cast<std::size_t>(k)];
        const auto rep = validate(s.market, s.agents, s.n());
        if (rep.verdict == Verdict::AssumptionViolated)
            throw AssumptionViolated("sweep value " + fmt(spec.values[static_cast<std::size_t>(k)]) +
                                     " violates the model assumptions");
        out.runs[static_cast<std::size_t>(k)] = solve_backend(s, backend).trajectories;
    });
    out.assertions = evaluate(spec.assertions, spec.values, out.runs);
    return out;
}

std::string long_csv_text(const SweepResult& r) {
    std::string out = "value,t,agent,Q,q\n";
    char buf[128];
    for (std::size_t v = 0; v < r.runs.size(); ++v) {
        const auto& tr = r.runs[v];
        for (int i = 0; i < tr.n_agents(); ++i)
            for (int k = 0; k < tr.grid.n_nodes(); ++k) {
                const int len = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d,%.17g,%.17g\n", r.spec.values[v],
                                              tr.grid.node(k), i + 1, tr.Q(i, k), tr.q(i, k));
                out.append(buf, static_cast<std::size_t>(len));
            }
    }
    return out;
}

json assertions_json(const SweepResult& r) {
    json items = json::array();
    for (const auto& a : r.assertions) {
        auto j = assertion_to_json(a.assertion);
        j["passed"] = a.passed;
        j["detail"] = a.detail;
        items.push_back(j);
    }
    json files = json::array();
    for (std::size_t v = 0; v < r.runs.size(); ++v) files.push_back(r.spec.name + "_" + std::to_string(v) + ".csv");
    return {{"sweep", r.spec.name},
            {"parameter", r.spec.parameter},
            {"values", r.spec.values},
            {"values_source", r.spec.values_source},
            {"backend", r.spec.backend},
            {"base", r.spec.base},
            {"value_files", files},
            {"long_file", r.spec.name + "_long.csv"},
            {"assertions", items},
            {"all_passed", r.all_passed()}};
}

void write_sweep(const SweepResult& r, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    for (std::size_t v = 0; v < r.runs.size(); ++v)
        export_csv(r.runs[v], (dir / (r.spec.name + "_" + std::to_string(v) + ".csv")).string());
    {
        std::ofstream os(dir / (r.spec.name + "_long.csv"), std::ios::binary);
        if (!os) throw Error("cannot write long CSV in " + out_dir);
        os << long_csv_text(r);
    }
    write_json(assertions_json(r), (dir / (r.spec.name + "_assertions.json")).string());
}

}  // namespace impact::cli
