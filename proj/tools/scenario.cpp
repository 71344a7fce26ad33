#include "scenario.hpp"

#include <fstream>
#include <regex>

#include "impact/errors.hpp"

namespace impact::cli {

using nlohmann::json;

namespace {

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw InvalidArgument(std::string("'") + key + "' must be a number");
    return j.at(key).get<double>();
}

CoefficientSpec parse_coefficient(const json& j, const char* name, bool is_vol) {
    if (j.is_number()) return CoefficientSpec(j.get<double>());
    if (!j.is_object() || !j.contains("type")) throw InvalidArgument(std::string(name) + ": expected number or object");
    const auto type = j.at("type").get<std::string>();
    if (type == "constant") return CoefficientSpec(num(j, "value", 0.0));
    if (type == "piecewise") {
        if (!j.contains("t") || !j.contains("v")) throw InvalidArgument(std::string(name) + ": piecewise needs t and v");
        return CoefficientSpec::piecewise(j.at("t").get<std::vector<double>>(), j.at("v").get<std::vector<double>>());
    }
    if (type == "factor") {
        if (!is_vol) return CoefficientSpec::factor_drift(num(j, "base", 0.0), num(j, "loading", 0.0));
        FactorModel m;
        const auto kind = j.value("kind", std::string("mean_reverting"));
        if (kind == "constant") {
            m = FactorModel::constant_vol(num(j, "level", 0.2));
        } else if (kind == "mean_reverting") {
            m.kind = FactorModel::Kind::MeanRevertingVol;
            m.level = num(j, "level", 0.2);
            m.speed = num(j, "speed", 1.0);
            m.vol_of_vol = num(j, "vol_of_vol", 0.0);
            m.floor = num(j, "floor", 0.0);
            m.cap = num(j, "cap", std::numeric_limits<double>::infinity());
            m.x0 = num(j, "x0", m.level);
        } else {
            throw InvalidArgument(std::string(name) + ": unknown factor kind '" + kind + "'");
        }
        return CoefficientSpec::factor_vol(m);
    }
    throw InvalidArgument(std::string(name) + ": unknown type '" + type + "'");
}

}  // namespace

json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidArgument("cannot read " + path);
    try {
        return json::parse(is);
    } catch (const json::exception& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
}

Scenario parse_scenario(const json& doc) {
    try {
        Scenario s;
        if (!doc.contains("market") || !doc.contains("agents")) throw InvalidArgument("config needs market and agents");
        const auto& m = doc.at("market");
        s.market.a = num(m, "a", 0.01);
        s.market.b = num(m, "b", 0.01);
        s.market.T = num(m, "T", 1.0);
        s.market.S0 = num(m, "S0", num(doc, "S0", 0.0));
        if (m.contains("mu")) s.market.drift = parse_coefficient(m.at("mu"), "market.mu", false);
        if (m.contains("sigma")) s.market.vol = parse_coefficient(m.at("sigma"), "market.sigma", true);
        s.market.check();

        for (const auto& a : doc.at("agents")) {
            AgentParams ag;
            ag.alpha = num(a, "alpha", 0.0);
            ag.lambda = num(a, "lambda", 0.0);
            ag.q0 = num(a, "q0", 0.0);
            s.agents.push_back(ag);
        }
        if (s.agents.empty()) throw InvalidArgument("config needs at least one agent");
        if (doc.contains("grid")) s.n_steps = static_cast<int>(num(doc.at("grid"), "n_steps", 1000));

        if (doc.contains("mc")) {
            const auto& mc = doc.at("mc");
            s.mc.n_paths = static_cast<int>(num(mc, "n_paths", s.mc.n_paths));
            s.mc_steps = static_cast<int>(num(mc, "n_steps", s.mc_steps));
            s.mc.basis_degree = static_cast<int>(num(mc, "basis_degree", s.mc.basis_degree));
            s.mc.max_picard = static_cast<int>(num(mc, "max_picard", s.mc.max_picard));
            s.mc.tol = num(mc, "tol", s.mc.tol);
            s.mc.seed = static_cast<std::uint64_t>(num(mc, "seed", static_cast<double>(s.mc.seed)));
        }
        if (doc.contains("fixed_point")) {
            const auto& fp = doc.at("fixed_point");
            s.fp_max_iter = static_cast<int>(num(fp, "max_iter", s.fp_max_iter));
            s.fp_tol = num(fp, "tol", s.fp_tol);
        }
        if (doc.contains("verify")) {
            const auto& v = doc.at("verify");
            if (v.contains("epsilons")) s.epsilons = v.at("epsilons").get<std::vector<double>>();
            s.basis_size = static_cast<int>(num(v, "basis_size", s.basis_size));
        }
        return s;
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_json_file(path)); }

void set_param(json& doc, const std::string& path, double value) {
    static const std::regex agent_re(R"(agents\[(\*|\d+)\]\.(alpha|lambda|q0))");
    static const std::regex market_re(R"(market\.(a|b|T|mu|sigma|S0))");
    std::smatch m;
    if (std::regex_match(path, m, market_re)) {
        doc["market"][m[1].str()] = value;
        return;
    }
    if (std::regex_match(path, m, agent_re)) {
        auto& agents = doc.at("agents");
        const auto field = m[2].str();
        if (m[1] == "*") {
            for (auto& a : agents) a[field] = value;
            return;
        }
        const auto idx = std::stoul(m[1].str());
        if (idx >= agents.size()) throw InvalidArgument("parameter path out of range: " + path);
        agents[idx][field] = value;
        return;
    }
    throw InvalidArgument("unresolvable parameter path: " + path);
}

json baseline_config() {
    return json{{"market", {{"a", 0.01}, {"b", 0.01}, {"T", 1.0}, {"mu", 0.02}, {"sigma", 0.2}, {"S0", 100.0}}},
                {"agents",
                 {{{"alpha", 1.0}, {"lambda", 1.0}, {"q0", 1.0}},
                  {{"alpha", 0.5}, {"lambda", 0.5}, {"q0", 1.0}},
                  {{"alpha", 0.25}, {"lambda", 0.25}, {"q0", 0.5}}}},
                {"grid", {{"n_steps", 1000}}}};
}

FactorModel mc_factor_model(const Scenario& s) { return factor_model_of(s.market); }

}  // namespace impact::cli
