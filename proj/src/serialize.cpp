#include "whatif/serialize.hpp"

#include <fstream>
#include <sstream>

#include "whatif/error.hpp"

namespace whatif {

namespace {

const json& field(const json& j, const std::string& name, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    auto it = j.find(name);
    if (it == j.end()) throw ValidationError(where + "." + name + ": required");
    return *it;
}

double number(const json& j, const std::string& name, const std::string& where) {
    const json& v = field(j, name, where);
    if (!v.is_number()) throw ValidationError(where + "." + name + ": expected a number");
    return v.get<double>();
}

double number_or(const json& j, const std::string& name, const std::string& where, double fallback) {
    return j.contains(name) ? number(j, name, where) : fallback;
}

std::string text(const json& j, const std::string& name, const std::string& where) {
    const json& v = field(j, name, where);
    if (!v.is_string()) throw ValidationError(where + "." + name + ": expected a string");
    return v.get<std::string>();
}

std::uint64_t count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ValidationError(where + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::vector<Edge> edges_from(const json& j, const std::string& where) {
    std::vector<Edge> out;
    if (!j.is_array()) throw ValidationError(where + ": expected an array of [from, to] pairs");
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
            throw ValidationError(where + ": each edge must be a [from, to] pair of names");
        out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return out;
}

json edges_to(const std::vector<Edge>& edges) {
    json a = json::array();
    for (const auto& [x, y] : edges) a.push_back({x, y});
    return a;
}

}  // namespace

json schema_to_json(const std::vector<ParameterSpec>& schema) {
    json a = json::array();
    for (const auto& p : schema) {
        a.push_back({{"name", p.name},
                     {"unit", p.unit},
                     {"min", p.min},
                     {"max", p.max},
                     {"kind", p.kind == ParamKind::Integer ? "integer" : "continuous"}});
    }
    return a;
}

std::vector<ParameterSpec> schema_from_json(const json& j) {
    if (!j.is_array()) throw ValidationError("schema: expected an array of parameters");
    std::vector<ParameterSpec> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string where = "schema[" + std::to_string(i) + "]";
        ParameterSpec p;
        p.name = text(j[i], "name", where);
        p.unit = j[i].contains("unit") ? text(j[i], "unit", where) : "";
        p.min = number(j[i], "min", where);
        p.max = number(j[i], "max", where);
        if (j[i].contains("kind")) {
            const std::string kind = text(j[i], "kind", where);
            if (kind == "integer") p.kind = ParamKind::Integer;
            else if (kind == "continuous") p.kind = ParamKind::Continuous;
            else throw ValidationError(where + ".kind: expected 'continuous' or 'integer', got '" + kind + "'");
        }
        out.push_back(std::move(p));
    }
    validate_schema(out);
    return out;
}

json constants_to_json(const OracleConstants& k) {
    return {{"degree_hours", k.degree_hours},
            {"infiltration_factor", k.infiltration_factor},
            {"permeability_divisor", k.permeability_divisor},
            {"irradiation_south", k.irradiation_south},
            {"irradiation_east_west", k.irradiation_east_west},
            {"irradiation_north", k.irradiation_north},
            {"occupant_heat_output", k.occupant_heat_output},
            {"gain_utilization", k.gain_utilization},
            {"operating_hours", k.operating_hours},
            {"light_heat_gain", k.light_heat_gain}};
}

OracleConstants constants_from_json(const json& j) {
    const std::string w = "constants";
    if (!j.is_object()) throw ValidationError(w + ": expected an object");
    OracleConstants k;
    for (const auto& [key, value] : j.items()) {
        if (!constants_to_json(k).contains(key)) throw ValidationError(w + "." + key + ": unknown constant");
    }
    k.degree_hours = number_or(j, "degree_hours", w, k.degree_hours);
    k.infiltration_factor = number_or(j, "infiltration_factor", w, k.infiltration_factor);
    k.permeability_divisor = number_or(j, "permeability_divisor", w, k.permeability_divisor);
    k.irradiation_south = number_or(j, "irradiation_south", w, k.irradiation_south);
    k.irradiation_east_west = number_or(j, "irradiation_east_west", w, k.irradiation_east_west);
    k.irradiation_north = number_or(j, "irradiation_north", w, k.irradiation_north);
    k.occupant_heat_output = number_or(j, "occupant_heat_output", w, k.occupant_heat_output);
    k.gain_utilization = number_or(j, "gain_utilization", w, k.gain_utilization);
    k.operating_hours = number_or(j, "operating_hours", w, k.operating_hours);
    k.light_heat_gain = number_or(j, "light_heat_gain", w, k.light_heat_gain);
    k.validate();
    return k;
}

json knowledge_to_json(const KnowledgeConstraints& k) {
    return {{"required", edges_to(k.required)}, {"forbidden", edges_to(k.forbidden)}, {"tiers", k.tiers}};
}

KnowledgeConstraints knowledge_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("constraints: expected an object");
    KnowledgeConstraints k;
    for (const auto& [key, value] : j.items()) {
        if (key != "required" && key != "forbidden" && key != "tiers")
            throw ValidationError("constraints." + key + ": unknown field");
    }
    if (j.contains("required")) k.required = edges_from(j["required"], "constraints.required");
    if (j.contains("forbidden")) k.forbidden = edges_from(j["forbidden"], "constraints.forbidden");
    if (j.contains("tiers")) {
        const json& t = j["tiers"];
        if (!t.is_array()) throw ValidationError("constraints.tiers: expected an array of name arrays");
        for (const auto& tier : t) {
            if (!tier.is_array()) throw ValidationError("constraints.tiers: expected an array of name arrays");
            std::vector<std::string> names;
            for (const auto& n : tier) {
                if (!n.is_string()) throw ValidationError("constraints.tiers: node names must be strings");
                names.push_back(n.get<std::string>());
            }
            k.tiers.push_back(std::move(names));
        }
    }
    return k;
}

json path_to_json(const PathDiagnostic& p) {
    json roles = json::array();
    for (auto r : p.roles) roles.push_back(std::string(to_string(r)));
    return {{"nodes", p.nodes},
            {"roles", roles},
            {"blocked_given", p.blocked_given},
            {"open", p.open},
            {"backdoor", p.is_backdoor}};
}

json estimand_to_json(const Estimand& e) {
    json paths = json::array();
    for (const auto& p : e.diagnostics) paths.push_back(path_to_json(p));
    return {{"treatment", e.treatment},
            {"outcome", e.outcome},
            {"null_effect", e.null_effect},
            {"minimal_adjustment_sets", e.minimal_adjustment_sets},
            {"forbidden_nodes", e.forbidden_nodes},
            {"diagnostics", paths},
            {"diagnostics_truncated", e.diagnostics_truncated}};
}

json discovery_to_json(const DiscoveryResult& r) {
    json log = json::array();
    for (const auto& s : r.log) {
        log.push_back({{"phase", s.phase},
                       {"op", s.op},
                       {"from", s.from},
                       {"to", s.to},
                       {"subset", s.subset},
                       {"delta", s.delta},
                       {"score", s.score}});
    }
    return {{"cpdag", graph_to_json(r.cpdag)},
            {"score", r.score},
            {"score_trajectory", r.score_trajectory},
            {"operator_log", log},
            {"warnings", r.warnings},
            {"cache", {{"hits", r.cache_hits}, {"misses", r.cache_misses}}}};
}

json scenario_to_json(const Scenario& s) {
    json cond = json::object();
    for (const auto& [k, v] : s.conditions) cond[k] = v;
    return {{"treatment", s.treatment},
            {"control", s.control},
            {"treated", s.treated},
            {"outcome", s.outcome},
            {"conditions", cond},
            {"n_samples", s.n_samples},
            {"seed", s.seed}};
}

Scenario scenario_from_json(const json& j) {
    const std::string w = "scenario";
    Scenario s;
    s.treatment = text(j, "treatment", w);
    s.control = number(j, "control", w);
    if (j.contains("treated")) s.treated = number(j, "treated", w);
    else if (j.contains("treat")) s.treated = number(j, "treat", w);
    else throw ValidationError(w + ".treated: required");
    s.outcome = j.contains("outcome") ? text(j, "outcome", w) : std::string(col::kHeatingLoad);
    if (j.contains("conditions")) {
        const json& c = j["conditions"];
        if (!c.is_object()) throw ValidationError(w + ".conditions: expected an object of name: value");
        for (const auto& [k, v] : c.items()) {
            if (!v.is_number()) throw ValidationError(w + ".conditions." + k + ": expected a number");
            s.conditions[k] = v.get<double>();
        }
    }
    if (j.contains("n_samples")) s.n_samples = count(j["n_samples"], w + ".n_samples");
    if (j.contains("seed")) s.seed = count(j["seed"], w + ".seed");
    if (s.n_samples == 0) throw ValidationError(w + ".n_samples: must be at least 1");
    return s;
}

json effect_to_json(const EffectEstimate& e) {
    json curve = json::array();
    if (!e.cdf.empty()) {
        for (int k = 0; k <= 100; ++k) {
            const double p = k / 100.0;
            const double pos = p * static_cast<double>(e.cdf.size() - 1);
            const auto lo = static_cast<std::size_t>(pos);
            const auto hi = std::min(lo + 1, e.cdf.size() - 1);
            const double v = e.cdf[lo] + (pos - static_cast<double>(lo)) * (e.cdf[hi] - e.cdf[lo]);
            curve.push_back({{"p", p}, {"value", v}});
        }
    }
    return {{"tau", e.tau},
            {"se", e.se},
            {"mc_se", e.mc_se},
            {"model_se", e.model_se},
            {"n", e.n},
            {"p05", e.p05},
            {"p50", e.p50},
            {"p95", e.p95},
            {"histogram", {{"edges", e.histogram.edges}, {"counts", e.histogram.counts}}},
            {"cdf", curve}};
}

json scm_to_json(const FittedScm& scm) {
    json nodes = json::array();
    for (const auto& m : scm.models()) {
        nodes.push_back({{"node", m.node},
                         {"parents", m.parents},
                         {"degree", m.model.degree()},
                         {"features", m.model.features()},
                         {"r2", m.model.r2()},
                         {"residual_sd", m.model.residual_sd()}});
    }
    return {{"expansion", std::string(to_string(scm.expansion()))}, {"models", nodes}, {"warnings", scm.warnings()}};
}

json ensemble_to_json(const TreeEnsemble& m) {
    json trees = json::array();
    for (const auto& t : m.trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes) {
            if (n.feature < 0) nodes.push_back({{"leaf", n.value}});
            else nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
        }
        trees.push_back(nodes);
    }
    return {{"target", m.target},
            {"features", m.features},
            {"feature_min", m.feature_min},
            {"feature_max", m.feature_max},
            {"rounds", m.params.rounds},
            {"max_depth", m.params.max_depth},
            {"learning_rate", m.params.learning_rate},
            {"min_leaf", m.params.min_leaf},
            {"base", m.base},
            {"trees", trees}};
}

TreeEnsemble ensemble_from_json(const json& j) {
    const std::string w = "model";
    TreeEnsemble m;
    try {
        m.target = text(j, "target", w);
        m.features = field(j, "features", w).get<std::vector<std::string>>();
        m.feature_min = field(j, "feature_min", w).get<std::vector<double>>();
        m.feature_max = field(j, "feature_max", w).get<std::vector<double>>();
        m.params.rounds = count(field(j, "rounds", w), w + ".rounds");
        m.params.max_depth = static_cast<int>(count(field(j, "max_depth", w), w + ".max_depth"));
        m.params.learning_rate = number(j, "learning_rate", w);
        m.params.min_leaf = count(field(j, "min_leaf", w), w + ".min_leaf");
        m.base = number(j, "base", w);
        const json& trees = field(j, "trees", w);
        if (!trees.is_array()) throw ValidationError(w + ".trees: expected an array");
        for (const auto& t : trees) {
            RegressionTree tree;
            for (const auto& n : t) {
                TreeNode node;
                if (n.contains("leaf")) {
                    node.value = n["leaf"].get<double>();
                } else {
                    node.feature = n.at("feature").get<int>();
                    node.threshold = n.at("threshold").get<double>();
                    node.left = n.at("left").get<int>();
                    node.right = n.at("right").get<int>();
                }
                tree.nodes.push_back(node);
            }
            const auto size = static_cast<int>(tree.nodes.size());
            if (size == 0) throw ValidationError(w + ".trees: empty tree");
            for (const auto& node : tree.nodes) {
                if (node.feature < 0) continue;
                if (node.feature >= static_cast<int>(m.features.size()) || node.left <= 0 || node.left >= size ||
                    node.right <= 0 || node.right >= size)
                    throw ValidationError(w + ".trees: split references out of range");
            }
            m.trees.push_back(std::move(tree));
        }
    } catch (const json::exception& e) {
        throw ValidationError(w + ": " + e.what());
    }
    if (m.feature_min.size() != m.features.size() || m.feature_max.size() != m.features.size())
        throw ValidationError(w + ": feature ranges do not match the feature list");
    m.params.validate();
    return m;
}

json cv_to_json(const CvReport& r) {
    return {{"folds", r.folds}, {"mape", r.mape}, {"r2", r.r2}, {"fold_mape", r.fold_mape}, {"fold_r2", r.fold_r2}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace whatif
