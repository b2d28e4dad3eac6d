#include "whatif/service.hpp"

#include <cmath>
#include <mutex>
#include <sstream>

#include "whatif/error.hpp"
#include "whatif/validation.hpp"

namespace whatif {

Response Response::json_body(int status, const json& j) {
    return {status, "application/json", j.dump(2) + "\n"};
}

json dataset_summary(const Dataset& ds) {
    json cols = json::array();
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        const auto v = ds.values().col(static_cast<Eigen::Index>(j));
        const double mean = v.mean();
        const double sd = ds.rows() > 1
                              ? std::sqrt((v.array() - mean).square().sum() / static_cast<double>(ds.rows() - 1))
                              : 0.0;
        const auto& c = ds.columns()[j];
        cols.push_back({{"name", c.name},
                        {"unit", c.unit},
                        {"role", std::string(to_string(c.role))},
                        {"min", v.minCoeff()},
                        {"max", v.maxCoeff()},
                        {"mean", mean},
                        {"sd", sd}});
    }
    return {{"rows", ds.rows()}, {"columns", cols}};
}

namespace {

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        while (i < path.size() && path[i] == '/') ++i;
        std::size_t j = i;
        while (j < path.size() && path[j] != '/') ++j;
        if (j > i) parts.emplace_back(path.substr(i, j - i));
        i = j;
    }
    return parts;
}

json parse_body(std::string_view body) {
    if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("request body is not valid JSON: ") + e.what());
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const char* where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string(where) + "." + key + ": wrong type");
    }
}

json columns_json() {
    json cols = json::array();
    for (const auto& c : building_columns())
        cols.push_back({{"name", c.name}, {"unit", c.unit}, {"role", std::string(to_string(c.role))}});
    return cols;
}

Dataset dataset_from_csv_text(const std::string& text) {
    std::istringstream header_in(text);
    std::string header;
    std::getline(header_in, header);
    bool building = false;
    for (const auto& c : building_columns())
        if (header.find(c.name) != std::string::npos) building = true;
    std::istringstream in(text);
    return building ? read_csv(in) : read_csv_any(in);
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
    if (options_.persist && std::filesystem::exists(*options_.persist)) load(*options_.persist);
}

std::shared_ptr<const DatasetRecord> Service::dataset(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = datasets_.find(id);
    if (it == datasets_.end()) throw NotFoundError("unknown dataset " + id);
    return it->second;
}

std::shared_ptr<const GraphRecord> Service::graph(const std::string& id) const {
    std::shared_lock lock(mutex_);
    auto it = graphs_.find(id);
    if (it == graphs_.end()) throw NotFoundError("unknown graph " + id);
    return it->second;
}

std::string Service::add_dataset(std::shared_ptr<const DatasetRecord> rec) {
    std::string id;
    {
        std::unique_lock lock(mutex_);
        id = "d" + std::to_string(next_dataset_++);
        datasets_.emplace(id, std::move(rec));
    }
    save();
    return id;
}

std::string Service::add_graph(std::shared_ptr<const GraphRecord> rec) {
    std::string id;
    {
        std::unique_lock lock(mutex_);
        id = "g" + std::to_string(next_graph_++);
        graphs_.emplace(id, std::move(rec));
    }
    save();
    return id;
}

Response Service::handle(std::string_view method, std::string_view path,
                         const std::map<std::string, std::string>& query, std::string_view body) {
    try {
        const auto parts = split_path(path);
        const bool get = method == "GET";
        const bool post = method == "POST";
        if (method == "OPTIONS") return {204, "text/plain", ""};

        if (parts.size() == 1 && parts[0] == "health" && get) return Response::json_body(200, {{"status", "ok"}});
        if (parts.size() == 1 && parts[0] == "schema" && get)
            return Response::json_body(200, {{"schema", schema_to_json(default_schema())},
                                             {"columns", columns_json()}});
        if (!parts.empty() && parts[0] == "datasets") {
            if (parts.size() == 1 && post) return Response::json_body(201, post_dataset(parse_body(body)));
            if (parts.size() == 2 && get) {
                const auto rec = dataset(parts[1]);
                return Response::json_body(200, {{"dataset_id", parts[1]},
                                                 {"generated", rec->generated},
                                                 {"summary", dataset_summary(*rec->data)}});
            }
            if (parts.size() == 3 && parts[2] == "discover" && post)
                return Response::json_body(201, discover(parts[1], parse_body(body)));
        }
        if (!parts.empty() && parts[0] == "graphs") {
            if (parts.size() == 1 && post) return Response::json_body(201, post_graph(parse_body(body)));
            if (parts.size() == 2 && get) {
                const auto g = graph(parts[1]);
                std::string format = "json";
                if (auto it = query.find("format"); it != query.end()) format = it->second;
                const auto f = parse_graph_format(format);
                if (!f) throw ValidationError("format: expected 'dot' or 'json', got '" + format + "'");
                if (*f == GraphFormat::Dot) return {200, "text/vnd.graphviz", export_graph(g->graph, GraphFormat::Dot)};
                return Response::json_body(200, graph_json(parts[1], g));
            }
            if (parts.size() == 3 && get && parts[2] == "history") return Response::json_body(200, history(parts[1]));
            if (parts.size() == 3 && post) {
                if (parts[2] == "constraints") return Response::json_body(201, constrain(parts[1], parse_body(body)));
                if (parts[2] == "identify") return Response::json_body(200, identify(parts[1], parse_body(body)));
                if (parts[2] == "estimate") return Response::json_body(200, estimate(parts[1], parse_body(body)));
            }
        }
        return Response::json_body(404, {{"error", "no route for " + std::string(method) + " " + std::string(path)}});
    } catch (const NotFoundError& e) {
        return Response::json_body(404, {{"error", e.what()}});
    } catch (const ContradictionError& e) {
        return Response::json_body(409, {{"error", e.what()}, {"edge", e.edge()}});
    } catch (const ValidationError& e) {
        return Response::json_body(422, {{"error", e.what()}});
    } catch (const json::exception& e) {
        return Response::json_body(422, {{"error", e.what()}});
    } catch (const std::exception& e) {
        return Response::json_body(500, {{"error", e.what()}});
    }
}

json Service::post_dataset(const json& body) {
    auto rec = std::make_shared<DatasetRecord>();
    if (body.contains("generate")) {
        const json& g = body["generate"];
        if (!g.is_object()) throw ValidationError("generate: expected an object");
        rec->generated = true;
        rec->n = get_or<std::size_t>(g, "n", 1000, "generate");
        rec->seed = get_or<std::uint64_t>(g, "seed", 0, "generate");
        rec->noise = get_or<double>(g, "noise", 0.005, "generate");
        rec->schema = g.contains("schema") ? schema_from_json(g["schema"]) : default_schema();
        rec->constants = g.contains("constants") ? constants_from_json(g["constants"]) : OracleConstants{};
        if (!(rec->noise >= 0 && rec->noise <= kMaxGeometryNoise))
            throw ValidationError("generate.noise: must lie in [0, 0.05]");
        rec->data = std::make_shared<const Dataset>(
            generate_dataset(rec->schema, rec->n, rec->seed, rec->noise, rec->constants));
    } else if (body.contains("csv")) {
        if (!body["csv"].is_string()) throw ValidationError("csv: expected the CSV text as a string");
        rec->csv = body["csv"].get<std::string>();
        rec->data = std::make_shared<const Dataset>(dataset_from_csv_text(rec->csv));
    } else {
        throw ValidationError("body requires 'generate' or 'csv'");
    }
    const auto data = rec->data;
    const bool generated = rec->generated;
    const std::uint64_t seed = rec->seed;
    const std::string id = add_dataset(std::move(rec));
    json out = {{"dataset_id", id}, {"generated", generated}, {"summary", dataset_summary(*data)}};
    if (generated) out["seed"] = seed;
    return out;
}

json Service::discover(const std::string& id, const json& body) {
    const auto rec = dataset(id);
    GesConfig cfg;
    cfg.penalty_multiplier = get_or<double>(body, "penalty", cfg.penalty_multiplier, "discover");
    cfg.max_parents = get_or<std::size_t>(body, "max_parents", cfg.max_parents, "discover");
    cfg.standardize = get_or<bool>(body, "standardize", cfg.standardize, "discover");
    cfg.validate();
    const DiscoveryResult res = ges_discover(*rec->data, cfg);
    json report = discovery_to_json(res);

    auto g = std::make_shared<GraphRecord>();
    g->graph = res.cpdag;
    g->dataset = id;
    g->origin = "discover";
    g->detail = report;
    const std::string gid = add_graph(std::move(g));
    json out = {{"graph_id", gid}, {"dataset_id", id}};
    for (auto& [k, v] : report.items()) out[k] = v;
    return out;
}

json Service::post_graph(const json& body) {
    auto g = std::make_shared<GraphRecord>();
    if (body.contains("graph")) {
        g->graph = graph_from_json(body["graph"]);
    } else if (body.contains("dot")) {
        if (!body["dot"].is_string()) throw ValidationError("dot: expected the DOT text as a string");
        g->graph = parse_graph(body["dot"].get<std::string>(), GraphFormat::Dot);
    } else {
        throw ValidationError("body requires 'graph' or 'dot'");
    }
    if (body.contains("dataset_id")) {
        g->dataset = get_or<std::string>(body, "dataset_id", "", "graph");
        dataset(g->dataset);
    }
    g->origin = "upload";
    const std::string gid = add_graph(g);
    return graph_json(gid, g);
}

json Service::constrain(const std::string& id, const json& body) {
    const auto base = graph(id);
    const KnowledgeConstraints k = knowledge_from_json(body);
    auto g = std::make_shared<GraphRecord>();
    g->graph = apply_knowledge(base->graph, k);
    g->parent = id;
    g->dataset = base->dataset;
    g->origin = "constraints";
    g->detail = knowledge_to_json(k);
    const std::string gid = add_graph(g);
    return graph_json(gid, g);
}

json Service::graph_json(const std::string& id, const std::shared_ptr<const GraphRecord>& g) const {
    json out = {{"graph_id", id},
                {"origin", g->origin},
                {"graph", graph_to_json(g->graph)},
                {"fully_directed", g->graph.fully_directed()}};
    out["parent_id"] = g->parent.empty() ? json(nullptr) : json(g->parent);
    out["dataset_id"] = g->dataset.empty() ? json(nullptr) : json(g->dataset);
    if (g->origin == "constraints") out["constraints"] = g->detail;
    return out;
}

json Service::history(const std::string& id) const {
    json chain = json::array();
    std::string cur = id;
    while (!cur.empty()) {
        const auto g = graph(cur);
        chain.push_back({{"graph_id", cur}, {"origin", g->origin}});
        cur = g->parent;
    }
    return {{"graph_id", id}, {"versions", chain}};
}

json Service::identify(const std::string& id, const json& body) const {
    const auto g = graph(id);
    const std::string treatment = get_or<std::string>(body, "treatment", "", "identify");
    const std::string outcome = get_or<std::string>(body, "outcome", std::string(col::kHeatingLoad), "identify");
    if (treatment.empty()) throw ValidationError("identify.treatment: required");
    json out = estimand_to_json(identify_estimand(g->graph, treatment, outcome));
    out["graph_id"] = id;
    return out;
}

json Service::estimate(const std::string& id, const json& body) const {
    const auto g = graph(id);
    if (!body.contains("scenario")) throw ValidationError("scenario: required");
    const Scenario scenario = scenario_from_json(body["scenario"]);
    std::string data_id = get_or<std::string>(body, "dataset_id", g->dataset, "estimate");
    if (data_id.empty()) throw ValidationError("dataset_id: required for a graph without a dataset");
    const auto rec = dataset(data_id);

    const std::string expansion_name =
        get_or<std::string>(body, "expansion", std::string(to_string(kDefaultExpansion)), "estimate");
    const auto expansion = parse_expansion(expansion_name);
    if (!expansion) throw ValidationError("expansion: unknown value '" + expansion_name + "'");
    EstimateOptions opt;
    opt.model_draws = get_or<std::size_t>(body, "model_draws", opt.model_draws, "estimate");
    opt.simulation.residual_noise = get_or<bool>(body, "residual_noise", false, "estimate");

    const Estimand estimand = identify_estimand(g->graph, scenario.treatment, scenario.outcome);
    const FittedScm scm = fit_scm(rec->data, g->graph, *expansion);
    const EffectEstimate est = estimate_effect(scm, scenario, opt);

    json out = {{"graph_id", id},
                {"dataset_id", data_id},
                {"kind", scenario.conditions.empty() ? "ate" : "cate"},
                {"scenario", scenario_to_json(scenario)},
                {"estimand", estimand_to_json(estimand)},
                {"estimate", effect_to_json(est)},
                {"model", scm_to_json(scm)}};

    if (get_or<bool>(body, "baseline", false, "estimate")) {
        const TreeEnsemble model = fit_baseline(*rec->data, scenario.outcome);
        out["baseline"] = {{"estimate", effect_to_json(naive_whatif(model, scenario))}};
    }
    const json oracle = body.contains("oracle") ? body["oracle"] : json(rec->generated);
    if (oracle.is_boolean() ? oracle.get<bool>() : oracle.is_object()) {
        if (!rec->generated) throw ValidationError("oracle: only available for generated datasets");
        const json cfg = oracle.is_object() ? oracle : json::object();
        const std::size_t samples = get_or<std::size_t>(cfg, "samples", 200, "oracle");
        const std::uint64_t seed = get_or<std::uint64_t>(cfg, "seed", scenario.seed, "oracle");
        const EffectEstimate truth = oracle_effect(rec->schema, rec->constants, scenario, samples, seed);
        out["oracle"] = {{"samples", samples}, {"seed", seed}, {"estimate", effect_to_json(truth)}};
    }
    return out;
}

void Service::save() const {
    if (!options_.persist) return;
    json snap;
    {
        std::shared_lock lock(mutex_);
        snap["next_dataset"] = next_dataset_;
        snap["next_graph"] = next_graph_;
        json ds = json::object();
        for (const auto& [id, r] : datasets_) {
            if (r->generated) {
                ds[id] = {{"generate",
                           {{"n", r->n},
                            {"seed", r->seed},
                            {"noise", r->noise},
                            {"schema", schema_to_json(r->schema)},
                            {"constants", constants_to_json(r->constants)}}}};
            } else {
                ds[id] = {{"csv", r->csv}};
            }
        }
        snap["datasets"] = ds;
        json gs = json::object();
        for (const auto& [id, g] : graphs_) {
            gs[id] = {{"graph", graph_to_json(g->graph)},
                      {"parent", g->parent},
                      {"dataset", g->dataset},
                      {"origin", g->origin},
                      {"detail", g->detail}};
        }
        snap["graphs"] = gs;
    }
    const auto tmp = options_.persist->string() + ".tmp";
    write_json_file(snap, tmp);
    std::filesystem::rename(tmp, *options_.persist);
}

void Service::load(const std::filesystem::path& path) {
    const json snap = read_json_file(path);
    try {
        for (const auto& [id, d] : snap.at("datasets").items()) {
            auto rec = std::make_shared<DatasetRecord>();
            if (d.contains("generate")) {
                const json& g = d["generate"];
                rec->generated = true;
                rec->n = g.at("n").get<std::size_t>();
                rec->seed = g.at("seed").get<std::uint64_t>();
                rec->noise = g.at("noise").get<double>();
                rec->schema = schema_from_json(g.at("schema"));
                rec->constants = constants_from_json(g.at("constants"));
                rec->data = std::make_shared<const Dataset>(
                    generate_dataset(rec->schema, rec->n, rec->seed, rec->noise, rec->constants));
            } else {
                rec->csv = d.at("csv").get<std::string>();
                rec->data = std::make_shared<const Dataset>(dataset_from_csv_text(rec->csv));
            }
            datasets_[id] = std::move(rec);
        }
        for (const auto& [id, g] : snap.at("graphs").items()) {
            auto rec = std::make_shared<GraphRecord>();
            rec->graph = graph_from_json(g.at("graph"));
            rec->parent = g.at("parent").get<std::string>();
            rec->dataset = g.at("dataset").get<std::string>();
            rec->origin = g.at("origin").get<std::string>();
            rec->detail = g.at("detail");
            graphs_[id] = std::move(rec);
        }
        next_dataset_ = snap.at("next_dataset").get<std::size_t>();
        next_graph_ = snap.at("next_graph").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": corrupt snapshot: " + e.what());
    }
}

}  // namespace whatif
