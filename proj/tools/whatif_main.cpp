// Command-line front end: data generation, discovery, graph editing,
// identification, estimation and the HTTP server.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "whatif/error.hpp"
#include "whatif/http_server.hpp"
#include "whatif/serialize.hpp"
#include "whatif/service.hpp"
#include "whatif/validation.hpp"

using namespace whatif;

namespace {

// Short names accepted wherever a column is expected.
const std::map<std::string, std::string_view>& aliases() {
    static const std::map<std::string, std::string_view> table = {
        {"GFA", col::kGroundFloorArea},     {"H", col::kHeight},
        {"NF", col::kNumberOfFloors},       {"NFloors", col::kNumberOfFloors},
        {"u_wall", col::kUWall},            {"u_int_wall", col::kUInternalWall},
        {"u_gf", col::kUGroundFloor},       {"u_roof", col::kURoof},
        {"u_int_floor", col::kUInternalFloor}, {"u_win", col::kUWindows},
        {"g", col::kGWindows},              {"Perm", col::kPermeability},
        {"Equip", col::kEquipmentGain},     {"Occ", col::kOccupancy},
        {"EWA", col::kExternalWallArea},    {"WA", col::kWindowArea},
        {"HL", col::kHeatingLoad},
    };
    return table;
}

std::string resolve(const std::string& name) {
    const auto it = aliases().find(name);
    return it == aliases().end() ? name : std::string(it->second);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool is_dot(const std::string& path) {
    return path.size() >= 4 && path.compare(path.size() - 4, 4, ".dot") == 0;
}

CausalGraph load_graph(const std::string& path) {
    return parse_graph(read_text(path), is_dot(path) ? GraphFormat::Dot : GraphFormat::Json);
}

void save_graph(const CausalGraph& g, const std::string& path) {
    if (path == "-") {
        std::cout << export_graph(g, GraphFormat::Json);
        return;
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << export_graph(g, is_dot(path) ? GraphFormat::Dot : GraphFormat::Json);
}

// Building data is read strictly against the schema; any other table is
// taken as plain numeric columns.
Dataset load_data(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    std::string header;
    std::getline(in, header);
    for (const auto& c : building_columns())
        if (header.find(c.name) != std::string::npos) return load_csv(path);
    return load_csv_any(path);
}

void emit(const json& j, const std::string& out) {
    if (out.empty() || out == "-")
        std::cout << j.dump(2) << "\n";
    else
        write_json_file(j, out);
}

struct ScenarioArgs {
    std::string file;
    std::string treatment;
    std::string outcome = std::string(col::kHeatingLoad);
    double control = 0;
    double treated = 0;
    std::vector<std::string> conditions;
    std::size_t samples = 1000;
    std::uint64_t seed = 0;

    void add_to(CLI::App* app) {
        app->add_option("--scenario", file, "scenario JSON file (overrides the flags below)");
        app->add_option("--treatment", treatment, "intervened column");
        app->add_option("--outcome", outcome, "outcome column");
        app->add_option("--control", control, "baseline value of the treatment");
        app->add_option("--treat,--treated", treated, "alternative value of the treatment");
        app->add_option("--condition", conditions, "NAME=VALUE stratum condition, repeatable");
        app->add_option("--samples", samples, "Monte Carlo units");
        app->add_option("--seed", seed, "random seed");
    }

    Scenario build() const {
        if (!file.empty()) return scenario_from_json(read_json_file(file));
        if (treatment.empty()) throw ValidationError("--treatment or --scenario is required");
        Scenario s;
        s.treatment = resolve(treatment);
        s.outcome = resolve(outcome);
        s.control = control;
        s.treated = treated;
        s.n_samples = samples;
        s.seed = seed;
        for (const auto& c : conditions) {
            const auto eq = c.find('=');
            if (eq == std::string::npos) throw ValidationError("--condition expects NAME=VALUE, got " + c);
            try {
                s.conditions[resolve(c.substr(0, eq))] = std::stod(c.substr(eq + 1));
            } catch (const std::logic_error&) {
                throw ValidationError("--condition value is not a number: " + c);
            }
        }
        return s;
    }
};

Expansion expansion_of(const std::string& name) {
    const auto e = parse_expansion(name);
    if (!e) throw ValidationError("unknown expansion '" + name + "'");
    return *e;
}

void print_effect(const char* label, const EffectEstimate& e) {
    std::cout << std::left << std::setw(10) << label << std::right << std::fixed << std::setprecision(2)
              << std::setw(14) << e.tau << std::setw(12) << e.se << std::setw(14) << e.p05 << std::setw(14)
              << e.p95 << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal what-if analysis for building design"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "sample a synthetic building dataset");
    std::size_t gen_n = 1000;
    std::uint64_t gen_seed = 0;
    double gen_noise = 0.005;
    std::string gen_out = "-", gen_schema, gen_constants;
    gen->add_option("-n,--n,--rows", gen_n, "number of buildings");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("--noise", gen_noise, "relative noise on derived geometry");
    gen->add_option("--schema", gen_schema, "parameter ranges JSON");
    gen->add_option("--constants", gen_constants, "oracle constants JSON");
    gen->add_option("-o,--out", gen_out, "CSV path, - for stdout");

    auto* sch = app.add_subcommand("schema", "print the default parameter ranges");

    auto* disc = app.add_subcommand("discover", "learn a CPDAG with greedy equivalence search");
    std::string disc_data, disc_out = "-", disc_report;
    GesConfig ges;
    bool no_standardize = false;
    disc->add_option("--data", disc_data, "CSV dataset")->required();
    disc->add_option("--penalty", ges.penalty_multiplier, "BIC penalty multiplier");
    disc->add_option("--max-parents", ges.max_parents, "parent set size limit");
    disc->add_flag("--no-standardize", no_standardize, "score raw columns");
    disc->add_option("-o,--out", disc_out, "graph output (.json or .dot)");
    disc->add_option("--report", disc_report, "discovery report JSON");

    auto* prune = app.add_subcommand("prune", "apply domain knowledge to a graph");
    std::string prune_graph, prune_knowledge, prune_out = "-";
    prune->add_option("--graph", prune_graph, "input graph (.json or .dot)")->required();
    prune->add_option("--constraints,--knowledge", prune_knowledge, "constraints JSON")->required();
    prune->add_option("-o,--out", prune_out, "output graph (.json or .dot)");

    auto* ident = app.add_subcommand("identify", "find backdoor adjustment sets");
    std::string ident_graph, ident_x, ident_y = std::string(col::kHeatingLoad), ident_out = "-";
    ident->add_option("--graph", ident_graph, "causal graph")->required();
    ident->add_option("--treatment", ident_x, "treatment column")->required();
    ident->add_option("--outcome", ident_y, "outcome column");
    ident->add_option("-o,--out", ident_out, "estimand JSON");

    auto* est = app.add_subcommand("estimate", "fit the structural model and answer a what-if question");
    std::string est_data, est_graph, est_out = "-", est_expansion = std::string(to_string(kDefaultExpansion));
    std::size_t est_draws = 200;
    bool est_baseline = false;
    ScenarioArgs est_s;
    est->add_option("--data", est_data, "CSV dataset")->required();
    est->add_option("--graph", est_graph, "fully directed causal graph")->required();
    est->add_option("--expansion", est_expansion, "linear, quadratic, interactions2 or interactions3");
    est->add_option("--model-draws", est_draws, "coefficient draws for the model uncertainty");
    est->add_flag("--baseline", est_baseline, "also report the associational baseline");
    est->add_option("-o,--out", est_out, "result JSON");
    est_s.add_to(est);

    auto* val = app.add_subcommand("validate", "compare causal and naive estimates with the oracle");
    std::size_t val_n = 1000, val_oracle = 500;
    std::uint64_t val_data_seed = 1;
    double val_noise = 0.005;
    std::string val_graph, val_out, val_expansion = std::string(to_string(kDefaultExpansion));
    ScenarioArgs val_s;
    val->add_option("-n,--n,--rows", val_n, "rows of generated data");
    val->add_option("--data-seed", val_data_seed, "seed of the generated data");
    val->add_option("--noise", val_noise, "relative noise on derived geometry");
    val->add_option("--graph", val_graph, "graph to fit (default: the ground-truth DAG)");
    val->add_option("--expansion", val_expansion, "feature expansion of the node models");
    val->add_option("--oracle-samples", val_oracle, "configurations for the oracle effect");
    val->add_option("-o,--out", val_out, "write all three estimates as JSON");
    val_s.add_to(val);

    auto* srv = app.add_subcommand("serve", "run the HTTP API");
    std::string srv_host = "127.0.0.1", srv_persist;
    int srv_port = 8080;
    srv->add_option("--host", srv_host, "bind address");
    srv->add_option("--port", srv_port, "port");
    srv->add_option("--persist", srv_persist, "session snapshot file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*gen) {
            const auto schema = gen_schema.empty() ? default_schema() : schema_from_json(read_json_file(gen_schema));
            const auto k = gen_constants.empty() ? OracleConstants{} : constants_from_json(read_json_file(gen_constants));
            const Dataset ds = generate_dataset(schema, gen_n, gen_seed, gen_noise, k);
            if (gen_out == "-")
                write_csv(ds, std::cout);
            else
                save_csv(ds, gen_out);
        } else if (*sch) {
            std::cout << schema_to_json(default_schema()).dump(2) << "\n";
        } else if (*disc) {
            ges.standardize = !no_standardize;
            ges.validate();
            const DiscoveryResult r = ges_discover(load_data(disc_data), ges);
            save_graph(r.cpdag, disc_out);
            if (!disc_report.empty()) write_json_file(discovery_to_json(r), disc_report);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
            std::cerr << "score " << std::fixed << std::setprecision(2) << r.score << ", "
                      << r.cpdag.directed_edges().size() << " directed and " << r.cpdag.undirected_edges().size()
                      << " undirected edges\n";
        } else if (*prune) {
            const CausalGraph g = apply_knowledge(load_graph(prune_graph), knowledge_from_json(read_json_file(prune_knowledge)));
            save_graph(g, prune_out);
        } else if (*ident) {
            emit(estimand_to_json(identify_estimand(load_graph(ident_graph), resolve(ident_x), resolve(ident_y))),
                 ident_out);
        } else if (*est) {
            const Scenario s = est_s.build();
            const auto data = std::make_shared<const Dataset>(load_data(est_data));
            const CausalGraph g = load_graph(est_graph);
            const FittedScm scm = fit_scm(data, g, expansion_of(est_expansion));
            for (const auto& w : scm.warnings()) std::cerr << "warning: " << w << "\n";
            EstimateOptions opt;
            opt.model_draws = est_draws;
            json out = {{"scenario", scenario_to_json(s)},
                        {"estimand", estimand_to_json(identify_estimand(g, s.treatment, s.outcome))},
                        {"estimate", effect_to_json(estimate_effect(scm, s, opt))},
                        {"model", scm_to_json(scm)}};
            if (est_baseline)
                out["baseline"] = effect_to_json(naive_whatif(fit_baseline(*data, s.outcome), s));
            emit(out, est_out);
        } else if (*val) {
            const Scenario s = val_s.build();
            const auto schema = default_schema();
            const auto data =
                std::make_shared<const Dataset>(generate_dataset(schema, val_n, val_data_seed, val_noise));
            const CausalGraph g = val_graph.empty() ? ground_truth_dag() : load_graph(val_graph);
            const FittedScm scm = fit_scm(data, g, expansion_of(val_expansion));
            const EffectEstimate causal = estimate_effect(scm, s);
            const EffectEstimate naive = naive_whatif(fit_baseline(*data, s.outcome), s);
            const EffectEstimate truth = oracle_effect(schema, OracleConstants{}, s, val_oracle, s.seed);
            std::cout << std::left << std::setw(10) << "method" << std::right << std::setw(14) << "tau"
                      << std::setw(12) << "se" << std::setw(14) << "p05" << std::setw(14) << "p95" << "\n";
            print_effect("oracle", truth);
            print_effect("causal", causal);
            print_effect("naive", naive);
            std::cout << "abs error: causal " << std::abs(causal.tau - truth.tau) << ", naive "
                      << std::abs(naive.tau - truth.tau) << "\n";
            if (!val_out.empty())
                write_json_file({{"scenario", scenario_to_json(s)},
                                 {"oracle", effect_to_json(truth)},
                                 {"causal", effect_to_json(causal)},
                                 {"naive", effect_to_json(naive)}},
                                val_out);
        } else if (*srv) {
            ServiceOptions opt;
            if (!srv_persist.empty()) opt.persist = srv_persist;
            Service service(opt);
            serve(service, srv_host, srv_port);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ContradictionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NotFoundError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
