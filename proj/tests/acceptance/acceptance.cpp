// Acceptance gate: one PASS/FAIL line per primary criterion, with the
// measured values and timings.
//
//   acceptance [--report FILE] [--report-only]
//
// Exits 1 when any criterion fails unless --report-only is given.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "whatif/baseline.hpp"
#include "whatif/building.hpp"
#include "whatif/discovery.hpp"
#include "whatif/estimation.hpp"
#include "whatif/identify.hpp"
#include "whatif/validation.hpp"

using namespace whatif;
namespace fs = std::filesystem;

namespace {

// Pinned thresholds.
constexpr double kDsepSeconds = 30.0;
constexpr int kGesMinSeeds = 19;
constexpr double kGesRunSeconds = 5.0;
constexpr int kSkeletonMaxShd = 3;
constexpr double kAteSigmas = 3.0;
constexpr double kCateRelTol = 0.10;
constexpr double kCateSeconds = 30.0;
constexpr double kBiasFactor = 2.0;
constexpr double kBaselineMinR2 = 0.8;
constexpr double kSuiteSeconds = 300.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::vector<int> members(std::uint32_t mask, int n) {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (mask >> i & 1u) out.push_back(i);
    return out;
}

Scenario height_cate(std::uint64_t seed) {
    Scenario s;
    s.treatment = std::string(col::kHeight);
    s.outcome = std::string(col::kHeatingLoad);
    s.control = 3.0;
    s.treated = 3.2;
    s.conditions = {{std::string(col::kGroundFloorArea), 300},
                    {std::string(col::kNumberOfFloors), 3},
                    {std::string(col::kWwr), 0.3},
                    {std::string(col::kURoof), 0.2},
                    {std::string(col::kUGroundFloor), 0.2},
                    {std::string(col::kPermeability), 7.5}};
    s.n_samples = 1000;
    s.seed = seed;
    return s;
}

CausalGraph dag(int n, const std::vector<std::pair<int, int>>& edges) {
    CausalGraph g(oracle::node_names(n));
    for (auto [a, b] : edges) g.add_directed(a, b);
    return g;
}

Outcome dsep_equivalence() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> size(2, 7);
    std::uniform_real_distribution<double> density(0.15, 0.6);
    long checked = 0, mismatches = 0;
    for (int graph = 0; graph < 200; ++graph) {
        const int n = size(rng);
        const auto g = oracle::random_dag(n, density(rng), rng);
        const std::uint32_t full = 1u << n;
        for (std::uint32_t xm = 1; xm < full; ++xm)
            for (std::uint32_t ym = 1; ym < full; ++ym) {
                if (xm & ym) continue;
                const std::uint32_t rest = (full - 1) & ~(xm | ym);
                for (std::uint32_t zm = rest;; zm = (zm - 1) & rest) {
                    const auto x = members(xm, n), y = members(ym, n), z = members(zm, n);
                    ++checked;
                    if (is_d_separated(g, x, y, z) != oracle::d_separated(g, x, y, z)) ++mismatches;
                    if (zm == 0) break;
                }
            }
    }
    const double secs = seconds_since(t0);
    return {mismatches == 0 && secs < kDsepSeconds,
            std::to_string(checked) + " triples over 200 DAGs, " + std::to_string(mismatches) + " mismatches, " +
                fmt("%.1f s", secs)};
}

Outcome fork_collider_fixtures() {
    CausalGraph fork({"Area", "Strength", "Efficiency"});
    fork.add_directed("Area", "Strength");
    fork.add_directed("Area", "Efficiency");
    CausalGraph collider({"Area", "Occupancy", "Cost"});
    collider.add_directed("Area", "Cost");
    collider.add_directed("Occupancy", "Cost");
    const bool ok = !is_d_separated(fork, {"Strength"}, {"Efficiency"}, {}) &&
                    is_d_separated(fork, {"Strength"}, {"Efficiency"}, {"Area"}) &&
                    is_d_separated(collider, {"Area"}, {"Occupancy"}, {}) &&
                    !is_d_separated(collider, {"Area"}, {"Occupancy"}, {"Cost"});
    return {ok, "fork connected/separated by Area, collider separated/connected by Cost"};
}

Outcome adjustment_identification() {
    const auto t0 = Clock::now();
    const auto truth = ground_truth_dag();
    const auto i = identify_estimand(truth, col::kWindowArea, col::kHeatingLoad);
    const NodeSet expect_i{"Ground_Floor_Area", "Height", "Number_of_Floors", "WWR"};
    bool scen_i = !i.minimal_adjustment_sets.empty() && i.minimal_adjustment_sets.front() == expect_i;
    for (std::size_t k = 1; scen_i && k < i.minimal_adjustment_sets.size(); ++k)
        scen_i = i.minimal_adjustment_sets[k].size() > expect_i.size();

    const auto ii = identify_estimand(truth, col::kHeight, col::kHeatingLoad);
    const NodeSet forbidden{"External_Wall_Area", "Volume", "Window_Area"};
    const bool scen_ii = ii.minimal_adjustment_sets.size() == 1 && ii.minimal_adjustment_sets[0].empty() &&
                         ii.forbidden_nodes == forbidden;

    // Every DAG on up to 4 nodes, plus 1000 random DAGs on 5 and 6 nodes.
    long pairs = 0, mismatches = 0;
    auto compare = [&](const CausalGraph& g) {
        const int n = static_cast<int>(g.size());
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                if (x == y) continue;
                const auto r = minimal_adjustment_sets(g, g.name(x), g.name(y));
                ++pairs;
                if (r.null_effect != !oracle::ancestors_of(g, {y})[static_cast<std::size_t>(x)]) {
                    ++mismatches;
                    continue;
                }
                if (r.null_effect) continue;
                auto got = r.sets;
                std::sort(got.begin(), got.end());
                if (got != oracle::minimal_backdoor_sets(g, x, y)) ++mismatches;
            }
    };
    for (int n = 2; n <= 4; ++n)
        for (const auto& g : oracle::all_dags(n)) compare(g);
    std::mt19937_64 rng(77);
    for (int k = 0; k < 1000; ++k) compare(oracle::random_dag(5 + k % 2, 0.2 + 0.5 * (k % 7) / 6.0, rng));

    std::ostringstream d;
    d << "scenario i " << (scen_i ? "ok" : "wrong") << " (" << i.minimal_adjustment_sets.size()
      << " minimal sets, smallest unique), scenario ii " << (scen_ii ? "ok" : "wrong") << ", " << pairs
      << " (x,y) pairs vs brute force, " << mismatches << " mismatches, " << fmt("%.1f s", seconds_since(t0));
    return {scen_i && scen_ii && mismatches == 0, d.str()};
}

Outcome ges_recovery() {
    struct Case {
        const char* name;
        CausalGraph truth;
    };
    const std::vector<Case> cases = {
        {"chain", dag(3, {{0, 1}, {1, 2}})},
        {"fork", dag(3, {{1, 0}, {1, 2}})},
        {"collider", dag(3, {{0, 2}, {1, 2}})},
        {"diamond", dag(5, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}})},
    };
    bool ok = true;
    double slowest = 0;
    std::ostringstream d;
    for (const auto& c : cases) {
        int hits = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto ds = oracle::sample_linear_gaussian(c.truth, 5000, seed);
            const auto t0 = Clock::now();
            const auto r = ges_discover(ds);
            slowest = std::max(slowest, seconds_since(t0));
            if (r.cpdag == cpdag_of_dag(c.truth)) ++hits;
        }
        ok = ok && hits >= kGesMinSeeds;
        d << c.name << " " << hits << "/20, ";
    }
    for (int p = 3; p <= 4; ++p) {
        const auto dags = oracle::all_dags(p);
        std::mt19937_64 rng(100 + static_cast<std::uint64_t>(p));
        int hits = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto truth = oracle::random_dag(p, 0.5, rng);
            const auto ds = oracle::sample_linear_gaussian(truth, 2000, seed);
            BicScore score(ds, GesConfig{});
            double best = -INFINITY;
            const CausalGraph* arg = nullptr;
            for (const auto& g : dags) {
                const double v = score.total(g);
                if (v > best + 1e-9) {
                    best = v;
                    arg = &g;
                }
            }
            const auto t0 = Clock::now();
            const auto r = ges_discover(ds);
            slowest = std::max(slowest, seconds_since(t0));
            if (r.cpdag == cpdag_of_dag(*arg)) ++hits;
        }
        ok = ok && hits >= kGesMinSeeds;
        d << "exhaustive p=" << p << " " << hits << "/20, ";
    }
    ok = ok && slowest < kGesRunSeconds;
    d << fmt("slowest run %.3f s", slowest);
    return {ok, d.str()};
}

Outcome case_study_skeleton() {
    const auto ds = generate_dataset(default_schema(), 1000, 1, 0.005);
    const auto t0 = Clock::now();
    const auto r = ges_discover(ds);
    const double secs = seconds_since(t0);
    auto target = ground_truth_dag().skeleton();
    target.add_undirected(col::kExternalWallArea, col::kWindowArea);
    const int shd = oracle::skeleton_shd(r.cpdag, target);
    const bool isolated = r.cpdag.adjacents(r.cpdag.index(col::kUInternalWall)).empty() &&
                          r.cpdag.adjacents(r.cpdag.index(col::kUInternalFloor)).empty();
    bool pruned_ok = false;
    std::string prune_note;
    KnowledgeConstraints k;
    k.forbidden = {{std::string(col::kExternalWallArea), std::string(col::kWindowArea)},
                   {std::string(col::kWindowArea), std::string(col::kExternalWallArea)}};
    try {
        pruned_ok = apply_knowledge(r.cpdag, k) == ground_truth_dag();
        prune_note = pruned_ok ? "pruned graph equals ground truth" : "pruned graph differs from ground truth";
    } catch (const std::exception& e) {
        prune_note = std::string("pruning failed: ") + e.what();
    }
    std::ostringstream d;
    d << "skeleton SHD " << shd << " (max " << kSkeletonMaxShd << "), internal u-values "
      << (isolated ? "isolated" : "connected") << ", " << prune_note << ", " << fmt("%.3f s", secs);
    return {shd <= kSkeletonMaxShd && isolated && pruned_ok, d.str()};
}

Outcome ate_exactness() {
    int inside = 0;
    double worst_identity = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> z;
        Eigen::MatrixXd v(1000, 3);
        for (int i = 0; i < 1000; ++i) {
            v(i, 0) = z(rng);
            v(i, 1) = 0.8 * v(i, 0) + z(rng);
            v(i, 2) = 2 * v(i, 1) + v(i, 0) + z(rng);
        }
        const auto ds = std::make_shared<const Dataset>(
            std::vector<ColumnInfo>{{"x", "", ColumnRole::Sampled}, {"t", "", ColumnRole::Sampled}, {"y", "", ColumnRole::Outcome}},
            v, seed);
        CausalGraph g({"x", "t", "y"});
        g.add_directed("x", "t");
        g.add_directed("x", "y");
        g.add_directed("t", "y");
        const auto scm = fit_scm(ds, g, Expansion::Linear);
        Scenario s;
        s.treatment = "t";
        s.outcome = "y";
        s.control = 0;
        s.treated = 1;
        s.seed = seed;
        const auto e = estimate_ate(scm, s);
        if (std::abs(e.tau - 2.0) <= kAteSigmas * e.se) ++inside;
        double sum = 0;
        for (double u : e.unit_effects) sum += u;
        worst_identity = std::max(worst_identity, std::abs(sum / static_cast<double>(e.unit_effects.size()) - e.tau));
    }
    return {inside == 10 && worst_identity <= 1e-12,
            std::to_string(inside) + "/10 seeds within 3 SE of 2.0, unit-effect mean identity error " +
                fmt("%.1e", worst_identity)};
}

struct CaseRun {
    double causal = 0;
    double naive = 0;
    double truth = 0;
};

CaseRun run_case(std::uint64_t seed) {
    const auto data = std::make_shared<const Dataset>(generate_dataset(default_schema(), 1000, seed, 0.005));
    const auto s = height_cate(seed);
    const auto scm = fit_scm(data, ground_truth_dag());
    EstimateOptions opt;
    opt.model_draws = 0;
    CaseRun r;
    r.causal = estimate_effect(scm, s, opt).tau;
    r.naive = naive_whatif(fit_baseline(*data, s.outcome), s).tau;
    r.truth = oracle_effect(default_schema(), OracleConstants{}, s, 200, seed).tau;
    return r;
}

Outcome cate_validation() {
    const auto t0 = Clock::now();
    const auto data = std::make_shared<const Dataset>(generate_dataset(default_schema(), 1000, 1, 0.005));
    const auto s = height_cate(1);
    const auto scm = fit_scm(data, ground_truth_dag());
    const auto est = estimate_effect(scm, s);
    const double secs = seconds_since(t0);
    const auto truth = oracle_effect(default_schema(), OracleConstants{}, s, 200, 1);
    const double rel = std::abs(est.tau - truth.tau) / std::abs(truth.tau);
    std::ostringstream d;
    d << fmt("estimate %.1f", est.tau) << fmt(" (se %.1f)", est.se) << fmt(" vs oracle %.1f kWh/a", truth.tau)
      << fmt(", relative error %.1f%%", 100 * rel) << fmt(", %.1f s", secs);
    return {rel <= kCateRelTol && secs < kCateSeconds, d.str()};
}

Outcome baseline_bias() {
    double naive_err = 0, causal_err = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto r = run_case(seed);
        naive_err += std::abs(r.naive - r.truth) / 10.0;
        causal_err += std::abs(r.causal - r.truth) / 10.0;
    }
    const auto cv = cross_validate(generate_dataset(default_schema(), 1000, 1, 0.005), col::kHeatingLoad, 4);
    std::ostringstream d;
    d << fmt("mean |naive error| %.1f", naive_err) << fmt(" vs mean |causal error| %.1f", causal_err)
      << fmt(" (ratio %.1f)", naive_err / causal_err) << fmt(", baseline 4-fold R2 %.3f", cv.r2)
      << fmt(", MAPE %.1f%%", cv.mape);
    return {naive_err >= kBiasFactor * causal_err && cv.r2 >= kBaselineMinR2, d.str()};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(WHATIF_CLI) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    const fs::path dir = fs::temp_directory_path() / ("whatif_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    // Design inputs are sampled independently, so no edge may join two of them.
    std::ostringstream k;
    k << "{\"forbidden\": [";
    const auto inputs = BuildingConfig::field_names();
    bool first = true;
    for (auto a : inputs)
        for (auto b : inputs)
            if (a != b) {
                k << (first ? "" : ", ") << "[\"" << a << "\", \"" << b << "\"]";
                first = false;
            }
    k << "]}";
    std::ofstream(dir / "knowledge.json") << k.str();
    std::vector<std::string> outputs[2];
    bool ran = true;
    for (int pass = 0; pass < 2; ++pass) {
        const auto p = [&](const char* name) { return (dir / (std::to_string(pass) + name)).string(); };
        ran = ran && run_cli("generate -n 1000 --seed 7 -o " + p("data.csv")) == 0;
        ran = ran && run_cli("discover --data " + p("data.csv") + " -o " + p("graph.json") + " --report " +
                             p("report.json")) == 0;
        ran = ran && run_cli("prune --graph " + p("graph.json") + " --knowledge " + (dir / "knowledge.json").string() +
                             " -o " + p("pruned.json")) == 0;
        ran = ran && run_cli("estimate --data " + p("data.csv") + " --graph " + p("pruned.json") +
                             " --treatment Height --control 3 --treated 3.2 --seed 3 -o " + p("estimate.json")) == 0;
        for (const char* f : {"data.csv", "graph.json", "report.json", "pruned.json", "estimate.json"}) outputs[pass].push_back(slurp(p(f)));
    }
    fs::remove_all(dir);
    const bool same = ran && outputs[0] == outputs[1] && !outputs[0].back().empty();
    return {same, ran ? (same ? "data, graph, report, pruned graph and estimate byte-identical across two runs"
                              : "outputs differ between runs")
                      : "a CLI step failed"};
}

}  // namespace

int main(int argc, char** argv) {
    std::string report_path;
    bool report_only = false;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--report" && i + 1 < argc)
            report_path = argv[++i];
        else if (a == "--report-only")
            report_only = true;
        else {
            std::cerr << "usage: acceptance [--report FILE] [--report-only]\n";
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"d-separation matches path enumeration", dsep_equivalence},
        {"fork and collider fixtures", fork_collider_fixtures},
        {"adjustment set identification", adjustment_identification},
        {"GES recovery on small linear-Gaussian SCMs", ges_recovery},
        {"case-study skeleton", case_study_skeleton},
        {"linear ATE exactness", ate_exactness},
        {"conditional height effect against the oracle", cate_validation},
        {"naive baseline bias", baseline_bias},
        {"CLI determinism", determinism},
    };

    std::ostringstream out;
    const auto t0 = Clock::now();
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        const auto c0 = Clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::string line = std::string(o.pass ? "PASS" : "FAIL") + "  " + name + ": " + o.detail + " [" +
                           fmt("%.1f s", seconds_since(c0)) + "]";
        std::cout << line << std::endl;
        out << line << "\n";
    }
    const double total = seconds_since(t0);
    const bool suite_ok = total < kSuiteSeconds;
    if (!suite_ok) ++failed;
    const std::string line = std::string(suite_ok ? "PASS" : "FAIL") + "  primary suite runtime: " +
                             fmt("%.1f s", total) + fmt(" (limit %.0f s)", kSuiteSeconds);
    std::cout << line << std::endl;
    out << line << "\n";
    std::cout << failed << " of " << criteria.size() + 1 << " criteria failed" << std::endl;
    out << failed << " of " << criteria.size() + 1 << " criteria failed\n";
    if (!report_path.empty()) std::ofstream(report_path) << out.str();
    return failed == 0 || report_only ? 0 : 1;
}
