#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "whatif/building.hpp"
#include "whatif/error.hpp"
#include "whatif/graph.hpp"

using namespace whatif;

namespace {

CausalGraph make(const std::vector<std::string>& nodes, const std::vector<Edge>& directed,
                 const std::vector<Edge>& undirected = {}) {
    CausalGraph g(nodes);
    for (const auto& [a, b] : directed) g.add_directed(a, b);
    for (const auto& [a, b] : undirected) g.add_undirected(a, b);
    return g;
}

std::vector<int> members(std::uint32_t mask, int n) {
    std::vector<int> out;
    for (int i = 0; i < n; ++i)
        if (mask >> i & 1u) out.push_back(i);
    return out;
}

// Skeleton plus the set of unshielded colliders a -> c <- b.
std::pair<std::set<std::pair<int, int>>, std::set<std::tuple<int, int, int>>> pattern(const CausalGraph& g) {
    std::set<std::pair<int, int>> skel;
    std::set<std::tuple<int, int, int>> vs;
    const int n = static_cast<int>(g.size());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (g.adjacent(a, b)) skel.insert({a, b});
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                if (g.directed(a, c) && g.directed(b, c) && !g.adjacent(a, b)) vs.insert({a, b, c});
    return {skel, vs};
}

}  // namespace

TEST(CausalGraph, EdgesAreExclusivePerPair) {
    CausalGraph g({"A", "B", "C"});
    g.add_directed("A", "B");
    EXPECT_TRUE(g.directed("A", "B"));
    EXPECT_FALSE(g.directed("B", "A"));
    EXPECT_TRUE(g.adjacent("B", "A"));
    EXPECT_THROW(g.add_undirected("A", "B"), ValidationError);
    EXPECT_THROW(g.add_directed("A", "A"), ValidationError);
    EXPECT_THROW(g.add_directed("A", "Z"), ValidationError);
    g.remove_edge("B", "A");
    EXPECT_FALSE(g.adjacent("A", "B"));
    EXPECT_EQ(g.directed_count(), 0u);
}

TEST(CausalGraph, OrientTurnsUndirectedIntoDirected) {
    CausalGraph g({"A", "B"});
    g.add_undirected("A", "B");
    EXPECT_FALSE(g.fully_directed());
    g.orient(g.index("B"), g.index("A"));
    EXPECT_TRUE(g.directed("B", "A"));
    EXPECT_TRUE(g.fully_directed());
    EXPECT_EQ(g.undirected_count(), 0u);
}

TEST(CausalGraph, TopologicalOrderRejectsCycles) {
    auto g = make({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}});
    const auto order = g.topological_order();
    EXPECT_EQ(order, (std::vector<int>{0, 1, 2}));
    g.add_directed("C", "A");
    EXPECT_TRUE(g.has_directed_cycle());
    EXPECT_THROW(g.topological_order(), ValidationError);
}

TEST(CausalGraph, EqualityIgnoresInsertionOrder) {
    const auto a = make({"A", "B", "C"}, {{"A", "B"}}, {{"B", "C"}});
    const auto b = make({"C", "B", "A"}, {{"A", "B"}}, {{"C", "B"}});
    EXPECT_EQ(a, b);
    EXPECT_NE(a, make({"A", "B", "C"}, {{"B", "A"}}, {{"B", "C"}}));
}

TEST(DSeparation, ForkFixture) {
    // Building area drives both structural strength and energy efficiency.
    const auto g = make({"Area", "Strength", "Efficiency"}, {{"Area", "Strength"}, {"Area", "Efficiency"}});
    EXPECT_FALSE(is_d_separated(g, {"Strength"}, {"Efficiency"}, {}));
    EXPECT_TRUE(is_d_separated(g, {"Strength"}, {"Efficiency"}, {"Area"}));
}

TEST(DSeparation, ColliderFixture) {
    // Operation cost is a common effect of area and occupancy.
    const auto g = make({"Area", "Occupancy", "Cost"}, {{"Area", "Cost"}, {"Occupancy", "Cost"}});
    EXPECT_TRUE(is_d_separated(g, {"Area"}, {"Occupancy"}, {}));
    EXPECT_FALSE(is_d_separated(g, {"Area"}, {"Occupancy"}, {"Cost"}));
}

TEST(DSeparation, ConditioningOnColliderDescendantOpens) {
    const auto g = make({"A", "B", "C", "D"}, {{"A", "C"}, {"B", "C"}, {"C", "D"}});
    EXPECT_TRUE(is_d_separated(g, {"A"}, {"B"}, {}));
    EXPECT_FALSE(is_d_separated(g, {"A"}, {"B"}, {"D"}));
}

TEST(DSeparation, RejectsOverlappingSetsAndCpdags) {
    const auto g = make({"A", "B"}, {{"A", "B"}});
    EXPECT_THROW(is_d_separated(g, {"A"}, {"A"}, {}), ValidationError);
    const auto p = make({"A", "B"}, {}, {{"A", "B"}});
    EXPECT_THROW(is_d_separated(p, {"A"}, {"B"}, {}), ValidationError);
}

TEST(DSeparation, MatchesPathEnumerationOnRandomDags) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 3 + trial % 3;
        const auto g = oracle::random_dag(n, 0.45, rng);
        const std::uint32_t full = 1u << n;
        for (std::uint32_t xm = 1; xm < full; ++xm)
            for (std::uint32_t ym = 1; ym < full; ++ym) {
                if (xm & ym) continue;
                const std::uint32_t rest = (full - 1) & ~(xm | ym);
                for (std::uint32_t zm = rest;; zm = (zm - 1) & rest) {
                    const auto x = members(xm, n), y = members(ym, n), z = members(zm, n);
                    ASSERT_EQ(is_d_separated(g, x, y, z), oracle::d_separated(g, x, y, z))
                        << export_graph(g, GraphFormat::Dot) << " x=" << xm << " y=" << ym << " z=" << zm;
                    if (zm == 0) break;
                }
            }
    }
}

TEST(DSeparation, SymmetricInXAndY) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = oracle::random_dag(6, 0.4, rng);
        for (int x = 0; x < 6; ++x)
            for (int y = x + 1; y < 6; ++y) {
                const std::vector<int> xs{x}, ys{y}, z{(y + 1) % 6 == x ? (y + 2) % 6 : (y + 1) % 6};
                if (z[0] == x || z[0] == y) continue;
                EXPECT_EQ(is_d_separated(g, xs, ys, z), is_d_separated(g, ys, xs, z));
            }
    }
}

TEST(PathReport, ClassifiesRolesAndBackdoor) {
    const auto g = make({"X", "Y", "Z", "M"}, {{"Z", "X"}, {"Z", "Y"}, {"X", "M"}, {"M", "Y"}});
    const auto r = classify_paths(g, "X", "Y", {"Z"});
    ASSERT_EQ(r.paths.size(), 2u);
    for (const auto& p : r.paths) {
        if (p.nodes[1] == "Z") {
            EXPECT_TRUE(p.is_backdoor);
            EXPECT_FALSE(p.open);
            EXPECT_EQ(p.roles, std::vector<NodeRole>{NodeRole::Fork});
            EXPECT_EQ(p.blocked_given, std::vector<std::string>{"Z"});
        } else {
            EXPECT_FALSE(p.is_backdoor);
            EXPECT_TRUE(p.open);
            EXPECT_EQ(p.roles, std::vector<NodeRole>{NodeRole::Chain});
        }
    }
}

TEST(PathReport, TruncatesAtLimit) {
    CausalGraph g(oracle::node_names(7));
    for (int a = 0; a < 7; ++a)
        for (int b = a + 1; b < 7; ++b) g.add_directed(a, b);
    const auto r = classify_paths(g, "V0", "V6", {}, 5);
    EXPECT_TRUE(r.truncated);
    EXPECT_EQ(r.paths.size(), 5u);
}

TEST(Cpdag, EquivalentDagsShareOneCpdag) {
    // Markov equivalence: same skeleton and unshielded colliders.
    const auto dags = oracle::all_dags(4);
    EXPECT_EQ(dags.size(), 543u);
    std::map<decltype(pattern(dags[0])), CausalGraph> by_class;
    for (const auto& d : dags) {
        const auto c = cpdag_of_dag(d);
        const auto key = pattern(d);
        auto [it, fresh] = by_class.emplace(key, c);
        if (!fresh) {
            ASSERT_EQ(it->second, c) << export_graph(d, GraphFormat::Dot);
        }
    }
    EXPECT_EQ(by_class.size(), 185u);
    std::set<std::string> distinct;
    for (const auto& [k, c] : by_class) distinct.insert(export_graph(c, GraphFormat::Json));
    EXPECT_EQ(distinct.size(), by_class.size());
}

TEST(Cpdag, DirectedEdgesAreCompelled) {
    // Every DAG in the class agrees on each directed CPDAG edge.
    const auto dags = oracle::all_dags(4);
    for (const auto& d : dags) {
        const auto c = cpdag_of_dag(d);
        for (const auto& other : dags) {
            if (pattern(other) != pattern(d)) continue;
            for (const auto& [a, b] : c.directed_edges()) ASSERT_TRUE(other.directed(a, b));
        }
    }
}

TEST(Cpdag, ExtensionRoundTrips) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = oracle::random_dag(7, 0.35, rng);
        const auto c = cpdag_of_dag(d);
        const auto ext = dag_extension(c);
        ASSERT_TRUE(ext.has_value());
        EXPECT_TRUE(ext->is_dag());
        EXPECT_EQ(pattern(*ext), pattern(d));
        EXPECT_EQ(cpdag_of_dag(*ext), c);
    }
}

TEST(Cpdag, NoExtensionForCycleForcingPdag) {
    // An undirected four-cycle cannot be oriented without a new collider.
    const auto g = make({"A", "B", "C", "D"}, {}, {{"A", "B"}, {"B", "C"}, {"C", "D"}, {"D", "A"}});
    EXPECT_FALSE(dag_extension(g).has_value());
}

TEST(Meek, RuleOneOrientsAwayFromCollider) {
    auto g = make({"A", "B", "C"}, {{"A", "B"}}, {{"B", "C"}});
    EXPECT_EQ(meek_closure(g), 1);
    EXPECT_TRUE(g.directed("B", "C"));
}

TEST(Meek, RuleTwoAvoidsCycle) {
    auto g = make({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}, {{"A", "C"}});
    meek_closure(g);
    EXPECT_TRUE(g.directed("A", "C"));
}

TEST(Meek, RuleThree) {
    // a -- c, a -- b, a -- d, b -> c, d -> c, b and d non-adjacent.
    auto g = make({"A", "B", "C", "D"}, {{"B", "C"}, {"D", "C"}}, {{"A", "B"}, {"A", "C"}, {"A", "D"}});
    meek_closure(g);
    EXPECT_TRUE(g.directed("A", "C"));
    EXPECT_TRUE(g.undirected("A", "B"));
}

TEST(Meek, ClosureIsIdempotent) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 50; ++trial) {
        auto c = cpdag_of_dag(oracle::random_dag(7, 0.4, rng));
        EXPECT_EQ(meek_closure(c), 0);
    }
}

TEST(Knowledge, EmptyConstraintsLeaveGraphUnchanged) {
    const auto raw = raw_building_cpdag();
    EXPECT_EQ(apply_knowledge(raw, {}), raw);
}

TEST(Knowledge, PruningTheWallWindowAdjacencyGivesGroundTruth) {
    KnowledgeConstraints k;
    k.forbidden = {{"External_Wall_Area", "Window_Area"}, {"Window_Area", "External_Wall_Area"}};
    const auto pruned = apply_knowledge(raw_building_cpdag(), k);
    EXPECT_EQ(pruned, ground_truth_dag());
}

TEST(Knowledge, RequiredOrientationPropagates) {
    const auto g = make({"A", "B", "C"}, {}, {{"A", "B"}, {"B", "C"}});
    KnowledgeConstraints k;
    k.required = {{"A", "B"}};
    const auto out = apply_knowledge(g, k);
    EXPECT_TRUE(out.directed("A", "B"));
    EXPECT_TRUE(out.directed("B", "C"));
}

TEST(Knowledge, TiersOrientAcrossLevels) {
    const auto g = make({"A", "B", "C"}, {}, {{"A", "B"}, {"A", "C"}});
    KnowledgeConstraints k;
    k.tiers = {{"B", "C"}, {"A"}};
    const auto out = apply_knowledge(g, k);
    EXPECT_TRUE(out.directed("B", "A"));
    EXPECT_TRUE(out.directed("C", "A"));
}

TEST(Knowledge, ContradictionsNameTheEdge) {
    const auto g = make({"A", "B", "C"}, {{"A", "B"}}, {{"B", "C"}, {"A", "C"}});
    KnowledgeConstraints k;
    k.required = {{"B", "A"}};
    try {
        apply_knowledge(g, k);
        FAIL() << "expected a contradiction";
    } catch (const ContradictionError& e) {
        EXPECT_NE(e.edge().find("A"), std::string::npos);
        EXPECT_NE(e.edge().find("B"), std::string::npos);
    }
    KnowledgeConstraints cyc;
    cyc.required = {{"B", "C"}, {"C", "A"}};
    EXPECT_THROW(apply_knowledge(g, cyc), ContradictionError);
}

TEST(Knowledge, RequiredEdgeMustBeAnAdjacency) {
    const auto g = make({"A", "B", "C"}, {}, {{"A", "B"}});
    KnowledgeConstraints k;
    k.required = {{"A", "C"}};
    EXPECT_THROW(apply_knowledge(g, k), ContradictionError);
}

TEST(Knowledge, OutputNeverViolatesConstraints) {
    std::mt19937_64 rng(21);
    int applied = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = oracle::random_dag(6, 0.4, rng);
        const auto c = cpdag_of_dag(d);
        const auto und = c.undirected_edges();
        if (und.empty()) continue;
        KnowledgeConstraints k;
        // Orientations taken from the generating DAG can never contradict.
        const auto& [a, b] = und[rng() % und.size()];
        k.required = {d.directed(a, b) ? Edge{a, b} : Edge{b, a}};
        const auto out = apply_knowledge(c, k);
        ++applied;
        EXPECT_TRUE(out.directed(k.required[0].first, k.required[0].second));
        for (const auto& [u, v] : out.directed_edges()) EXPECT_TRUE(d.directed(u, v));
        EXPECT_FALSE(out.has_directed_cycle());
    }
    EXPECT_GT(applied, 50);
}

TEST(GraphIo, DotAndJsonRoundTrip) {
    const auto g = raw_building_cpdag();
    for (auto f : {GraphFormat::Dot, GraphFormat::Json}) {
        const auto text = export_graph(g, f);
        EXPECT_EQ(parse_graph(text, f), g);
    }
    EXPECT_EQ(export_graph(ground_truth_dag(), GraphFormat::Dot).rfind("dag {", 0), 0u);
    EXPECT_EQ(export_graph(g, GraphFormat::Dot).rfind("pdag {", 0), 0u);
}

TEST(GraphIo, ParsesDagittyDot) {
    const auto g = parse_graph("dag {\n A\n B [pos=\"1,2\"]\n A -> B\n B -> C\n}\n", GraphFormat::Dot);
    EXPECT_EQ(g.size(), 3u);
    EXPECT_TRUE(g.directed("A", "B"));
    EXPECT_TRUE(g.directed("B", "C"));
}

TEST(GraphIo, RejectsMalformedInput) {
    EXPECT_THROW(parse_graph("dag { A -> }", GraphFormat::Dot), ValidationError);
    EXPECT_THROW(parse_graph("{\"nodes\": 3}", GraphFormat::Json), ValidationError);
    EXPECT_THROW(parse_graph("not json", GraphFormat::Json), ValidationError);
    EXPECT_FALSE(parse_graph_format("svg").has_value());
}

TEST(BuildingGraphs, GroundTruthShape) {
    const auto g = ground_truth_dag();
    EXPECT_EQ(g.size(), 22u);
    EXPECT_TRUE(g.is_dag());
    EXPECT_TRUE(g.adjacents(g.index("u_Value_Internal_Wall")).empty());
    EXPECT_TRUE(g.adjacents(g.index("u_Value_Internal_Floor")).empty());
    EXPECT_FALSE(g.adjacent("External_Wall_Area", "Window_Area"));
    EXPECT_TRUE(g.directed("WWR", "Window_Area"));
    EXPECT_TRUE(g.directed("Height", "Heating_Load"));
}

TEST(BuildingGraphs, RawCpdagSharesGroundTruthClassPlusOneEdge) {
    auto raw = raw_building_cpdag();
    EXPECT_TRUE(raw.undirected("External_Wall_Area", "Window_Area"));
    raw.remove_edge("External_Wall_Area", "Window_Area");
    EXPECT_EQ(raw.skeleton(), ground_truth_dag().skeleton());
}
