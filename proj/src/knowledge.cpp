#include <algorithm>
#include <map>

#include "whatif/error.hpp"
#include "whatif/graph.hpp"

namespace whatif {

namespace {

bool r1(const CausalGraph& g, int a, int b) {
    // c -> a -- b, c and b non-adjacent
    for (int c : g.parents(a))
        if (c != b && !g.adjacent(c, b)) return true;
    return false;
}

bool r2(const CausalGraph& g, int a, int b) {
    // a -> c -> b
    for (int c : g.children(a))
        if (g.directed(c, b)) return true;
    return false;
}

bool r3(const CausalGraph& g, int a, int b) {
    // a -- c -> b, a -- d -> b, c and d non-adjacent
    std::vector<int> cand;
    for (int c : g.neighbors(a))
        if (c != b && g.directed(c, b)) cand.push_back(c);
    for (std::size_t i = 0; i < cand.size(); ++i)
        for (std::size_t j = i + 1; j < cand.size(); ++j)
            if (!g.adjacent(cand[i], cand[j])) return true;
    return false;
}

bool r4(const CausalGraph& g, int a, int b) {
    // a -- c -> d -> b, a adjacent to d, c and b non-adjacent
    for (int d : g.parents(b)) {
        if (d == a || !g.adjacent(a, d)) continue;
        for (int c : g.parents(d)) {
            if (c != b && g.undirected(a, c) && !g.adjacent(c, b)) return true;
        }
    }
    return false;
}

std::optional<std::pair<int, int>> find_cycle_edge(const CausalGraph& g) {
    if (!g.has_directed_cycle()) return std::nullopt;
    // Some edge whose reversal closes a cycle: u -> v with v reaching u.
    const int p = static_cast<int>(g.size());
    for (int u = 0; u < p; ++u) {
        for (int v : g.children(u)) {
            if (g.descendants(v)[static_cast<std::size_t>(u)]) return std::make_pair(u, v);
        }
    }
    return std::nullopt;
}

}  // namespace

int meek_closure(CausalGraph& g) {
    int oriented = 0;
    const int p = static_cast<int>(g.size());
    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < p; ++a) {
            for (int b = 0; b < p; ++b) {
                if (a == b || !g.undirected(a, b)) continue;
                if (r1(g, a, b) || r2(g, a, b) || r3(g, a, b) || r4(g, a, b)) {
                    g.orient(a, b);
                    ++oriented;
                    changed = true;
                }
            }
        }
    }
    return oriented;
}

CausalGraph apply_knowledge(const CausalGraph& g, const KnowledgeConstraints& k) {
    const int p = static_cast<int>(g.size());
    std::vector<char> required(static_cast<std::size_t>(p * p), 0);
    std::vector<char> forbidden(static_cast<std::size_t>(p * p), 0);
    auto cell = [p](int a, int b) { return static_cast<std::size_t>(a * p + b); };

    std::map<int, std::size_t> tier_of;
    for (std::size_t t = 0; t < k.tiers.size(); ++t) {
        for (const auto& n : k.tiers[t]) {
            if (!tier_of.emplace(g.index(n), t).second) {
                throw ValidationError("node " + n + " appears in more than one tier");
            }
        }
    }
    for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) {
            auto ta = tier_of.find(a), tb = tier_of.find(b);
            if (a != b && ta != tier_of.end() && tb != tier_of.end() && ta->second > tb->second)
                forbidden[cell(a, b)] = 1;
        }
    }
    for (const auto& [from, to] : k.forbidden) {
        const int a = g.index(from), b = g.index(to);
        if (a == b) throw ValidationError("forbidden self-loop on " + from);
        forbidden[cell(a, b)] = 1;
    }
    for (const auto& [from, to] : k.required) {
        const int a = g.index(from), b = g.index(to);
        if (a == b) throw ValidationError("required self-loop on " + from);
        const std::string label = from + " -> " + to;
        if (forbidden[cell(a, b)]) {
            throw ContradictionError("required edge " + label + " is forbidden", label);
        }
        if (required[cell(b, a)]) {
            throw ContradictionError("edge " + label + " is required in both directions", label);
        }
        if (!g.adjacent(a, b)) {
            throw ContradictionError("required edge " + label + " is not an adjacency of the graph", label);
        }
        required[cell(a, b)] = 1;
    }

    CausalGraph out = g;
    for (int a = 0; a < p; ++a) {
        for (int b = a + 1; b < p; ++b) {
            if (!g.adjacent(a, b)) continue;
            if (forbidden[cell(a, b)] && forbidden[cell(b, a)]) {
                out.remove_edge(a, b);
                continue;
            }
            for (auto [u, v] : {std::pair{a, b}, std::pair{b, a}}) {
                if (g.directed(u, v) && (forbidden[cell(u, v)] || required[cell(v, u)])) {
                    const std::string label = edge_label(g, u, v);
                    throw ContradictionError("constraint conflicts with oriented edge " + label, label);
                }
            }
            if (!g.undirected(a, b)) continue;
            const bool want_ab = required[cell(a, b)] || forbidden[cell(b, a)];
            const bool want_ba = required[cell(b, a)] || forbidden[cell(a, b)];
            if (want_ab && want_ba) {
                const std::string label = edge_label(g, a, b);
                throw ContradictionError("conflicting orientations for " + label, label);
            }
            if (want_ab) out.orient(a, b);
            if (want_ba) out.orient(b, a);
        }
    }

    auto check_cycle = [&] {
        if (auto e = find_cycle_edge(out)) {
            const std::string label = edge_label(out, e->first, e->second);
            throw ContradictionError("constraints create a directed cycle through " + label, label);
        }
    };
    check_cycle();
    meek_closure(out);
    check_cycle();
    for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) {
            if (out.directed(a, b) && forbidden[cell(a, b)]) {
                const std::string label = edge_label(out, a, b);
                throw ContradictionError("orientation rules force forbidden edge " + label, label);
            }
        }
    }
    out.set_bold_edges(g.bold_edges());
    return out;
}

CausalGraph cpdag_of_dag(const CausalGraph& dag) {
    if (!dag.is_dag()) throw ValidationError("cpdag_of_dag requires an acyclic, fully directed graph");
    const int p = static_cast<int>(dag.size());
    CausalGraph out(dag.nodes());
    for (int b = 0; b < p; ++b) {
        const auto pa = dag.parents(b);
        for (int a : pa) {
            bool in_v_structure = false;
            for (int c : pa) {
                if (c != a && !dag.adjacent(a, c)) {
                    in_v_structure = true;
                    break;
                }
            }
            if (in_v_structure) out.add_directed(a, b);
            else out.add_undirected(a, b);
        }
    }
    meek_closure(out);
    return out;
}

std::optional<CausalGraph> dag_extension(const CausalGraph& pdag) {
    const int p = static_cast<int>(pdag.size());
    CausalGraph work = pdag;
    CausalGraph out = pdag;
    std::vector<char> removed(static_cast<std::size_t>(p), 0);
    for (int round = 0; round < p; ++round) {
        int pick = -1;
        for (int x = 0; x < p && pick < 0; ++x) {
            if (removed[static_cast<std::size_t>(x)]) continue;
            bool sink = true;
            for (int c : work.children(x))
                if (!removed[static_cast<std::size_t>(c)]) sink = false;
            if (!sink) continue;
            std::vector<int> adj;
            for (int a : work.adjacents(x))
                if (!removed[static_cast<std::size_t>(a)]) adj.push_back(a);
            bool ok = true;
            for (int y : work.neighbors(x)) {
                if (removed[static_cast<std::size_t>(y)]) continue;
                for (int z : adj)
                    if (z != y && !work.adjacent(y, z)) ok = false;
            }
            if (ok) pick = x;
        }
        if (pick < 0) return std::nullopt;
        for (int y : work.neighbors(pick)) {
            if (!removed[static_cast<std::size_t>(y)]) out.orient(y, pick);
        }
        removed[static_cast<std::size_t>(pick)] = 1;
    }
    return out;
}

}  // namespace whatif
