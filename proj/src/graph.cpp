#include "whatif/graph.hpp"

#include <algorithm>
#include <deque>

#include "whatif/error.hpp"

namespace whatif {

CausalGraph::CausalGraph(std::vector<std::string> nodes) : names_(std::move(nodes)) {
    const std::size_t p = names_.size();
    for (std::size_t i = 0; i < p; ++i) {
        if (names_[i].empty()) throw ValidationError("empty node name");
        if (!lookup_.emplace(names_[i], static_cast<int>(i)).second) {
            throw ValidationError("duplicate node " + names_[i]);
        }
    }
    dir_.assign(p * p, 0);
    und_.assign(p * p, 0);
}

int CausalGraph::index(std::string_view name) const {
    auto it = lookup_.find(std::string(name));
    if (it == lookup_.end()) throw ValidationError("unknown node " + std::string(name));
    return it->second;
}

std::optional<int> CausalGraph::find(std::string_view name) const {
    auto it = lookup_.find(std::string(name));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::size_t CausalGraph::at(int a, int b) const {
    return static_cast<std::size_t>(a) * names_.size() + static_cast<std::size_t>(b);
}

void CausalGraph::check_pair(int a, int b) const {
    const int p = static_cast<int>(names_.size());
    if (a < 0 || b < 0 || a >= p || b >= p) throw ValidationError("node index out of range");
    if (a == b) throw ValidationError("self-loop on " + names_[static_cast<std::size_t>(a)]);
}

void CausalGraph::add_directed(int from, int to) {
    check_pair(from, to);
    if (adjacent(from, to)) {
        throw ValidationError("nodes " + name(from) + " and " + name(to) + " are already adjacent");
    }
    dir_[at(from, to)] = 1;
    ++directed_count_;
}

void CausalGraph::add_undirected(int a, int b) {
    check_pair(a, b);
    if (adjacent(a, b)) {
        throw ValidationError("nodes " + name(a) + " and " + name(b) + " are already adjacent");
    }
    und_[at(a, b)] = und_[at(b, a)] = 1;
    ++undirected_count_;
}

void CausalGraph::remove_edge(int a, int b) {
    check_pair(a, b);
    if (dir_[at(a, b)]) {
        dir_[at(a, b)] = 0;
        --directed_count_;
    } else if (dir_[at(b, a)]) {
        dir_[at(b, a)] = 0;
        --directed_count_;
    } else if (und_[at(a, b)]) {
        und_[at(a, b)] = und_[at(b, a)] = 0;
        --undirected_count_;
    }
}

void CausalGraph::orient(int from, int to) {
    check_pair(from, to);
    if (!undirected(from, to)) {
        throw ValidationError("no undirected edge " + name(from) + " -- " + name(to));
    }
    und_[at(from, to)] = und_[at(to, from)] = 0;
    --undirected_count_;
    dir_[at(from, to)] = 1;
    ++directed_count_;
}

std::vector<int> CausalGraph::parents(int v) const {
    std::vector<int> out;
    for (int u = 0; u < static_cast<int>(size()); ++u)
        if (dir_[at(u, v)]) out.push_back(u);
    return out;
}

std::vector<int> CausalGraph::children(int v) const {
    std::vector<int> out;
    for (int u = 0; u < static_cast<int>(size()); ++u)
        if (dir_[at(v, u)]) out.push_back(u);
    return out;
}

std::vector<int> CausalGraph::neighbors(int v) const {
    std::vector<int> out;
    for (int u = 0; u < static_cast<int>(size()); ++u)
        if (und_[at(v, u)]) out.push_back(u);
    return out;
}

std::vector<int> CausalGraph::adjacents(int v) const {
    std::vector<int> out;
    for (int u = 0; u < static_cast<int>(size()); ++u)
        if (u != v && adjacent(u, v)) out.push_back(u);
    return out;
}

bool CausalGraph::has_directed_cycle() const {
    const int p = static_cast<int>(size());
    std::vector<int> indegree(static_cast<std::size_t>(p), 0);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            if (dir_[at(a, b)]) ++indegree[static_cast<std::size_t>(b)];
    std::vector<int> stack;
    for (int v = 0; v < p; ++v)
        if (indegree[static_cast<std::size_t>(v)] == 0) stack.push_back(v);
    int seen = 0;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        ++seen;
        for (int c = 0; c < p; ++c)
            if (dir_[at(v, c)] && --indegree[static_cast<std::size_t>(c)] == 0) stack.push_back(c);
    }
    return seen != p;
}

std::vector<int> CausalGraph::topological_order() const {
    const int p = static_cast<int>(size());
    std::vector<int> indegree(static_cast<std::size_t>(p), 0);
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            if (dir_[at(a, b)]) ++indegree[static_cast<std::size_t>(b)];
    std::vector<int> order;
    std::vector<bool> done(static_cast<std::size_t>(p), false);
    order.reserve(static_cast<std::size_t>(p));
    // Kahn's algorithm, always taking the lowest ready index.
    for (int step = 0; step < p; ++step) {
        int next = -1;
        for (int v = 0; v < p; ++v) {
            if (!done[static_cast<std::size_t>(v)] && indegree[static_cast<std::size_t>(v)] == 0) {
                next = v;
                break;
            }
        }
        if (next < 0) throw ValidationError("graph contains a directed cycle");
        done[static_cast<std::size_t>(next)] = true;
        order.push_back(next);
        for (int c = 0; c < p; ++c)
            if (dir_[at(next, c)]) --indegree[static_cast<std::size_t>(c)];
    }
    return order;
}

std::vector<bool> CausalGraph::descendants(int v) const {
    std::vector<bool> seen(size(), false);
    std::vector<int> stack{v};
    seen[static_cast<std::size_t>(v)] = true;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int c : children(u)) {
            if (!seen[static_cast<std::size_t>(c)]) {
                seen[static_cast<std::size_t>(c)] = true;
                stack.push_back(c);
            }
        }
    }
    return seen;
}

std::vector<bool> CausalGraph::ancestors(std::span<const int> of) const {
    std::vector<bool> seen(size(), false);
    std::vector<int> stack;
    for (int v : of) {
        if (!seen[static_cast<std::size_t>(v)]) {
            seen[static_cast<std::size_t>(v)] = true;
            stack.push_back(v);
        }
    }
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int pa : parents(u)) {
            if (!seen[static_cast<std::size_t>(pa)]) {
                seen[static_cast<std::size_t>(pa)] = true;
                stack.push_back(pa);
            }
        }
    }
    return seen;
}

std::vector<Edge> CausalGraph::directed_edges() const {
    std::vector<Edge> out;
    const int p = static_cast<int>(size());
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
            if (dir_[at(a, b)]) out.emplace_back(name(a), name(b));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Edge> CausalGraph::undirected_edges() const {
    std::vector<Edge> out;
    const int p = static_cast<int>(size());
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b)
            if (und_[at(a, b)]) {
                if (name(a) < name(b)) out.emplace_back(name(a), name(b));
                else out.emplace_back(name(b), name(a));
            }
    std::sort(out.begin(), out.end());
    return out;
}

CausalGraph CausalGraph::skeleton() const {
    CausalGraph s(names_);
    const int p = static_cast<int>(size());
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b)
            if (adjacent(a, b)) s.add_undirected(a, b);
    return s;
}

bool operator==(const CausalGraph& a, const CausalGraph& b) {
    if (a.size() != b.size()) return false;
    for (const auto& n : a.names_)
        if (!b.find(n)) return false;
    return a.directed_edges() == b.directed_edges() && a.undirected_edges() == b.undirected_edges();
}

std::string edge_label(const CausalGraph& g, int from, int to) {
    return g.name(from) + " -> " + g.name(to);
}

// --- d-separation ----------------------------------------------------------

namespace {

void require_dag(const CausalGraph& g) {
    if (!g.fully_directed()) throw ValidationError("requires fully oriented DAG");
    if (g.has_directed_cycle()) throw ValidationError("requires fully oriented DAG (cycle found)");
}

std::vector<int> resolve(const CausalGraph& g, const std::vector<std::string>& names) {
    std::vector<int> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(g.index(n));
    return out;
}

}  // namespace

bool is_d_separated(const CausalGraph& g, std::span<const int> x, std::span<const int> y,
                    std::span<const int> z) {
    require_dag(g);
    const std::size_t p = g.size();
    std::vector<char> in_x(p, 0), in_y(p, 0), in_z(p, 0);
    for (int v : x) in_x[static_cast<std::size_t>(v)] = 1;
    for (int v : y) {
        if (in_x[static_cast<std::size_t>(v)]) throw ValidationError("X and Y must be disjoint");
        in_y[static_cast<std::size_t>(v)] = 1;
    }
    for (int v : z) {
        if (in_x[static_cast<std::size_t>(v)] || in_y[static_cast<std::size_t>(v)])
            throw ValidationError("Z must be disjoint from X and Y");
        in_z[static_cast<std::size_t>(v)] = 1;
    }
    const std::vector<bool> an_z = g.ancestors(z);

    // Reachability over (node, direction) states. `up` means the trail
    // arrived from a child, `down` that it arrived from a parent.
    enum : int { kUp = 0, kDown = 1 };
    std::vector<char> visited(p * 2, 0);
    std::deque<std::pair<int, int>> queue;
    for (int v : x) queue.emplace_back(v, kUp);
    while (!queue.empty()) {
        auto [v, dir] = queue.front();
        queue.pop_front();
        const std::size_t key = static_cast<std::size_t>(v) * 2 + static_cast<std::size_t>(dir);
        if (visited[key]) continue;
        visited[key] = 1;
        const bool conditioned = in_z[static_cast<std::size_t>(v)] != 0;
        if (!conditioned && in_y[static_cast<std::size_t>(v)]) return false;
        if (dir == kUp) {
            if (conditioned) continue;
            for (int pa : g.parents(v)) queue.emplace_back(pa, kUp);
            for (int c : g.children(v)) queue.emplace_back(c, kDown);
        } else {
            if (!conditioned) {
                for (int c : g.children(v)) queue.emplace_back(c, kDown);
            }
            if (an_z[static_cast<std::size_t>(v)]) {
                for (int pa : g.parents(v)) queue.emplace_back(pa, kUp);
            }
        }
    }
    return true;
}

bool is_d_separated(const CausalGraph& g, const std::vector<std::string>& x,
                    const std::vector<std::string>& y, const std::vector<std::string>& z) {
    const auto xi = resolve(g, x);
    const auto yi = resolve(g, y);
    const auto zi = resolve(g, z);
    return is_d_separated(g, xi, yi, zi);
}

std::string_view to_string(NodeRole role) {
    switch (role) {
        case NodeRole::Chain: return "chain";
        case NodeRole::Fork: return "fork";
        case NodeRole::Collider: return "collider";
    }
    return "chain";
}

PathReport classify_paths(const CausalGraph& g, std::string_view x_name, std::string_view y_name,
                          const std::vector<std::string>& z_names, std::size_t max_paths) {
    require_dag(g);
    const int x = g.index(x_name);
    const int y = g.index(y_name);
    if (x == y) throw ValidationError("path endpoints must differ");
    const auto z = resolve(g, z_names);
    std::vector<char> in_z(g.size(), 0);
    for (int v : z) in_z[static_cast<std::size_t>(v)] = 1;
    const std::vector<bool> an_z = g.ancestors(z);

    std::vector<std::vector<int>> adj(g.size());
    for (int v = 0; v < static_cast<int>(g.size()); ++v) {
        adj[static_cast<std::size_t>(v)] = g.adjacents(v);
        std::sort(adj[static_cast<std::size_t>(v)].begin(), adj[static_cast<std::size_t>(v)].end(),
                  [&](int a, int b) { return g.name(a) < g.name(b); });
    }

    PathReport report;
    std::vector<int> path{x};
    std::vector<char> on_path(g.size(), 0);
    on_path[static_cast<std::size_t>(x)] = 1;

    auto emit = [&] {
        PathDiagnostic d;
        d.blocked_given = z_names;
        std::sort(d.blocked_given.begin(), d.blocked_given.end());
        d.open = true;
        for (int v : path) d.nodes.push_back(g.name(v));
        for (std::size_t i = 1; i + 1 < path.size(); ++i) {
            const int prev = path[i - 1], v = path[i], next = path[i + 1];
            NodeRole role = NodeRole::Chain;
            if (g.directed(prev, v) && g.directed(next, v)) role = NodeRole::Collider;
            else if (g.directed(v, prev) && g.directed(v, next)) role = NodeRole::Fork;
            d.roles.push_back(role);
            const bool passes = role == NodeRole::Collider ? an_z[static_cast<std::size_t>(v)]
                                                           : !in_z[static_cast<std::size_t>(v)];
            if (!passes) d.open = false;
        }
        d.is_backdoor = g.directed(path[1], x);
        report.paths.push_back(std::move(d));
    };

    // Iterative DFS with explicit neighbour cursors.
    std::vector<std::size_t> cursor{0};
    while (!path.empty()) {
        if (report.paths.size() >= max_paths) {
            report.truncated = true;
            break;
        }
        const int v = path.back();
        auto& pos = cursor.back();
        const auto& nbrs = adj[static_cast<std::size_t>(v)];
        if (pos >= nbrs.size()) {
            on_path[static_cast<std::size_t>(v)] = 0;
            path.pop_back();
            cursor.pop_back();
            continue;
        }
        const int next = nbrs[pos++];
        if (on_path[static_cast<std::size_t>(next)]) continue;
        if (next == y) {
            path.push_back(y);
            emit();
            path.pop_back();
            continue;
        }
        path.push_back(next);
        cursor.push_back(0);
        on_path[static_cast<std::size_t>(next)] = 1;
    }
    return report;
}

}  // namespace whatif
