#pragma once

// Brute-force reference implementations used by the tests. They share no
// code with the library beyond the CausalGraph container.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "whatif/dataset.hpp"
#include "whatif/graph.hpp"

namespace oracle {

using whatif::CausalGraph;

inline std::vector<std::string> node_names(int n) {
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("V" + std::to_string(i));
    return names;
}

/// Random DAG: edges only from lower to higher index of a random
/// permutation, each present with probability `density`.
inline CausalGraph random_dag(int n, double density, std::mt19937_64& rng) {
    CausalGraph g(node_names(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::bernoulli_distribution edge(density);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (edge(rng)) g.add_directed(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    return g;
}

/// Every DAG on n labelled nodes (n <= 4 keeps this small: 543 for n = 4).
inline std::vector<CausalGraph> all_dags(int n) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    std::size_t total = 1;
    for (std::size_t k = 0; k < pairs.size(); ++k) total *= 3;
    std::vector<CausalGraph> out;
    for (std::size_t code = 0; code < total; ++code) {
        CausalGraph g(node_names(n));
        std::size_t c = code;
        for (const auto& [a, b] : pairs) {
            const std::size_t state = c % 3;
            c /= 3;
            if (state == 1) g.add_directed(a, b);
            if (state == 2) g.add_directed(b, a);
        }
        if (!g.has_directed_cycle()) out.push_back(std::move(g));
    }
    return out;
}

inline bool has_edge(const CausalGraph& g, int from, int to) { return g.directed(from, to); }

/// Ancestor flags of the set (members included), by repeated parent sweeps.
inline std::vector<bool> ancestors_of(const CausalGraph& g, const std::vector<int>& set) {
    const int n = static_cast<int>(g.size());
    std::vector<bool> anc(static_cast<std::size_t>(n), false);
    for (int v : set) anc[static_cast<std::size_t>(v)] = true;
    for (bool changed = true; changed;) {
        changed = false;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (anc[static_cast<std::size_t>(b)] && !anc[static_cast<std::size_t>(a)] && has_edge(g, a, b)) {
                    anc[static_cast<std::size_t>(a)] = true;
                    changed = true;
                }
    }
    return anc;
}

/// Calls `visit` with every simple path from `from` to `to` in the skeleton.
inline void for_each_path(const CausalGraph& g, int from, int to,
                          const std::function<void(const std::vector<int>&)>& visit) {
    const int n = static_cast<int>(g.size());
    std::vector<int> path{from};
    std::vector<bool> on(static_cast<std::size_t>(n), false);
    on[static_cast<std::size_t>(from)] = true;
    std::function<void(int)> rec = [&](int v) {
        if (v == to) {
            visit(path);
            return;
        }
        for (int w = 0; w < n; ++w) {
            if (on[static_cast<std::size_t>(w)] || !(has_edge(g, v, w) || has_edge(g, w, v))) continue;
            on[static_cast<std::size_t>(w)] = true;
            path.push_back(w);
            rec(w);
            path.pop_back();
            on[static_cast<std::size_t>(w)] = false;
        }
    };
    rec(from);
}

/// A path is open given z when every collider has a descendant in z (is an
/// ancestor of z) and no other interior node is in z.
inline bool path_open(const CausalGraph& g, const std::vector<int>& path, const std::vector<bool>& in_z,
                      const std::vector<bool>& anc_z) {
    for (std::size_t i = 1; i + 1 < path.size(); ++i) {
        const int prev = path[i - 1], v = path[i], next = path[i + 1];
        const bool collider = has_edge(g, prev, v) && has_edge(g, next, v);
        if (collider ? !anc_z[static_cast<std::size_t>(v)] : in_z[static_cast<std::size_t>(v)]) return false;
    }
    return true;
}

inline bool d_separated(const CausalGraph& g, const std::vector<int>& x, const std::vector<int>& y,
                        const std::vector<int>& z) {
    std::vector<bool> in_z(g.size(), false);
    for (int v : z) in_z[static_cast<std::size_t>(v)] = true;
    const auto anc_z = ancestors_of(g, z);
    bool open = false;
    for (int a : x)
        for (int b : y) {
            if (open) return false;
            for_each_path(g, a, b, [&](const std::vector<int>& p) {
                if (!open && path_open(g, p, in_z, anc_z)) open = true;
            });
        }
    return !open;
}

/// Backdoor criterion by definition: z holds no descendant of x and blocks
/// every x-y path whose first edge points into x.
inline bool backdoor_valid(const CausalGraph& g, int x, int y, const std::vector<int>& z) {
    for (int v : z)
        if (ancestors_of(g, {v})[static_cast<std::size_t>(x)]) return false;
    std::vector<bool> in_z(g.size(), false);
    for (int v : z) in_z[static_cast<std::size_t>(v)] = true;
    const auto anc_z = ancestors_of(g, z);
    bool open = false;
    for_each_path(g, x, y, [&](const std::vector<int>& p) {
        if (!open && has_edge(g, p[1], x) && path_open(g, p, in_z, anc_z)) open = true;
    });
    return !open;
}

/// Inclusion-minimal backdoor sets over all 2^(p-2) candidate subsets, as
/// sorted name lists in sorted order.
inline std::vector<std::vector<std::string>> minimal_backdoor_sets(const CausalGraph& g, int x, int y) {
    std::vector<int> others;
    for (int v = 0; v < static_cast<int>(g.size()); ++v)
        if (v != x && v != y) others.push_back(v);
    std::vector<std::uint32_t> valid;
    for (std::uint32_t mask = 0; mask < (1u << others.size()); ++mask) {
        std::vector<int> z;
        for (std::size_t i = 0; i < others.size(); ++i)
            if (mask >> i & 1u) z.push_back(others[i]);
        if (backdoor_valid(g, x, y, z)) valid.push_back(mask);
    }
    std::vector<std::vector<std::string>> out;
    for (auto m : valid) {
        const bool minimal = std::none_of(valid.begin(), valid.end(),
                                          [m](std::uint32_t o) { return o != m && (o & m) == o; });
        if (!minimal) continue;
        std::vector<std::string> names;
        for (std::size_t i = 0; i < others.size(); ++i)
            if (m >> i & 1u) names.push_back(g.name(others[i]));
        std::sort(names.begin(), names.end());
        out.push_back(std::move(names));
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Samples a linear-Gaussian SCM on a DAG: each node is a weighted sum of
/// its parents plus unit normal noise. Weights are drawn with magnitude in
/// [0.5, 1.5] and random sign unless given.
inline whatif::Dataset sample_linear_gaussian(const CausalGraph& dag, std::size_t n, std::uint64_t seed,
                                              double fixed_weight = 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mag(0.5, 1.5);
    std::bernoulli_distribution sign(0.5);
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto order = dag.topological_order();
    const std::size_t p = dag.size();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (int a = 0; a < static_cast<int>(p); ++a)
        for (int b = 0; b < static_cast<int>(p); ++b)
            if (dag.directed(a, b)) w(a, b) = fixed_weight != 0 ? fixed_weight : (sign(rng) ? 1 : -1) * mag(rng);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    for (std::size_t r = 0; r < n; ++r)
        for (int v : order) {
            double s = noise(rng);
            for (int u = 0; u < static_cast<int>(p); ++u)
                if (w(u, v) != 0) s += w(u, v) * x(static_cast<Eigen::Index>(r), u);
            x(static_cast<Eigen::Index>(r), v) = s;
        }
    std::vector<whatif::ColumnInfo> cols;
    for (const auto& name : dag.nodes()) cols.push_back({name, "", whatif::ColumnRole::Sampled});
    return whatif::Dataset(std::move(cols), std::move(x), seed);
}

/// Structural Hamming distance between two skeletons on the same nodes.
inline int skeleton_shd(const CausalGraph& a, const CausalGraph& b) {
    int d = 0;
    for (const auto& u : a.nodes())
        for (const auto& v : a.nodes())
            if (u < v && a.adjacent(u, v) != b.adjacent(u, v)) ++d;
    return d;
}

}  // namespace oracle
