#include "whatif/discovery.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "whatif/error.hpp"

namespace whatif {

namespace {

using Mask = std::uint64_t;

constexpr Mask bit(int v) { return Mask{1} << v; }

std::vector<int> members(Mask m) {
    std::vector<int> out;
    while (m) {
        out.push_back(std::countr_zero(m));
        m &= m - 1;
    }
    return out;
}

}  // namespace

void GesConfig::validate() const {
    if (!(penalty_multiplier >= 0)) throw ValidationError("penalty_multiplier must be >= 0");
    if (max_parents == 0) throw ValidationError("max_parents must be >= 1");
    if (!(variance_floor > 0 && variance_floor <= 1e-6)) throw ValidationError("variance_floor must lie in (0, 1e-6]");
}

BicScore::BicScore(const Dataset& ds, const GesConfig& cfg) : n_(ds.rows()), names_(ds.names()), cfg_(cfg) {
    cfg.validate();
    if (ds.cols() > 64) throw ValidationError("structure search supports at most 64 columns");
    if (n_ < 3) throw ValidationError("scoring needs at least 3 rows");
    log_n_ = std::log(static_cast<double>(n_));
    Eigen::MatrixXd x = ds.values();
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    if (cfg.standardize) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double sd = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(n_));
            if (sd > 0) x.col(j) /= sd;
        }
    }
    cov_ = (x.transpose() * x) / static_cast<double>(n_);
}

double BicScore::compute(int target, std::uint64_t parents) const {
    if (parents & bit(target)) throw ValidationError("target " + names_[static_cast<std::size_t>(target)] + " listed among its parents");
    const auto pa = members(parents);
    const auto k = static_cast<Eigen::Index>(pa.size());
    if (n_ <= pa.size() + 2) throw ValidationError("too few rows for " + std::to_string(pa.size()) + " parents");

    double resid = cov_(target, target);
    if (k > 0) {
        Eigen::MatrixXd s(k, k);
        Eigen::VectorXd c(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            c(a) = cov_(pa[static_cast<std::size_t>(a)], target);
            for (Eigen::Index b = 0; b < k; ++b) s(a, b) = cov_(pa[static_cast<std::size_t>(a)], pa[static_cast<std::size_t>(b)]);
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
        const double scale = std::max(s.diagonal().maxCoeff(), 1e-300);
        const bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                              ldlt.vectorD().minCoeff() <= 1e-13 * scale;
        if (singular) {
            s.diagonal().array() += kRidgeDamping;
            ldlt.compute(s);
        }
        const Eigen::VectorXd beta = ldlt.solve(c);
        resid -= c.dot(beta);
    }
    const double n = static_cast<double>(n_);
    const double var = std::max(resid, cfg_.variance_floor);
    return -0.5 * n * std::log(var) - cfg_.penalty_multiplier * 0.5 * static_cast<double>(k + 1) * log_n_;
}

double BicScore::local(int target, std::uint64_t parents) {
    const Key key{target, parents};
    if (auto it = cache_.find(key); it != cache_.end()) {
        ++hits_;
        return it->second;
    }
    ++misses_;
    const double v = compute(target, parents);
    cache_.emplace(key, v);
    return v;
}

double BicScore::total(const CausalGraph& dag) {
    if (!dag.fully_directed()) throw ValidationError("total score requires a fully directed graph");
    std::vector<int> column(dag.size());
    for (std::size_t v = 0; v < dag.size(); ++v) {
        auto it = std::find(names_.begin(), names_.end(), dag.name(static_cast<int>(v)));
        if (it == names_.end()) throw ValidationError("unknown column " + dag.name(static_cast<int>(v)));
        column[v] = static_cast<int>(it - names_.begin());
    }
    double sum = 0;
    for (std::size_t v = 0; v < dag.size(); ++v) {
        Mask pa = 0;
        for (int u : dag.parents(static_cast<int>(v))) pa |= bit(column[static_cast<std::size_t>(u)]);
        sum += local(column[v], pa);
    }
    return sum;
}

double local_bic(const Dataset& ds, std::string_view target, const std::vector<std::string>& parents,
                 const GesConfig& cfg) {
    BicScore score(ds, cfg);
    Mask pa = 0;
    for (const auto& p : parents) pa |= bit(static_cast<int>(ds.index(p)));
    return score.compute(static_cast<int>(ds.index(target)), pa);
}

double score_cpdag(BicScore& score, const CausalGraph& cpdag) {
    auto dag = dag_extension(cpdag);
    if (!dag) throw ValidationError("graph admits no consistent DAG extension");
    return score.total(*dag);
}

// --- GES -------------------------------------------------------------------

namespace {

/// Bitmask view of a PDAG used inside the search.
struct Pdag {
    std::vector<Mask> pa;  // directed parents
    std::vector<Mask> ch;  // directed children
    std::vector<Mask> ne;  // undirected neighbours

    explicit Pdag(std::size_t p) : pa(p, 0), ch(p, 0), ne(p, 0) {}

    Mask adj(int v) const { return pa[static_cast<std::size_t>(v)] | ch[static_cast<std::size_t>(v)] | ne[static_cast<std::size_t>(v)]; }

    bool clique(Mask m) const {
        for (int v : members(m))
            if ((m & ~bit(v) & ~adj(v)) != 0) return false;
        return true;
    }

    /// True when every semi-directed path from `from` to `to` meets `block`.
    bool blocks_semi_directed(int from, int to, Mask block) const {
        Mask seen = bit(from);
        std::vector<int> stack{from};
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            Mask next = (ch[static_cast<std::size_t>(v)] | ne[static_cast<std::size_t>(v)]) & ~seen;
            if (next & bit(to)) return false;
            next &= ~block;
            seen |= next;
            for (int u : members(next)) stack.push_back(u);
        }
        return true;
    }

    static Pdag from_graph(const CausalGraph& g) {
        Pdag d(g.size());
        for (std::size_t v = 0; v < g.size(); ++v) {
            for (int u : g.parents(static_cast<int>(v))) d.pa[v] |= bit(u);
            for (int u : g.children(static_cast<int>(v))) d.ch[v] |= bit(u);
            for (int u : g.neighbors(static_cast<int>(v))) d.ne[v] |= bit(u);
        }
        return d;
    }

    CausalGraph to_graph(const std::vector<std::string>& names) const {
        CausalGraph g(names);
        for (std::size_t v = 0; v < pa.size(); ++v) {
            for (int u : members(ch[v])) g.add_directed(static_cast<int>(v), u);
            for (int u : members(ne[v]))
                if (static_cast<std::size_t>(u) > v) g.add_undirected(static_cast<int>(v), u);
        }
        return g;
    }
};

struct Candidate {
    bool valid = false;
    int from = -1;
    int to = -1;
    Mask subset = 0;
    double delta = 0;
};

constexpr double kMinImprovement = 1e-9;

/// Enumerates subsets of `pool` (ascending element order, include-first
/// recursion) whose union with `base` is a clique, calling `visit(subset)`.
template <typename Visit>
void clique_subsets(const Pdag& g, Mask base, const std::vector<int>& pool, std::size_t i, Mask chosen,
                    std::size_t budget, Visit&& visit) {
    if (i == pool.size()) {
        visit(chosen);
        return;
    }
    const int v = pool[i];
    const Mask with = base | chosen;
    if (budget > 0 && (g.adj(v) & with) == with) {
        clique_subsets(g, base, pool, i + 1, chosen | bit(v), budget - 1, visit);
    }
    clique_subsets(g, base, pool, i + 1, chosen, budget, visit);
}

Pdag recompute_cpdag(const Pdag& state, const std::vector<std::string>& names) {
    auto dag = dag_extension(state.to_graph(names));
    if (!dag) throw std::logic_error("GES produced a PDAG without consistent extension");
    return Pdag::from_graph(cpdag_of_dag(*dag));
}

std::vector<std::string> member_names(Mask m, const std::vector<std::string>& names) {
    std::vector<std::string> out;
    for (int v : members(m)) out.push_back(names[static_cast<std::size_t>(v)]);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

DiscoveryResult ges_discover(const Dataset& ds, const GesConfig& cfg) {
    cfg.validate();
    const std::size_t p = ds.cols();
    if (p < 2) throw ValidationError("structure search needs at least 2 columns");
    BicScore score(ds, cfg);
    const auto& names = score.names();

    DiscoveryResult result;
    if (ds.rows() < 10 * p) {
        result.warnings.push_back("only " + std::to_string(ds.rows()) + " rows for " + std::to_string(p) +
                                  " variables; at least 10 per variable recommended");
    }
    for (std::size_t j = 0; j < p; ++j) {
        const auto v = ds.values().col(static_cast<Eigen::Index>(j));
        if (v.maxCoeff() == v.minCoeff()) result.warnings.push_back("column " + names[j] + " is constant");
    }

    // Name-sorted iteration order realises the lexicographic tie-break.
    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return names[static_cast<std::size_t>(a)] < names[static_cast<std::size_t>(b)]; });

    Pdag state(p);
    double total = 0;
    for (std::size_t v = 0; v < p; ++v) total += score.local(static_cast<int>(v), 0);
    result.score_trajectory.push_back(total);

    auto record = [&](const char* phase, const char* op, const Candidate& c) {
        total += c.delta;
        GesStep step;
        step.phase = phase;
        step.op = op;
        step.from = names[static_cast<std::size_t>(c.from)];
        step.to = names[static_cast<std::size_t>(c.to)];
        step.subset = member_names(c.subset, names);
        step.delta = c.delta;
        step.score = total;
        result.log.push_back(std::move(step));
        result.score_trajectory.push_back(total);
    };

    // Forward phase.
    for (;;) {
        Candidate best;
        for (int x : order) {
            for (int y : order) {
                if (x == y || (state.adj(x) & bit(y))) continue;
                const auto yi = static_cast<std::size_t>(y);
                const Mask na = state.ne[yi] & state.adj(x);
                if (!state.clique(na)) continue;
                const Mask t0 = state.ne[yi] & ~state.adj(x) & ~bit(x);
                const std::size_t used = static_cast<std::size_t>(std::popcount(na | state.pa[yi])) + 1;
                if (used > cfg.max_parents) continue;
                const auto pool = members(t0);
                clique_subsets(state, na, pool, 0, 0, cfg.max_parents - used, [&](Mask t) {
                    const Mask s = na | t;
                    if (!state.blocks_semi_directed(y, x, s)) return;
                    const Mask parents = s | state.pa[yi];
                    const double delta = score.local(y, parents | bit(x)) - score.local(y, parents);
                    if (delta > kMinImprovement && (!best.valid || delta > best.delta)) {
                        best = {true, x, y, t, delta};
                    }
                });
            }
        }
        if (!best.valid) break;
        const auto yi = static_cast<std::size_t>(best.to);
        state.pa[yi] |= bit(best.from);
        state.ch[static_cast<std::size_t>(best.from)] |= bit(best.to);
        for (int t : members(best.subset)) {
            state.ne[yi] &= ~bit(t);
            state.ne[static_cast<std::size_t>(t)] &= ~bit(best.to);
            state.pa[yi] |= bit(t);
            state.ch[static_cast<std::size_t>(t)] |= bit(best.to);
        }
        record("forward", "insert", best);
        state = recompute_cpdag(state, names);
    }

    // Backward phase.
    for (;;) {
        Candidate best;
        for (int x : order) {
            for (int y : order) {
                const auto yi = static_cast<std::size_t>(y);
                const bool linked = (state.pa[yi] & bit(x)) || (state.ne[yi] & bit(x));
                if (x == y || !linked) continue;
                const Mask h0 = state.ne[yi] & state.adj(x);
                const auto pool = members(h0);
                // H ranges over all subsets of h0; NA \ H must be a clique.
                const std::size_t count = std::size_t{1} << pool.size();
                for (std::size_t code = 0; code < count; ++code) {
                    Mask h = 0;
                    for (std::size_t i = 0; i < pool.size(); ++i)
                        if (code & (std::size_t{1} << i)) h |= bit(pool[i]);
                    const Mask rest = h0 & ~h;
                    if (!state.clique(rest)) continue;
                    const Mask parents = (rest | state.pa[yi]) & ~bit(x);
                    const double delta = score.local(y, parents) - score.local(y, parents | bit(x));
                    if (delta > kMinImprovement && (!best.valid || delta > best.delta)) {
                        best = {true, x, y, h, delta};
                    }
                }
            }
        }
        if (!best.valid) break;
        const auto xi = static_cast<std::size_t>(best.from), yi = static_cast<std::size_t>(best.to);
        state.pa[yi] &= ~bit(best.from);
        state.ch[xi] &= ~bit(best.to);
        state.ne[yi] &= ~bit(best.from);
        state.ne[xi] &= ~bit(best.to);
        for (int h : members(best.subset)) {
            const auto hi = static_cast<std::size_t>(h);
            state.ne[yi] &= ~bit(h);
            state.ne[hi] &= ~bit(best.to);
            state.ch[yi] |= bit(h);
            state.pa[hi] |= bit(best.to);
            if (state.ne[xi] & bit(h)) {
                state.ne[xi] &= ~bit(h);
                state.ne[hi] &= ~bit(best.from);
                state.ch[xi] |= bit(h);
                state.pa[hi] |= bit(best.from);
            }
        }
        record("backward", "delete", best);
        state = recompute_cpdag(state, names);
    }

    result.cpdag = state.to_graph(names);
    result.score = total;
    result.cache_hits = score.hits();
    result.cache_misses = score.misses();
    return result;
}

}  // namespace whatif
