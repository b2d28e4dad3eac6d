#include "whatif/identify.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>

#include "whatif/error.hpp"

namespace whatif {

namespace {

constexpr std::size_t kMaxCandidates = 30;

void require_oriented(const CausalGraph& g) {
    if (!g.fully_directed()) throw ValidationError("graph not fully oriented; apply knowledge first");
    if (g.has_directed_cycle()) throw ValidationError("graph contains a directed cycle");
}

}  // namespace

bool is_valid_adjustment(const CausalGraph& g, std::string_view x_name, std::string_view y_name, const NodeSet& z) {
    require_oriented(g);
    const int x = g.index(x_name);
    const int y = g.index(y_name);
    if (x == y) throw ValidationError("treatment and outcome must differ");
    const auto desc = g.descendants(x);
    for (const auto& n : z) {
        const int v = g.index(n);
        if (v == x || v == y) throw ValidationError("adjustment set must exclude treatment and outcome");
        if (desc[static_cast<std::size_t>(v)]) return false;
    }
    const auto report = classify_paths(g, x_name, y_name, z, std::size_t(-1));
    return std::none_of(report.paths.begin(), report.paths.end(),
                        [](const PathDiagnostic& p) { return p.is_backdoor && p.open; });
}

AdjustmentSets minimal_adjustment_sets(const CausalGraph& g, std::string_view x_name, std::string_view y_name) {
    require_oriented(g);
    const int x = g.index(x_name);
    const int y = g.index(y_name);
    if (x == y) throw ValidationError("treatment and outcome must differ");

    AdjustmentSets out;
    const auto desc = g.descendants(x);
    if (!desc[static_cast<std::size_t>(y)]) {
        out.null_effect = true;
        return out;
    }

    CausalGraph cut = g;
    for (int c : g.children(x)) cut.remove_edge(x, c);

    const int xy[] = {x, y};
    const auto anc = g.ancestors(xy);
    std::vector<int> cand;
    for (int v = 0; v < static_cast<int>(g.size()); ++v)
        if (anc[static_cast<std::size_t>(v)] && !desc[static_cast<std::size_t>(v)] && v != y) cand.push_back(v);
    std::sort(cand.begin(), cand.end(), [&](int a, int b) { return g.name(a) < g.name(b); });
    if (cand.size() > kMaxCandidates)
        throw ValidationError("too many candidate adjustment variables (" + std::to_string(cand.size()) + ")");

    const std::size_t m = cand.size();
    std::vector<std::uint32_t> found;
    std::vector<int> z;
    const int xs[] = {x};
    const int ys[] = {y};
    // Subsets in order of size; supersets of a recorded set cannot be minimal,
    // and any valid set whose proper subsets were all rejected is minimal.
    for (std::size_t k = 0; k <= m; ++k) {
        if (k == 0) {
            if (is_d_separated(cut, xs, ys, {})) found.push_back(0);
            continue;
        }
        std::uint32_t s = (std::uint32_t{1} << k) - 1;
        const std::uint64_t limit = std::uint64_t{1} << m;
        while (s < limit) {
            const bool dominated = std::any_of(found.begin(), found.end(), [s](std::uint32_t f) { return (s & f) == f; });
            if (!dominated) {
                z.clear();
                for (std::size_t i = 0; i < m; ++i)
                    if (s & (std::uint32_t{1} << i)) z.push_back(cand[i]);
                if (is_d_separated(cut, xs, ys, z)) found.push_back(s);
            }
            // Gosper's hack: next subset with the same popcount.
            const std::uint32_t c = s & (~s + 1);
            const std::uint64_t r = static_cast<std::uint64_t>(s) + c;
            if (r >= limit) break;
            s = static_cast<std::uint32_t>((((r ^ s) >> 2) / c) | r);
        }
    }

    for (std::uint32_t f : found) {
        NodeSet set;
        for (std::size_t i = 0; i < m; ++i)
            if (f & (std::uint32_t{1} << i)) set.push_back(g.name(cand[i]));
        std::sort(set.begin(), set.end());
        out.sets.push_back(std::move(set));
    }
    std::sort(out.sets.begin(), out.sets.end(), [](const NodeSet& a, const NodeSet& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

Estimand identify_estimand(const CausalGraph& g, std::string_view treatment, std::string_view outcome) {
    Estimand e;
    e.treatment = std::string(treatment);
    e.outcome = std::string(outcome);
    const int x = g.index(treatment);
    const int y = g.index(outcome);
    if (x == y) throw ValidationError("treatment and outcome must differ");

    auto sets = minimal_adjustment_sets(g, treatment, outcome);
    e.null_effect = sets.null_effect;
    e.minimal_adjustment_sets = std::move(sets.sets);

    const auto desc = g.descendants(x);
    for (int v = 0; v < static_cast<int>(g.size()); ++v)
        if (desc[static_cast<std::size_t>(v)] && v != x && v != y) e.forbidden_nodes.push_back(g.name(v));
    std::sort(e.forbidden_nodes.begin(), e.forbidden_nodes.end());

    const NodeSet empty;
    const NodeSet& given = e.primary_set() ? *e.primary_set() : empty;
    auto report = classify_paths(g, treatment, outcome, given);
    e.diagnostics = std::move(report.paths);
    e.diagnostics_truncated = report.truncated;
    return e;
}

}  // namespace whatif
