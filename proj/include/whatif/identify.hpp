#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "whatif/graph.hpp"

namespace whatif {

using NodeSet = std::vector<std::string>;

/// Backdoor criterion: no member of `z` descends from `x`, and `z` blocks
/// every path between x and y that starts with an arrow into x. Evaluated
/// by explicit path enumeration.
bool is_valid_adjustment(const CausalGraph& g, std::string_view x, std::string_view y, const NodeSet& z);

struct AdjustmentSets {
    /// Inclusion-minimal valid sets, each sorted by name, ordered by size
    /// then lexicographically.
    std::vector<NodeSet> sets;
    /// No directed path from treatment to outcome: the effect is zero.
    bool null_effect = false;
};

/// Enumerates inclusion-minimal backdoor adjustment sets among the
/// ancestors of {x, y}. Works on the graph with x's outgoing edges removed
/// (a set is valid iff it avoids De(x) and d-separates x and y there).
AdjustmentSets minimal_adjustment_sets(const CausalGraph& g, std::string_view x, std::string_view y);

struct Estimand {
    std::string treatment;
    std::string outcome;
    bool null_effect = false;
    std::vector<NodeSet> minimal_adjustment_sets;
    /// Descendants of the treatment other than treatment and outcome.
    NodeSet forbidden_nodes;
    /// Paths between treatment and outcome given the first adjustment set
    /// (or the empty set when none exists).
    std::vector<PathDiagnostic> diagnostics;
    bool diagnostics_truncated = false;

    /// The smallest listed set; empty when `minimal_adjustment_sets` is.
    const NodeSet* primary_set() const {
        return minimal_adjustment_sets.empty() ? nullptr : &minimal_adjustment_sets.front();
    }
};

Estimand identify_estimand(const CausalGraph& g, std::string_view treatment, std::string_view outcome);

}  // namespace whatif
