#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace whatif {

using Edge = std::pair<std::string, std::string>;

/// Mixed graph over named variables: directed edges (a -> b) and undirected
/// edges (a -- b). Represents a DAG, a CPDAG, or any partially oriented state
/// in between. A pair of nodes carries at most one edge.
///
/// Nodes are addressed by dense indices in insertion order; the name-based
/// overloads resolve through `index()` which throws ValidationError for
/// unknown names.
class CausalGraph {
public:
    CausalGraph() = default;
    explicit CausalGraph(std::vector<std::string> nodes);

    std::size_t size() const noexcept { return names_.size(); }
    const std::vector<std::string>& nodes() const noexcept { return names_; }
    const std::string& name(int v) const { return names_.at(static_cast<std::size_t>(v)); }
    int index(std::string_view name) const;
    std::optional<int> find(std::string_view name) const;

    void add_directed(int from, int to);
    void add_undirected(int a, int b);
    void remove_edge(int a, int b);
    /// Turns an existing undirected edge a -- b into from -> to.
    void orient(int from, int to);

    void add_directed(std::string_view from, std::string_view to) { add_directed(index(from), index(to)); }
    void add_undirected(std::string_view a, std::string_view b) { add_undirected(index(a), index(b)); }
    void remove_edge(std::string_view a, std::string_view b) { remove_edge(index(a), index(b)); }

    bool directed(int from, int to) const { return dir_[at(from, to)] != 0; }
    bool undirected(int a, int b) const { return und_[at(a, b)] != 0; }
    bool adjacent(int a, int b) const { return directed(a, b) || directed(b, a) || undirected(a, b); }

    bool directed(std::string_view from, std::string_view to) const { return directed(index(from), index(to)); }
    bool undirected(std::string_view a, std::string_view b) const { return undirected(index(a), index(b)); }
    bool adjacent(std::string_view a, std::string_view b) const { return adjacent(index(a), index(b)); }

    std::vector<int> parents(int v) const;
    std::vector<int> children(int v) const;
    /// Nodes joined to v by an undirected edge.
    std::vector<int> neighbors(int v) const;
    std::vector<int> adjacents(int v) const;

    bool fully_directed() const noexcept { return undirected_count_ == 0; }
    bool has_directed_cycle() const;
    bool is_dag() const { return fully_directed() && !has_directed_cycle(); }

    /// Topological order of the directed part; ties broken by index.
    /// Throws ValidationError when the directed part has a cycle.
    std::vector<int> topological_order() const;

    /// Membership flags for the descendants of `v` (v included).
    std::vector<bool> descendants(int v) const;
    /// Membership flags for the ancestors of `of` (members included).
    std::vector<bool> ancestors(std::span<const int> of) const;

    std::size_t directed_count() const noexcept { return directed_count_; }
    std::size_t undirected_count() const noexcept { return undirected_count_; }

    /// Edges by name, sorted; undirected pairs are reported with the
    /// lexicographically smaller name first.
    std::vector<Edge> directed_edges() const;
    std::vector<Edge> undirected_edges() const;

    /// The same graph with all edges made undirected.
    CausalGraph skeleton() const;

    /// Presentation-only annotation carried through JSON ("bold" arrows).
    /// Does not take part in equality or any algorithm.
    const std::set<Edge>& bold_edges() const noexcept { return bold_; }
    void set_bold_edges(std::set<Edge> bold) { bold_ = std::move(bold); }

    /// Name-based equality: same node set and the same edges, regardless of
    /// node insertion order.
    friend bool operator==(const CausalGraph& a, const CausalGraph& b);

private:
    std::size_t at(int a, int b) const;
    void check_pair(int a, int b) const;

    std::vector<std::string> names_;
    std::unordered_map<std::string, int> lookup_;
    std::vector<std::uint8_t> dir_;
    std::vector<std::uint8_t> und_;
    std::size_t directed_count_ = 0;
    std::size_t undirected_count_ = 0;
    std::set<Edge> bold_;
};

std::string edge_label(const CausalGraph& g, int from, int to);

// --- d-separation ------------------------------------------------------

/// True iff every path between X and Y is blocked by Z. Requires a fully
/// oriented acyclic graph and pairwise disjoint X, Y, Z.
bool is_d_separated(const CausalGraph& g, std::span<const int> x, std::span<const int> y,
                    std::span<const int> z);
bool is_d_separated(const CausalGraph& g, const std::vector<std::string>& x,
                    const std::vector<std::string>& y, const std::vector<std::string>& z);

enum class NodeRole { Chain, Fork, Collider };
std::string_view to_string(NodeRole role);

struct PathDiagnostic {
    std::vector<std::string> nodes;
    /// Role of each interior node, nodes[1] .. nodes[size-2].
    std::vector<NodeRole> roles;
    std::vector<std::string> blocked_given;
    bool open = false;
    /// First edge points into the start node.
    bool is_backdoor = false;
};

struct PathReport {
    std::vector<PathDiagnostic> paths;
    bool truncated = false;
};

/// Every simple path between x and y in the skeleton of the DAG, with node
/// roles, open/blocked status given z and the backdoor flag. Enumeration
/// stops after `max_paths` paths and sets `truncated`.
PathReport classify_paths(const CausalGraph& g, std::string_view x, std::string_view y,
                          const std::vector<std::string>& z, std::size_t max_paths = 100000);

// --- knowledge and orientation ------------------------------------------

struct KnowledgeConstraints {
    std::vector<Edge> required;
    std::vector<Edge> forbidden;
    /// Ordered partition; edges may only point from an earlier tier to a
    /// later one (or within a tier). Nodes absent from every tier are free.
    std::vector<std::vector<std::string>> tiers;

    bool empty() const { return required.empty() && forbidden.empty() && tiers.empty(); }
};

/// Orients undirected edges according to `k`, removes adjacencies whose
/// two orientations are both forbidden, then closes under Meek R1-R4.
/// Throws ContradictionError naming the edge when `k` conflicts with the
/// graph or would create a directed cycle; ValidationError for malformed
/// constraints.
CausalGraph apply_knowledge(const CausalGraph& g, const KnowledgeConstraints& k);

/// Applies Meek rules R1-R4 until no undirected edge can be oriented.
/// Returns the number of edges oriented.
int meek_closure(CausalGraph& g);

/// Completed PDAG of a DAG: v-structure edges kept, other edges undirected,
/// then closed under Meek rules. Throws ValidationError on cyclic input.
CausalGraph cpdag_of_dag(const CausalGraph& dag);

/// Consistent DAG extension of a PDAG (Dor and Tarsi); nullopt when none
/// exists.
std::optional<CausalGraph> dag_extension(const CausalGraph& pdag);

// --- serialization -------------------------------------------------------

enum class GraphFormat { Dot, Json };
std::optional<GraphFormat> parse_graph_format(std::string_view text);

/// DOT output uses the DAGitty dialect: `dag { ... }` for fully directed
/// graphs and `pdag { ... }` otherwise, with `->` and `--` edges.
std::string export_graph(const CausalGraph& g, GraphFormat format);
CausalGraph parse_graph(std::string_view text, GraphFormat format);

}  // namespace whatif
