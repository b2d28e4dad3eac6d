#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "whatif/dataset.hpp"
#include "whatif/graph.hpp"

namespace whatif {

struct GesConfig {
    /// Scales the BIC complexity term; 0 disables the penalty.
    double penalty_multiplier = 1.0;
    std::size_t max_parents = 12;
    /// Z-score columns before scoring. BIC's argmax is invariant to affine
    /// rescaling, the conditioning of the normal equations is not.
    bool standardize = true;
    /// Lower bound on the residual variance inside the log-likelihood.
    double variance_floor = 1e-12;

    void validate() const;
};

/// Ridge added to the normal equations when the parent covariance is
/// singular or numerically rank deficient.
inline constexpr double kRidgeDamping = 1e-8;

/// Decomposable linear-Gaussian BIC over the columns of a dataset:
///
///   local(y, Pa) = -(n/2) ln max(RSS/n, floor) - lambda * ((|Pa| + 1) / 2) ln n
///
/// where RSS is the residual sum of squares of the least-squares fit of y
/// on Pa plus an intercept. Parent sets are bitmasks over column indices,
/// so at most 64 columns are supported. Scores are memoised.
class BicScore {
public:
    BicScore(const Dataset& ds, const GesConfig& cfg);

    std::size_t n() const noexcept { return n_; }
    std::size_t p() const noexcept { return static_cast<std::size_t>(cov_.rows()); }
    const std::vector<std::string>& names() const noexcept { return names_; }

    /// Cached local score; `parents` must not contain `target`.
    double local(int target, std::uint64_t parents);
    /// Uncached computation (the cache's reference value).
    double compute(int target, std::uint64_t parents) const;

    /// Sum of local scores over a fully directed graph whose nodes are a
    /// subset of the dataset columns.
    double total(const CausalGraph& dag);

    std::size_t hits() const noexcept { return hits_; }
    std::size_t misses() const noexcept { return misses_; }

private:
    struct Key {
        int target;
        std::uint64_t parents;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept {
            return std::hash<std::uint64_t>{}(k.parents * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint64_t>(k.target));
        }
    };

    std::size_t n_ = 0;
    double log_n_ = 0;
    Eigen::MatrixXd cov_;
    std::vector<std::string> names_;
    GesConfig cfg_;
    std::unordered_map<Key, double, KeyHash> cache_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

/// Local BIC of `target` given `parents` (column names).
double local_bic(const Dataset& ds, std::string_view target, const std::vector<std::string>& parents,
                 const GesConfig& cfg = {});

struct GesStep {
    std::string phase;  // "forward" | "backward"
    std::string op;     // "insert" | "delete"
    std::string from;
    std::string to;
    /// T for insert, H for delete.
    std::vector<std::string> subset;
    double delta = 0;
    double score = 0;
};

struct DiscoveryResult {
    CausalGraph cpdag;
    std::vector<GesStep> log;
    /// Total score after each accepted operator; element 0 is the empty graph.
    std::vector<double> score_trajectory;
    double score = 0;
    std::vector<std::string> warnings;
    std::size_t cache_hits = 0;
    std::size_t cache_misses = 0;
};

/// Greedy Equivalence Search with the BIC above: the forward phase applies
/// the best score-improving valid Insert until none improves, the backward
/// phase the best valid Delete. Ties go to the lexicographically smallest
/// (source, target) pair. Returns a CPDAG over all dataset columns.
DiscoveryResult ges_discover(const Dataset& ds, const GesConfig& cfg = {});

/// Total score of a CPDAG's equivalence class (through any DAG extension).
double score_cpdag(BicScore& score, const CausalGraph& cpdag);

}  // namespace whatif
