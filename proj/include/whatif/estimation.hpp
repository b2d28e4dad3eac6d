#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "whatif/dataset.hpp"
#include "whatif/graph.hpp"
#include "whatif/regression.hpp"

namespace whatif {

using Assignment = std::map<std::string, double>;

/// A what-if query: outcome under treatment := treated versus
/// treatment := control, optionally within a stratum fixed by `conditions`.
struct Scenario {
    std::string treatment;
    double control = 0;
    double treated = 0;
    std::string outcome;
    Assignment conditions;
    std::size_t n_samples = 1000;
    std::uint64_t seed = 0;
};

struct NodeModel {
    std::string node;
    std::vector<std::string> parents;
    PolynomialModel model;
};

/// Structural causal model fitted to a dataset along a DAG: one polynomial
/// ridge regression per node with parents, empirical marginals for root
/// nodes.
class FittedScm {
public:
    const CausalGraph& dag() const noexcept { return dag_; }
    Expansion expansion() const noexcept { return expansion_; }
    const std::vector<int>& order() const noexcept { return order_; }
    /// nullptr for root nodes.
    const NodeModel* model(std::string_view node) const;
    const std::vector<NodeModel>& models() const noexcept { return models_; }
    bool is_root(int v) const { return model_of_.at(static_cast<std::size_t>(v)) < 0; }
    /// Training values of a root node (its empirical marginal).
    const std::vector<double>& marginal(int v) const { return roots_.at(static_cast<std::size_t>(v)); }
    /// [min, max] accepted for pinned values of a node.
    std::pair<double, double> range(int v) const { return ranges_.at(static_cast<std::size_t>(v)); }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    const Dataset& training() const { return *data_; }
    /// Copy with every node's coefficients drawn from their sampling
    /// distribution; used for the model part of effect standard errors.
    FittedScm perturbed(std::uint64_t seed) const;

private:
    friend FittedScm fit_scm(std::shared_ptr<const Dataset>, const CausalGraph&, Expansion);
    CausalGraph dag_;
    Expansion expansion_ = Expansion::Interactions3;
    std::vector<int> order_;
    std::vector<NodeModel> models_;
    std::vector<int> model_of_;  // node -> index into models_ or -1
    std::vector<std::vector<double>> roots_;
    std::vector<std::pair<double, double>> ranges_;
    std::vector<std::string> warnings_;
    std::shared_ptr<const Dataset> data_;
};

inline constexpr Expansion kDefaultExpansion = Expansion::Interactions3;

/// Requires an acyclic, fully directed graph whose nodes are dataset
/// columns.
FittedScm fit_scm(std::shared_ptr<const Dataset> ds, const CausalGraph& dag, Expansion expansion = kDefaultExpansion);
FittedScm fit_scm(const Dataset& ds, const CausalGraph& dag, Expansion expansion = kDefaultExpansion);

struct SampleMatrix {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;

    Eigen::VectorXd column(std::string_view name) const;
};

struct SimulationOptions {
    /// Add Gaussian residual noise to predicted nodes (conditional means
    /// otherwise).
    bool residual_noise = false;
};

/// Root-node draws and residual noise for n units; consumed identically
/// regardless of which nodes are later pinned.
struct UnitDraws {
    Eigen::MatrixXd roots;  // n x p, valid in root columns
    Eigen::MatrixXd noise;  // n x p standard normals, empty without residual noise
};

UnitDraws draw_units(const FittedScm& scm, std::size_t n, std::uint64_t seed, const SimulationOptions& opt = {});

/// Ancestral propagation of `draws` with do-nodes fixed (incoming edges
/// severed) and conditioned nodes pinned.
SampleMatrix propagate(const FittedScm& scm, const UnitDraws& draws, const Assignment& interventions,
                       const Assignment& conditions, const SimulationOptions& opt = {});

/// draw_units followed by propagate. Throws ValidationError("post-treatment
/// conditioning ...") when a condition lies downstream of a do-node.
SampleMatrix simulate_do(const FittedScm& scm, const Assignment& interventions, const Assignment& conditions,
                         std::size_t n, std::uint64_t seed, const SimulationOptions& opt = {});

struct Histogram {
    std::vector<double> edges;  // bins + 1
    std::vector<std::size_t> counts;
};

Histogram make_histogram(const std::vector<double>& values, std::size_t bins = 40);

struct EffectEstimate {
    double tau = 0;
    std::vector<double> unit_effects;
    /// Sorted unit effects; the i-th has cumulative probability (i+1)/n.
    std::vector<double> cdf;
    double se = 0;
    /// sd(unit effects) / sqrt(n): covariate sampling error alone.
    double mc_se = 0;
    /// Spread of tau over coefficient draws of the node models.
    double model_se = 0;
    std::size_t n = 0;
    double p05 = 0;
    double p50 = 0;
    double p95 = 0;
    Histogram histogram;
};

/// Fills tau, cdf, quantiles, histogram and mc_se from `unit_effects`.
EffectEstimate summarize_effects(std::vector<double> unit_effects);

struct EstimateOptions {
    SimulationOptions simulation;
    /// Coefficient draws for the model part of the standard error; 0 skips.
    std::size_t model_draws = 200;
};

/// Population average effect; scenario.conditions must be empty.
EffectEstimate estimate_ate(const FittedScm& scm, const Scenario& scenario, const EstimateOptions& opt = {});

/// Effect within the stratum fixed by scenario.conditions (non-empty, all
/// non-descendants of the treatment, within the training ranges).
EffectEstimate estimate_cate(const FittedScm& scm, const Scenario& scenario, const EstimateOptions& opt = {});

/// ATE or CATE depending on whether conditions are given.
EffectEstimate estimate_effect(const FittedScm& scm, const Scenario& scenario, const EstimateOptions& opt = {});

}  // namespace whatif
