#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "whatif/dataset.hpp"
#include "whatif/estimation.hpp"

namespace whatif {

struct BoostingParams {
    std::size_t rounds = 300;
    int max_depth = 4;
    double learning_rate = 0.1;
    std::size_t min_leaf = 5;

    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0;
    int left = -1;
    int right = -1;
    double value = 0;  // leaf output, already scaled by the learning rate
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(const double* row) const;
};

/// Gradient-boosted least-squares regression trees over named features.
/// Also records each feature's observed range for the naive what-if
/// sampler.
struct TreeEnsemble {
    std::vector<std::string> features;
    std::string target;
    BoostingParams params;
    double base = 0;
    std::vector<RegressionTree> trees;
    std::vector<double> feature_min;
    std::vector<double> feature_max;

    double predict(const double* row) const;
    /// Predicts every row of `ds`, reading features by name.
    Eigen::VectorXd predict(const Dataset& ds) const;
};

/// Fits on all columns except `target`. Refuses fewer than 50 rows.
TreeEnsemble fit_baseline(const Dataset& ds, std::string_view target, const BoostingParams& params = {});

struct CvReport {
    std::size_t folds = 0;
    double mape = 0;  // percent, mean over folds
    double r2 = 0;    // mean over folds
    std::vector<double> fold_mape;
    std::vector<double> fold_r2;
};

/// k-fold cross-validation with a seeded shuffle; fold i holds the
/// shuffled positions congruent to i mod k. A fold whose targets are
/// constant scores R² 1 if predicted exactly and 0 otherwise; rows with a
/// zero target are left out of MAPE.
CvReport cross_validate(const Dataset& ds, std::string_view target, std::size_t k = 4,
                        const BoostingParams& params = {}, std::uint64_t seed = 0);

/// What-if by independent sampling: every input that is neither the
/// treatment nor conditioned is drawn uniformly from its observed range,
/// ignoring how inputs depend on each other. Each draw is evaluated at
/// treatment = treated and treatment = control.
EffectEstimate naive_whatif(const TreeEnsemble& model, const Scenario& scenario);

}  // namespace whatif
