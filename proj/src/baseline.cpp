#include "whatif/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "whatif/error.hpp"

namespace whatif {

void BoostingParams::validate() const {
    if (rounds == 0) throw ValidationError("rounds must be at least 1");
    if (max_depth < 1 || max_depth > 12) throw ValidationError("max_depth must be in [1, 12]");
    if (!(learning_rate > 0 && learning_rate <= 1)) throw ValidationError("learning_rate must be in (0, 1]");
    if (min_leaf == 0) throw ValidationError("min_leaf must be at least 1");
}

double RegressionTree::predict(const double* row) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = row[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

double TreeEnsemble::predict(const double* row) const {
    double out = base;
    for (const auto& t : trees) out += t.predict(row);
    return out;
}

Eigen::VectorXd TreeEnsemble::predict(const Dataset& ds) const {
    std::vector<std::size_t> cols;
    for (const auto& f : features) cols.push_back(ds.index(f));
    Eigen::VectorXd out(static_cast<Eigen::Index>(ds.rows()));
    std::vector<double> row(features.size());
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j)
            row[j] = ds.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[j]));
        out(static_cast<Eigen::Index>(i)) = predict(row.data());
    }
    return out;
}

namespace {

// Row-major feature matrix with per-feature presorted row orders.
struct TrainingSet {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> x;  // n * p
    std::vector<std::vector<std::size_t>> order;

    double at(std::size_t i, std::size_t j) const { return x[i * p + j]; }
};

struct Split {
    double gain = 0;
    int feature = -1;
    double threshold = 0;
};

// Grows one least-squares tree level by level. Every level scans each
// feature once in sorted order, accumulating left sums per open node.
RegressionTree grow_tree(const TrainingSet& ts, const std::vector<double>& residual, const BoostingParams& params) {
    RegressionTree tree;
    std::vector<int> node_of(ts.n, 0);
    tree.nodes.push_back({});
    std::vector<int> open{0};

    auto leaf_value = [&](double sum, double count) { return count > 0 ? params.learning_rate * sum / count : 0.0; };

    for (int depth = 0; depth < params.max_depth && !open.empty(); ++depth) {
        const std::size_t m = tree.nodes.size();
        std::vector<double> total_sum(m, 0), total_cnt(m, 0);
        for (std::size_t i = 0; i < ts.n; ++i) {
            const int nd = node_of[i];
            if (nd < 0) continue;
            total_sum[static_cast<std::size_t>(nd)] += residual[i];
            total_cnt[static_cast<std::size_t>(nd)] += 1;
        }
        std::vector<char> is_open(m, 0);
        for (int nd : open) is_open[static_cast<std::size_t>(nd)] = 1;
        std::vector<Split> best(m);
        std::vector<double> left_sum(m), left_cnt(m), last(m);

        for (std::size_t f = 0; f < ts.p; ++f) {
            std::fill(left_sum.begin(), left_sum.end(), 0.0);
            std::fill(left_cnt.begin(), left_cnt.end(), 0.0);
            std::fill(last.begin(), last.end(), -std::numeric_limits<double>::infinity());
            for (std::size_t i : ts.order[f]) {
                const int nd = node_of[i];
                if (nd < 0 || !is_open[static_cast<std::size_t>(nd)]) continue;
                const auto k = static_cast<std::size_t>(nd);
                const double v = ts.at(i, f);
                const double nl = left_cnt[k], nr = total_cnt[k] - nl;
                if (nl >= static_cast<double>(params.min_leaf) && nr >= static_cast<double>(params.min_leaf) &&
                    v > last[k]) {
                    const double sl = left_sum[k], sr = total_sum[k] - sl;
                    const double gain = sl * sl / nl + sr * sr / nr - total_sum[k] * total_sum[k] / total_cnt[k];
                    if (gain > best[k].gain + 1e-12) best[k] = {gain, static_cast<int>(f), 0.5 * (last[k] + v)};
                }
                left_sum[k] += residual[i];
                left_cnt[k] += 1;
                last[k] = v;
            }
        }

        std::vector<int> next;
        for (int nd : open) {
            const auto k = static_cast<std::size_t>(nd);
            if (best[k].feature < 0) {
                tree.nodes[k].value = leaf_value(total_sum[k], total_cnt[k]);
                continue;
            }
            const int l = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            tree.nodes.push_back({});
            tree.nodes[k].feature = best[k].feature;
            tree.nodes[k].threshold = best[k].threshold;
            tree.nodes[k].left = l;
            tree.nodes[k].right = l + 1;
            next.push_back(l);
            next.push_back(l + 1);
        }
        for (std::size_t i = 0; i < ts.n; ++i) {
            const int nd = node_of[i];
            if (nd < 0) continue;
            const TreeNode& node = tree.nodes[static_cast<std::size_t>(nd)];
            if (node.feature < 0) {
                node_of[i] = -1;  // settled in a leaf
                continue;
            }
            node_of[i] = ts.at(i, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
        }
        open = std::move(next);
    }

    // Nodes still open at the depth limit become leaves.
    std::vector<double> sum(tree.nodes.size(), 0), cnt(tree.nodes.size(), 0);
    for (std::size_t i = 0; i < ts.n; ++i) {
        if (node_of[i] < 0) continue;
        sum[static_cast<std::size_t>(node_of[i])] += residual[i];
        cnt[static_cast<std::size_t>(node_of[i])] += 1;
    }
    for (int nd : open) tree.nodes[static_cast<std::size_t>(nd)].value = leaf_value(sum[static_cast<std::size_t>(nd)], cnt[static_cast<std::size_t>(nd)]);
    return tree;
}

TreeEnsemble fit_rows(const Dataset& ds, std::string_view target, const std::vector<std::size_t>& rows,
                      const BoostingParams& params) {
    params.validate();
    const std::size_t t = ds.index(target);
    TreeEnsemble model;
    model.target = std::string(target);
    model.params = params;
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < ds.cols(); ++j) {
        if (j == t) continue;
        cols.push_back(j);
        model.features.push_back(ds.columns()[j].name);
    }

    TrainingSet ts;
    ts.n = rows.size();
    ts.p = cols.size();
    ts.x.resize(ts.n * ts.p);
    std::vector<double> y(ts.n);
    for (std::size_t i = 0; i < ts.n; ++i) {
        const auto r = static_cast<Eigen::Index>(rows[i]);
        for (std::size_t j = 0; j < ts.p; ++j) ts.x[i * ts.p + j] = ds.values()(r, static_cast<Eigen::Index>(cols[j]));
        y[i] = ds.values()(r, static_cast<Eigen::Index>(t));
    }
    model.feature_min.assign(ts.p, 0);
    model.feature_max.assign(ts.p, 0);
    ts.order.resize(ts.p);
    for (std::size_t j = 0; j < ts.p; ++j) {
        auto& ord = ts.order[j];
        ord.resize(ts.n);
        std::iota(ord.begin(), ord.end(), std::size_t{0});
        std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return ts.at(a, j) < ts.at(b, j); });
        if (ts.n > 0) {
            model.feature_min[j] = ts.at(ord.front(), j);
            model.feature_max[j] = ts.at(ord.back(), j);
        }
    }

    model.base = ts.n > 0 ? std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(ts.n) : 0.0;
    std::vector<double> pred(ts.n, model.base), residual(ts.n);
    for (std::size_t r = 0; r < params.rounds; ++r) {
        for (std::size_t i = 0; i < ts.n; ++i) residual[i] = y[i] - pred[i];
        RegressionTree tree = grow_tree(ts, residual, params);
        for (std::size_t i = 0; i < ts.n; ++i) pred[i] += tree.predict(&ts.x[i * ts.p]);
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace

TreeEnsemble fit_baseline(const Dataset& ds, std::string_view target, const BoostingParams& params) {
    if (ds.rows() < 50)
        throw ValidationError("baseline needs at least 50 rows, got " + std::to_string(ds.rows()));
    std::vector<std::size_t> rows(ds.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_rows(ds, target, rows, params);
}

CvReport cross_validate(const Dataset& ds, std::string_view target, std::size_t k, const BoostingParams& params,
                        std::uint64_t seed) {
    if (k < 2) throw ValidationError("k must be at least 2");
    if (k > ds.rows())
        throw ValidationError("k = " + std::to_string(k) + " exceeds the row count " + std::to_string(ds.rows()));
    const std::size_t t = ds.index(target);
    std::vector<std::size_t> perm(ds.rows());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    CvReport rep;
    rep.folds = k;
    for (std::size_t fold = 0; fold < k; ++fold) {
        std::vector<std::size_t> train, test;
        for (std::size_t i = 0; i < perm.size(); ++i) (i % k == fold ? test : train).push_back(perm[i]);
        const TreeEnsemble model = fit_rows(ds, target, train, params);
        const Dataset held = ds.subset(test);
        const Eigen::VectorXd pred = model.predict(held);
        const Eigen::VectorXd y = held.values().col(static_cast<Eigen::Index>(t));

        double ape = 0;
        std::size_t counted = 0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (y(i) == 0) continue;
            ape += std::abs((y(i) - pred(i)) / y(i));
            ++counted;
        }
        const double ss_res = (y - pred).squaredNorm();
        const double ss_tot = (y.array() - y.mean()).square().sum();
        rep.fold_mape.push_back(counted ? 100.0 * ape / static_cast<double>(counted) : 0.0);
        rep.fold_r2.push_back(ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0));
    }
    rep.mape = std::accumulate(rep.fold_mape.begin(), rep.fold_mape.end(), 0.0) / static_cast<double>(k);
    rep.r2 = std::accumulate(rep.fold_r2.begin(), rep.fold_r2.end(), 0.0) / static_cast<double>(k);
    return rep;
}

EffectEstimate naive_whatif(const TreeEnsemble& model, const Scenario& s) {
    if (s.outcome != model.target)
        throw ValidationError("outcome " + s.outcome + " does not match the baseline target " + model.target);
    if (s.n_samples == 0) throw ValidationError("n_samples must be at least 1");
    auto feature = [&](const std::string& name) {
        const auto it = std::find(model.features.begin(), model.features.end(), name);
        if (it == model.features.end()) throw ValidationError("unknown column " + name);
        return static_cast<std::size_t>(it - model.features.begin());
    };
    const std::size_t tcol = feature(s.treatment);
    std::vector<std::optional<double>> pinned(model.features.size());
    for (const auto& [name, value] : s.conditions) {
        if (name == s.treatment) throw ValidationError("conditions must not include the treatment");
        pinned[feature(name)] = value;
    }

    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> row(model.features.size());
    std::vector<double> effects(s.n_samples);
    for (auto& e : effects) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j == tcol) continue;
            row[j] = pinned[j] ? *pinned[j] : model.feature_min[j] + unit(rng) * (model.feature_max[j] - model.feature_min[j]);
        }
        row[tcol] = s.treated;
        const double yt = model.predict(row.data());
        row[tcol] = s.control;
        e = yt - model.predict(row.data());
    }
    return summarize_effects(std::move(effects));
}

}  // namespace whatif
