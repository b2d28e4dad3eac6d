#include "whatif/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "whatif/error.hpp"

namespace whatif {

const NodeModel* FittedScm::model(std::string_view node) const {
    const int v = dag_.index(node);
    const int m = model_of_[static_cast<std::size_t>(v)];
    return m < 0 ? nullptr : &models_[static_cast<std::size_t>(m)];
}

FittedScm FittedScm::perturbed(std::uint64_t seed) const {
    FittedScm out = *this;
    std::mt19937_64 rng(seed);
    for (auto& m : out.models_) m.model = m.model.perturbed(rng);
    return out;
}

FittedScm fit_scm(std::shared_ptr<const Dataset> ds, const CausalGraph& dag, Expansion expansion) {
    if (!ds) throw ValidationError("fit_scm: no dataset");
    if (!dag.fully_directed()) throw ValidationError("graph not fully oriented; apply knowledge first");
    if (dag.has_directed_cycle()) throw ValidationError("graph contains a directed cycle");

    FittedScm scm;
    scm.dag_ = dag;
    scm.expansion_ = expansion;
    scm.order_ = dag.topological_order();
    scm.data_ = ds;
    const std::size_t p = dag.size();
    scm.model_of_.assign(p, -1);
    scm.roots_.assign(p, {});
    scm.ranges_.assign(p, {0.0, 0.0});

    std::vector<std::size_t> column(p);
    for (std::size_t v = 0; v < p; ++v) {
        const auto& name = dag.name(static_cast<int>(v));
        auto j = ds->find(name);
        if (!j) throw ValidationError("graph node " + name + " is not a dataset column");
        column[v] = *j;
        const auto values = ds->values().col(static_cast<Eigen::Index>(*j));
        if (const ParameterSpec* b = ds->bound(name)) scm.ranges_[v] = {b->min, b->max};
        else scm.ranges_[v] = {values.minCoeff(), values.maxCoeff()};
    }

    const int degree_cap = requested_degree(expansion);
    for (int v : scm.order_) {
        const auto vi = static_cast<std::size_t>(v);
        const auto parents = dag.parents(v);
        const auto target = ds->values().col(static_cast<Eigen::Index>(column[vi]));
        if (parents.empty()) {
            scm.roots_[vi].assign(target.data(), target.data() + target.size());
            continue;
        }
        Eigen::MatrixXd x(target.size(), static_cast<Eigen::Index>(parents.size()));
        NodeModel nm;
        nm.node = dag.name(v);
        for (std::size_t k = 0; k < parents.size(); ++k) {
            x.col(static_cast<Eigen::Index>(k)) = ds->values().col(static_cast<Eigen::Index>(column[static_cast<std::size_t>(parents[k])]));
            nm.parents.push_back(dag.name(parents[k]));
        }
        nm.model = PolynomialModel::fit(x, target, effective_degree(parents.size(), degree_cap, ds->rows()));
        if (nm.model.singular()) {
            scm.warnings_.push_back("near-singular design for " + nm.node + "; ridge penalty " +
                                    std::to_string(nm.model.penalty()));
        }
        scm.model_of_[vi] = static_cast<int>(scm.models_.size());
        scm.models_.push_back(std::move(nm));
    }
    return scm;
}

FittedScm fit_scm(const Dataset& ds, const CausalGraph& dag, Expansion expansion) {
    return fit_scm(std::make_shared<const Dataset>(ds), dag, expansion);
}

Eigen::VectorXd SampleMatrix::column(std::string_view name) const {
    for (std::size_t j = 0; j < columns.size(); ++j)
        if (columns[j] == name) return values.col(static_cast<Eigen::Index>(j));
    throw ValidationError("unknown column " + std::string(name));
}

UnitDraws draw_units(const FittedScm& scm, std::size_t n, std::uint64_t seed, const SimulationOptions& opt) {
    if (n == 0) throw ValidationError("sample count must be at least 1");
    const auto& g = scm.dag();
    const auto p = static_cast<Eigen::Index>(g.size());
    UnitDraws d;
    d.roots = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), p);
    std::mt19937_64 rng(seed);
    for (Eigen::Index v = 0; v < p; ++v) {
        if (!scm.is_root(static_cast<int>(v))) continue;
        const auto& marginal = scm.marginal(static_cast<int>(v));
        std::uniform_int_distribution<std::size_t> pick(0, marginal.size() - 1);
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) d.roots(i, v) = marginal[pick(rng)];
    }
    if (opt.residual_noise) {
        std::normal_distribution<double> normal(0.0, 1.0);
        d.noise.resize(static_cast<Eigen::Index>(n), p);
        for (Eigen::Index v = 0; v < p; ++v)
            for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) d.noise(i, v) = normal(rng);
    }
    return d;
}

namespace {

void check_pins(const FittedScm& scm, const Assignment& interventions, const Assignment& conditions) {
    const auto& g = scm.dag();
    for (const auto& [name, value] : interventions) {
        const int v = g.index(name);
        if (!std::isfinite(value)) throw ValidationError("intervention value for " + name + " is not finite");
        if (conditions.count(name)) throw ValidationError(name + " is both intervened on and conditioned");
        const auto desc = g.descendants(v);
        for (const auto& [cname, cvalue] : conditions) {
            if (desc[static_cast<std::size_t>(g.index(cname))]) {
                throw ValidationError("post-treatment conditioning: " + cname + " is a descendant of " + name);
            }
        }
    }
    for (const auto& [name, value] : conditions) {
        const int v = g.index(name);
        const auto [lo, hi] = scm.range(v);
        if (!(value >= lo && value <= hi)) {
            throw ValidationError("condition " + name + "=" + std::to_string(value) + " outside [" + std::to_string(lo) +
                                  ", " + std::to_string(hi) + "]");
        }
    }
}

}  // namespace

SampleMatrix propagate(const FittedScm& scm, const UnitDraws& draws, const Assignment& interventions,
                       const Assignment& conditions, const SimulationOptions& opt) {
    check_pins(scm, interventions, conditions);
    const auto& g = scm.dag();
    const std::size_t p = g.size();
    const Eigen::Index n = draws.roots.rows();

    std::vector<std::optional<double>> pinned(p);
    for (const auto& [name, value] : conditions) pinned[static_cast<std::size_t>(g.index(name))] = value;
    for (const auto& [name, value] : interventions) pinned[static_cast<std::size_t>(g.index(name))] = value;

    SampleMatrix out;
    out.columns = g.nodes();
    out.values.resize(n, static_cast<Eigen::Index>(p));
    for (int v : scm.order()) {
        const auto vi = static_cast<std::size_t>(v);
        const auto col = static_cast<Eigen::Index>(v);
        if (pinned[vi]) {
            out.values.col(col).setConstant(*pinned[vi]);
            continue;
        }
        if (scm.is_root(v)) {
            out.values.col(col) = draws.roots.col(col);
            continue;
        }
        const NodeModel& nm = *scm.model(g.name(v));
        const auto parents = g.parents(v);
        Eigen::RowVectorXd x(static_cast<Eigen::Index>(parents.size()));
        const bool noisy = opt.residual_noise && draws.noise.size() > 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < parents.size(); ++k) x(static_cast<Eigen::Index>(k)) = out.values(i, parents[k]);
            double y = nm.model.predict(x);
            if (noisy) y += nm.model.residual_sd() * draws.noise(i, col);
            out.values(i, col) = y;
        }
    }
    return out;
}

SampleMatrix simulate_do(const FittedScm& scm, const Assignment& interventions, const Assignment& conditions,
                         std::size_t n, std::uint64_t seed, const SimulationOptions& opt) {
    check_pins(scm, interventions, conditions);
    return propagate(scm, draw_units(scm, n, seed, opt), interventions, conditions, opt);
}

Histogram make_histogram(const std::vector<double>& values, std::size_t bins) {
    Histogram h;
    if (values.empty() || bins == 0) return h;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi == lo) {
        // Identical values: a small symmetric range so the bins have width.
        const double pad = lo != 0 ? std::abs(lo) * 0.005 : 0.5;
        lo -= pad;
        hi += pad;
    }
    h.counts.assign(bins, 0);
    h.edges.resize(bins + 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
    h.edges.back() = hi;
    for (double v : values) {
        std::size_t b = width > 0 ? static_cast<std::size_t>((v - lo) / width) : 0;
        if (b >= bins) b = bins - 1;
        ++h.counts[b];
    }
    return h;
}

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
    if (s.empty()) return 0;
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

void check_scenario(const FittedScm& scm, const Scenario& s) {
    const auto& g = scm.dag();
    if (!g.find(s.treatment)) throw ValidationError("treatment " + s.treatment + " is not in the graph");
    if (!g.find(s.outcome)) throw ValidationError("outcome " + s.outcome + " is not in the graph");
    if (s.treatment == s.outcome) throw ValidationError("treatment and outcome must differ");
    if (!std::isfinite(s.control) || !std::isfinite(s.treated)) throw ValidationError("treatment values must be finite");
    if (s.conditions.count(s.treatment)) throw ValidationError("conditions must not include the treatment");
    if (s.conditions.count(s.outcome)) throw ValidationError("conditions must not include the outcome");
    if (s.n_samples == 0) throw ValidationError("n_samples must be at least 1");
}

std::vector<double> contrast(const FittedScm& scm, const UnitDraws& draws, const Scenario& s,
                             const SimulationOptions& opt) {
    const auto out = static_cast<Eigen::Index>(scm.dag().index(s.outcome));
    const SampleMatrix treated = propagate(scm, draws, {{s.treatment, s.treated}}, s.conditions, opt);
    const SampleMatrix control = propagate(scm, draws, {{s.treatment, s.control}}, s.conditions, opt);
    std::vector<double> effects(static_cast<std::size_t>(draws.roots.rows()));
    for (std::size_t i = 0; i < effects.size(); ++i) {
        effects[i] = treated.values(static_cast<Eigen::Index>(i), out) - control.values(static_cast<Eigen::Index>(i), out);
    }
    return effects;
}

}  // namespace

EffectEstimate summarize_effects(std::vector<double> unit_effects) {
    EffectEstimate e;
    e.n = unit_effects.size();
    if (e.n == 0) return e;
    const double nd = static_cast<double>(e.n);
    e.tau = std::accumulate(unit_effects.begin(), unit_effects.end(), 0.0) / nd;
    double ss = 0;
    for (double v : unit_effects) ss += (v - e.tau) * (v - e.tau);
    e.mc_se = e.n > 1 ? std::sqrt(ss / (nd - 1)) / std::sqrt(nd) : 0.0;
    e.se = e.mc_se;
    e.cdf = unit_effects;
    std::sort(e.cdf.begin(), e.cdf.end());
    e.p05 = quantile_sorted(e.cdf, 0.05);
    e.p50 = quantile_sorted(e.cdf, 0.50);
    e.p95 = quantile_sorted(e.cdf, 0.95);
    e.histogram = make_histogram(unit_effects);
    e.unit_effects = std::move(unit_effects);
    return e;
}

EffectEstimate estimate_effect(const FittedScm& scm, const Scenario& s, const EstimateOptions& opt) {
    check_scenario(scm, s);
    const UnitDraws draws = draw_units(scm, s.n_samples, s.seed, opt.simulation);
    EffectEstimate e = summarize_effects(contrast(scm, draws, s, opt.simulation));

    if (opt.model_draws > 0) {
        std::vector<double> taus;
        taus.reserve(opt.model_draws);
        for (std::size_t b = 0; b < opt.model_draws; ++b) {
            const FittedScm draw = scm.perturbed(s.seed * 0x9E3779B97F4A7C15ull + b + 1);
            const auto effects = contrast(draw, draws, s, opt.simulation);
            taus.push_back(std::accumulate(effects.begin(), effects.end(), 0.0) / static_cast<double>(effects.size()));
        }
        const double mean = std::accumulate(taus.begin(), taus.end(), 0.0) / static_cast<double>(taus.size());
        double ss = 0;
        for (double t : taus) ss += (t - mean) * (t - mean);
        e.model_se = taus.size() > 1 ? std::sqrt(ss / static_cast<double>(taus.size() - 1)) : 0.0;
        e.se = std::sqrt(e.mc_se * e.mc_se + e.model_se * e.model_se);
    }
    return e;
}

EffectEstimate estimate_ate(const FittedScm& scm, const Scenario& s, const EstimateOptions& opt) {
    if (!s.conditions.empty()) throw ValidationError("ATE takes no conditions; use CATE");
    return estimate_effect(scm, s, opt);
}

EffectEstimate estimate_cate(const FittedScm& scm, const Scenario& s, const EstimateOptions& opt) {
    if (s.conditions.empty()) throw ValidationError("CATE requires at least one condition");
    return estimate_effect(scm, s, opt);
}

}  // namespace whatif
