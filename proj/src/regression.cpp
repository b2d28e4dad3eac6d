#include "whatif/regression.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "whatif/error.hpp"

namespace whatif {

std::string_view to_string(Expansion e) {
    switch (e) {
        case Expansion::Linear: return "linear";
        case Expansion::Interactions2: return "interactions2";
        case Expansion::Interactions3: return "interactions3";
    }
    return "linear";
}

std::optional<Expansion> parse_expansion(std::string_view text) {
    if (text == "linear") return Expansion::Linear;
    if (text == "interactions2") return Expansion::Interactions2;
    if (text == "interactions3") return Expansion::Interactions3;
    return std::nullopt;
}

int requested_degree(Expansion e) {
    switch (e) {
        case Expansion::Linear: return 1;
        case Expansion::Interactions2: return 2;
        case Expansion::Interactions3: return 3;
    }
    return 1;
}

std::size_t monomial_count(std::size_t inputs, int degree) {
    // C(inputs + degree, degree) - 1
    double c = 1;
    for (int i = 1; i <= degree; ++i) c = c * static_cast<double>(inputs + static_cast<std::size_t>(i)) / i;
    return static_cast<std::size_t>(std::llround(c)) - 1;
}

int effective_degree(std::size_t inputs, int requested, std::size_t rows) {
    int d = requested;
    while (d > 1 && monomial_count(inputs, d) >= rows) --d;
    return d;
}

namespace {

constexpr double kMinLogPenalty = -10.0;
constexpr int kPenaltySteps = 48;  // 10^-10 .. 10^2 in quarter decades

std::vector<std::vector<int>> make_terms(int inputs, int degree) {
    std::vector<std::vector<int>> terms;
    std::vector<int> cur;
    std::function<void(int, int)> rec = [&](int start, int left) {
        if (!cur.empty()) terms.push_back(cur);
        if (left == 0) return;
        for (int i = start; i < inputs; ++i) {
            cur.push_back(i);
            rec(i, left - 1);
            cur.pop_back();
        }
    };
    rec(0, degree);
    return terms;
}

}  // namespace

Eigen::MatrixXd PolynomialModel::expand(const Eigen::MatrixXd& z) const {
    Eigen::MatrixXd f(z.rows(), static_cast<Eigen::Index>(terms_.size()));
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        Eigen::VectorXd col = Eigen::VectorXd::Ones(z.rows());
        for (int i : terms_[t]) col.array() *= z.col(i).array();
        f.col(static_cast<Eigen::Index>(t)) = col;
    }
    return f;
}

PolynomialModel PolynomialModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int degree,
                                     std::optional<double> penalty) {
    if (x.rows() != y.size()) throw ValidationError("regression: row count mismatch");
    if (x.rows() < 2) throw ValidationError("regression: at least 2 rows required");
    if (degree < 1) throw ValidationError("regression: degree must be >= 1");
    PolynomialModel m;
    m.degree_ = degree;
    const auto n = x.rows();
    const double nd = static_cast<double>(n);
    m.mean_ = x.colwise().mean();
    m.scale_.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double sd = std::sqrt((x.col(j).array() - m.mean_(j)).square().sum() / nd);
        m.scale_(j) = sd > 0 ? sd : 1.0;
    }
    m.terms_ = make_terms(static_cast<int>(x.cols()), degree);

    const double y_mean = y.mean();
    const Eigen::VectorXd yc = y.array() - y_mean;
    if (m.terms_.empty()) {
        m.coef_.resize(0);
        m.intercept_ = y_mean;
        const double rss = yc.squaredNorm();
        m.r2_ = 0;
        m.residual_sd_ = std::sqrt(rss / std::max<double>(1, nd - 1));
        m.intercept_sd_ = m.residual_sd_ / std::sqrt(nd);
        return m;
    }

    Eigen::MatrixXd z = x;
    z.rowwise() -= m.mean_;
    z.array().rowwise() /= m.scale_.array();
    Eigen::MatrixXd f = m.expand(z);
    const Eigen::RowVectorXd f_mean = f.colwise().mean();
    f.rowwise() -= f_mean;

    const Eigen::MatrixXd gram = f.transpose() * f / nd;
    const Eigen::VectorXd fty = f.transpose() * yc / nd;
    const double scale = gram.trace() / static_cast<double>(gram.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    const Eigen::VectorXd proj = es.eigenvectors().transpose() * fty;
    m.singular_ = ev.minCoeff() <= 1e-12 * ev.maxCoeff();

    auto solve = [&](double rel) -> Eigen::VectorXd {
        return es.eigenvectors() * (proj.array() / (ev.array() + rel * scale)).matrix();
    };
    auto effective_dof = [&](double rel) { return (ev.array() / (ev.array() + rel * scale)).sum(); };

    if (penalty) {
        if (!(*penalty >= 0) || !std::isfinite(*penalty)) throw ValidationError("regression: penalty must be >= 0");
        m.penalty_ = *penalty;
    } else {
        // Generalized cross-validation over the ridge path.
        double best = std::numeric_limits<double>::infinity();
        m.penalty_ = std::pow(10.0, kMinLogPenalty + 0.25 * kPenaltySteps);
        for (int k = 0; k <= kPenaltySteps; ++k) {
            const double rel = std::pow(10.0, kMinLogPenalty + 0.25 * k);
            const double resid_dof = nd - effective_dof(rel);
            if (resid_dof <= 0) continue;
            const double gcv = nd * (yc - f * solve(rel)).squaredNorm() / (resid_dof * resid_dof);
            if (gcv < best) {
                best = gcv;
                m.penalty_ = rel;
            }
        }
    }
    m.coef_ = solve(m.penalty_);
    m.f_mean_ = f_mean;
    m.intercept_ = y_mean - f_mean.dot(m.coef_);

    const double rss = (yc - f * m.coef_).squaredNorm();
    const double tss = yc.squaredNorm();
    m.r2_ = tss > 0 ? 1.0 - rss / tss : (rss == 0 ? 1.0 : 0.0);
    const double resid_dof = nd - effective_dof(m.penalty_) - 1;
    m.residual_sd_ = std::sqrt(rss / (resid_dof > 0 ? resid_dof : nd));

    // Cov(coef) = s^2 / n * (G + L)^-1 G (G + L)^-1; keep a square root.
    const double lambda = m.penalty_ * scale;
    const Eigen::VectorXd root = ev.array().sqrt() / (ev.array() + lambda);
    m.coef_factor_ = es.eigenvectors() * root.asDiagonal();
    m.coef_factor_ *= m.residual_sd_ / std::sqrt(nd);
    m.intercept_sd_ = m.residual_sd_ / std::sqrt(nd);
    return m;
}

PolynomialModel PolynomialModel::perturbed(std::mt19937_64& rng) const {
    PolynomialModel out;
    out.degree_ = degree_;
    out.terms_ = terms_;
    out.mean_ = mean_;
    out.scale_ = scale_;
    out.f_mean_ = f_mean_;
    out.penalty_ = penalty_;
    out.r2_ = r2_;
    out.residual_sd_ = residual_sd_;
    out.singular_ = singular_;
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(coef_factor_.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    const Eigen::VectorXd delta = coef_factor_.cols() > 0 ? Eigen::VectorXd(coef_factor_ * z) : Eigen::VectorXd();
    out.coef_ = coef_.size() > 0 ? Eigen::VectorXd(coef_ + delta) : coef_;
    // The centered-feature intercept moves independently of the slopes.
    const double center = intercept_ + (coef_.size() > 0 ? f_mean_.dot(coef_) : 0.0);
    const double shifted = center + intercept_sd_ * normal(rng);
    out.intercept_ = shifted - (coef_.size() > 0 ? f_mean_.dot(out.coef_) : 0.0);
    return out;
}

double PolynomialModel::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double out = intercept_;
    for (std::size_t t = 0; t < terms_.size(); ++t) {
        double v = 1;
        for (int i : terms_[t]) v *= (x(i) - mean_(i)) / scale_(i);
        out += coef_(static_cast<Eigen::Index>(t)) * v;
    }
    return out;
}

Eigen::VectorXd PolynomialModel::predict_all(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict(x.row(i));
    return out;
}

}  // namespace whatif
