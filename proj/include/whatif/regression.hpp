#pragma once

#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace whatif {

/// Feature map applied to a node's parents before least squares.
enum class Expansion {
    Linear,         // parents only
    Interactions2,  // all monomials up to degree 2 (squares and pairwise products)
    Interactions3,  // all monomials up to degree 3, reduced per node to fit the row budget
};

std::string_view to_string(Expansion e);
std::optional<Expansion> parse_expansion(std::string_view text);
int requested_degree(Expansion e);

/// Largest degree <= `requested` with fewer monomials than rows; never
/// below 1.
int effective_degree(std::size_t inputs, int requested, std::size_t rows);

/// Number of non-constant monomials in `inputs` variables up to `degree`.
std::size_t monomial_count(std::size_t inputs, int degree);

/// Polynomial ridge regression with an unpenalized intercept. Inputs are
/// z-scored with the training moments before expansion. The penalty is
/// relative to the mean diagonal of the feature Gram matrix; when not given
/// it is chosen from 10^-10 .. 10^2 by generalized cross-validation, so
/// well-conditioned designs end up indistinguishable from least squares.
class PolynomialModel {
public:
    PolynomialModel() = default;

    static PolynomialModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int degree,
                               std::optional<double> penalty = std::nullopt);

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    Eigen::VectorXd predict_all(const Eigen::MatrixXd& x) const;

    int degree() const noexcept { return degree_; }
    std::size_t features() const noexcept { return terms_.size(); }
    double r2() const noexcept { return r2_; }
    double residual_sd() const noexcept { return residual_sd_; }
    double penalty() const noexcept { return penalty_; }
    /// A copy with coefficients drawn from their approximate sampling
    /// distribution (Gaussian, ridge covariance with the residual
    /// variance). The copy cannot be perturbed again.
    PolynomialModel perturbed(std::mt19937_64& rng) const;
    /// Smallest Gram eigenvalue below 1e-12 of the largest.
    bool singular() const noexcept { return singular_; }
    const Eigen::VectorXd& coefficients() const noexcept { return coef_; }
    double intercept() const noexcept { return intercept_; }

private:
    Eigen::MatrixXd expand(const Eigen::MatrixXd& z) const;

    int degree_ = 1;
    std::vector<std::vector<int>> terms_;
    Eigen::RowVectorXd mean_;
    Eigen::RowVectorXd scale_;
    Eigen::VectorXd coef_;
    Eigen::RowVectorXd f_mean_;
    Eigen::MatrixXd coef_factor_;  // square root of the coefficient covariance
    double intercept_ = 0;
    double intercept_sd_ = 0;
    double r2_ = 0;
    double residual_sd_ = 0;
    double penalty_ = 0;
    bool singular_ = false;
};

}  // namespace whatif
