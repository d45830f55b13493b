#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sigreg/signature.hpp"

// Ridge regression on explicit feature matrices, solved through the normal
// equations (F'F/n + lambda*D) beta = F'y/n with an LDLT factorization and
// iterative refinement. Column 0 is treated as the intercept and left out of
// the penalty unless asked otherwise. All solves enforce a residual bound of
// 1e-8 * max(1, ||F'y/n||_inf); systems that cannot meet it (singular normal
// equations at lambda = 0, for instance) raise ConditioningError instead of
// returning garbage.

namespace sigreg {

struct RidgeOptions {
    // Penalize column 0 too. Off by default: column 0 is the intercept /
    // constant signature coefficient.
    bool penalize_intercept = false;
    // Scale penalized columns to unit root-mean-square before solving and map
    // coefficients back. Scaling only (no centering), so the mapping is exact
    // whatever column 0 contains.
    bool standardize = false;
};

struct RidgeModel {
    Eigen::VectorXd coeffs;
    double lambda = 0.0;
    // Set when the coefficients index a truncated-signature layout, in which
    // case coeffs.size() == shape->len.
    std::optional<SigShape> shape;
};

RidgeModel ridge_fit(const Eigen::MatrixXd& features,
                     const Eigen::VectorXd& targets, double lambda,
                     const RidgeOptions& opts = {});

Eigen::VectorXd predict(const RidgeModel& model, const Eigen::MatrixXd& features);

// Mean squared prediction error of the model on the given data.
double empirical_risk(const RidgeModel& model, const Eigen::MatrixXd& features,
                      const Eigen::VectorXd& targets);

// Log-spaced 1e-6 .. 1e3, 10 points per decade (91 values).
std::vector<double> default_lambda_grid();

// Mean out-of-fold squared error for every lambda in the grid, using k
// contiguous folds of a seed-shuffled index permutation. Folds are identical
// for every lambda (and for every caller passing the same seed), so scores
// are comparable across grids.
std::vector<double> cv_errors(const Eigen::MatrixXd& features,
                              const Eigen::VectorXd& targets,
                              std::span<const double> lambda_grid, int k_folds,
                              std::uint64_t seed, const RidgeOptions& opts = {});

// Lambda with the smallest cross-validation error; ties go to the larger
// lambda. An empty grid means default_lambda_grid().
double cv_select_lambda(const Eigen::MatrixXd& features,
                        const Eigen::VectorXd& targets,
                        std::span<const double> lambda_grid = {},
                        int k_folds = 5, std::uint64_t seed = 0,
                        const RidgeOptions& opts = {});

namespace detail {

// Solves A x = b for symmetric positive semidefinite A (full storage) with
// LDLT plus refinement; enforces the residual bound. At lambda == 0 a
// rank-deficient A raises ConditioningError instead of being pseudo-solved.
Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& A,
                                       const Eigen::VectorXd& b, double lambda);

}  // namespace detail

}  // namespace sigreg
