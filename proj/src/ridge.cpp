#include "sigreg/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sigreg/common.hpp"
#include "sigreg/rng.hpp"

namespace sigreg {

namespace detail {

Eigen::VectorXd solve_normal_equations(const Eigen::MatrixXd& A,
                                       const Eigen::VectorXd& b, double lambda) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (lambda == 0.0) {
        // Unregularized solves require full rank: a collinear design (for
        // instance a duplicated column) shows up as a zero-size pivot.
        const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
        const double tol = 64.0 * static_cast<double>(A.cols()) *
                           std::numeric_limits<double>::epsilon() *
                           d.maxCoeff();
        if (!(d.minCoeff() > tol))
            throw ConditioningError(
                "normal equations are singular at lambda=0; add "
                "regularization or drop collinear features");
    }
    Eigen::VectorXd x = ldlt.solve(b);
    const double bound = 1e-8 * std::max(1.0, b.lpNorm<Eigen::Infinity>());
    // A couple of refinement sweeps recover the last digits when the system
    // is merely ill-conditioned; a singular system stays above the bound (or
    // goes NaN) and is reported instead.
    for (int sweep = 0; sweep < 3; ++sweep) {
        Eigen::VectorXd r = b - A.selfadjointView<Eigen::Lower>() * x;
        if (r.lpNorm<Eigen::Infinity>() <= bound) return x;
        x += ldlt.solve(r);
    }
    Eigen::VectorXd r = b - A.selfadjointView<Eigen::Lower>() * x;
    if (r.lpNorm<Eigen::Infinity>() <= bound) return x;
    if (lambda == 0.0)
        throw ConditioningError(
            "normal equations are singular or too ill-conditioned at lambda=0; "
            "add regularization or drop collinear features");
    throw ConditioningError("normal equations did not reach the residual bound "
                            "(lambda=" + std::to_string(lambda) + ")");
}

}  // namespace detail

namespace {

void check_xy(const Eigen::MatrixXd& F, const Eigen::VectorXd& y) {
    if (F.rows() == 0 || F.cols() == 0)
        throw DataError("ridge: empty feature matrix");
    if (F.rows() != y.size())
        throw DataError("ridge: " + std::to_string(F.rows()) +
                        " feature rows vs " + std::to_string(y.size()) +
                        " targets");
    if (!F.allFinite() || !y.allFinite())
        throw DataError("ridge: non-finite entries in features or targets");
}

// Per-column scale factors: unit root-mean-square for penalized columns,
// 1 elsewhere (and for identically-zero columns).
Eigen::VectorXd column_scales(const Eigen::MatrixXd& F, const RidgeOptions& opts) {
    Eigen::VectorXd s = Eigen::VectorXd::Ones(F.cols());
    if (!opts.standardize) return s;
    const Eigen::Index first = opts.penalize_intercept ? 0 : 1;
    for (Eigen::Index j = first; j < F.cols(); ++j) {
        const double rms = std::sqrt(F.col(j).squaredNorm() / F.rows());
        if (rms > 0.0) s[j] = rms;
    }
    return s;
}

}  // namespace

RidgeModel ridge_fit(const Eigen::MatrixXd& features,
                     const Eigen::VectorXd& targets, double lambda,
                     const RidgeOptions& opts) {
    check_xy(features, targets);
    if (!(lambda >= 0.0)) throw ConfigError("ridge: lambda must be >= 0");
    const Eigen::Index n = features.rows();
    const Eigen::Index q = features.cols();

    const Eigen::VectorXd scales = column_scales(features, opts);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(q, q);
    A.selfadjointView<Eigen::Lower>().rankUpdate(features.transpose(), 1.0 / n);
    A = A.selfadjointView<Eigen::Lower>();
    Eigen::VectorXd b = features.transpose() * targets / static_cast<double>(n);
    if (opts.standardize) {
        A.array().colwise() /= scales.array();
        A.array().rowwise() /= scales.transpose().array();
        b.array() /= scales.array();
    }
    const Eigen::Index first = opts.penalize_intercept ? 0 : 1;
    for (Eigen::Index j = first; j < q; ++j) A(j, j) += lambda;

    Eigen::VectorXd beta = detail::solve_normal_equations(A, b, lambda);
    if (opts.standardize) beta.array() /= scales.array();
    return RidgeModel{std::move(beta), lambda, std::nullopt};
}

Eigen::VectorXd predict(const RidgeModel& model, const Eigen::MatrixXd& features) {
    if (features.cols() != model.coeffs.size())
        throw ConfigError("predict: model has " +
                          std::to_string(model.coeffs.size()) +
                          " coefficients but features have " +
                          std::to_string(features.cols()) + " columns");
    return features * model.coeffs;
}

double empirical_risk(const RidgeModel& model, const Eigen::MatrixXd& features,
                      const Eigen::VectorXd& targets) {
    check_xy(features, targets);
    return (targets - predict(model, features)).squaredNorm() / features.rows();
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    grid.reserve(91);
    for (int i = 0; i <= 90; ++i) grid.push_back(std::pow(10.0, -6.0 + 0.1 * i));
    return grid;
}

std::vector<double> cv_errors(const Eigen::MatrixXd& features,
                              const Eigen::VectorXd& targets,
                              std::span<const double> lambda_grid, int k_folds,
                              std::uint64_t seed, const RidgeOptions& opts) {
    check_xy(features, targets);
    const Eigen::Index n = features.rows();
    if (lambda_grid.empty()) throw ConfigError("cv: empty lambda grid");
    for (double l : lambda_grid)
        if (!(l >= 0.0)) throw ConfigError("cv: lambdas must be >= 0");
    if (k_folds < 2) throw ConfigError("cv: need at least 2 folds");
    if (k_folds > n)
        throw ConfigError("cv: " + std::to_string(k_folds) + " folds for " +
                          std::to_string(n) + " samples");

    // Seed-shuffled permutation, then contiguous folds.
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    Rng rng(split_seed(seed, 0xcf01d5u));
    for (Eigen::Index i = n - 1; i > 0; --i) {
        const auto j = static_cast<Eigen::Index>(rng.next_u64() %
                                                 static_cast<std::uint64_t>(i + 1));
        std::swap(perm[i], perm[j]);
    }

    const auto n_lambdas = static_cast<Eigen::Index>(lambda_grid.size());
    Eigen::MatrixXd fold_sse = Eigen::MatrixXd::Zero(k_folds, n_lambdas);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < k_folds; ++f) {
      try {
        const Eigen::Index lo = n * f / k_folds;
        const Eigen::Index hi = n * (f + 1) / k_folds;
        const Eigen::Index n_test = hi - lo;
        const Eigen::Index n_train = n - n_test;
        Eigen::MatrixXd F_train(n_train, features.cols());
        Eigen::MatrixXd F_test(n_test, features.cols());
        Eigen::VectorXd y_train(n_train), y_test(n_test);
        Eigen::Index it = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (i >= lo && i < hi) {
                F_test.row(i - lo) = features.row(perm[i]);
                y_test[i - lo] = targets[perm[i]];
            } else {
                F_train.row(it) = features.row(perm[i]);
                y_train[it] = targets[perm[i]];
                ++it;
            }
        }
        for (Eigen::Index l = 0; l < n_lambdas; ++l) {
            RidgeModel m = ridge_fit(F_train, y_train, lambda_grid[l], opts);
            fold_sse(f, l) = (y_test - predict(m, F_test)).squaredNorm();
        }
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<double> errs(lambda_grid.size());
    for (Eigen::Index l = 0; l < n_lambdas; ++l)
        errs[l] = fold_sse.col(l).sum() / static_cast<double>(n);
    return errs;
}

double cv_select_lambda(const Eigen::MatrixXd& features,
                        const Eigen::VectorXd& targets,
                        std::span<const double> lambda_grid, int k_folds,
                        std::uint64_t seed, const RidgeOptions& opts) {
    std::vector<double> fallback;
    if (lambda_grid.empty()) {
        fallback = default_lambda_grid();
        lambda_grid = fallback;
    }
    const std::vector<double> errs =
        cv_errors(features, targets, lambda_grid, k_folds, seed, opts);
    std::size_t best = 0;
    for (std::size_t i = 1; i < errs.size(); ++i) {
        if (errs[i] < errs[best] ||
            (errs[i] == errs[best] && lambda_grid[i] > lambda_grid[best]))
            best = i;
    }
    return lambda_grid[best];
}

}  // namespace sigreg
