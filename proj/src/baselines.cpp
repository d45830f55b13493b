#include "sigreg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sigreg/common.hpp"
#include "sigreg/rng.hpp"

namespace sigreg {

namespace {

Eigen::MatrixXd basis_matrix(const Eigen::VectorXd& t, int n_basis) {
    Eigen::MatrixXd phi(t.size(), n_basis);
    phi.col(0).setOnes();
    for (int j = 1; 2 * j - 1 < n_basis; ++j) {
        phi.col(2 * j - 1) = (2.0 * std::numbers::pi * j * t.array()).sin();
        phi.col(2 * j) = (2.0 * std::numbers::pi * j * t.array()).cos();
    }
    return phi;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& design) {
    Eigen::MatrixXd F(design.rows(), design.cols() + 1);
    F.col(0).setOnes();
    F.rightCols(design.cols()) = design;
    return F;
}

}  // namespace

Eigen::MatrixXd fourier_design(const std::vector<SampledPath>& paths,
                               int n_basis) {
    if (paths.empty()) throw DataError("fourier: empty path set");
    if (n_basis < 1 || n_basis % 2 == 0)
        throw ConfigError("fourier: basis size must be odd and >= 1, got " +
                          std::to_string(n_basis));
    const Eigen::VectorXd& t = paths.front().times;
    const Eigen::Index d = paths.front().d();
    for (const auto& path : paths) {
        if (path.d() != d) throw DataError("fourier: paths mix dimensions");
        if (path.times.size() != t.size() ||
            (path.times - t).lpNorm<Eigen::Infinity>() > 1e-12)
            throw DataError("fourier: paths must share one time grid");
    }
    if (t.size() < n_basis)
        throw DataError("fourier: " + std::to_string(t.size()) +
                        " sample points cannot support " +
                        std::to_string(n_basis) + " basis functions");

    const Eigen::MatrixXd phi = basis_matrix(t, n_basis);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
    if (qr.rank() < n_basis)
        throw DataError("fourier: basis projection is rank-deficient on this "
                        "time grid");

    const auto n = static_cast<Eigen::Index>(paths.size());
    Eigen::MatrixXd out(n, d * n_basis);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < d; ++k)
            out.row(i).segment(k * n_basis, n_basis) =
                qr.solve(paths[i].values.col(k)).transpose();
    return out;
}

FourierModel fit_fourier_model(const std::vector<SampledPath>& paths,
                               const Eigen::VectorXd& targets,
                               const FourierOptions& opts) {
    if (paths.empty()) throw DataError("fourier fit: no paths");
    if (static_cast<std::size_t>(targets.size()) != paths.size())
        throw DataError("fourier fit: path/target count mismatch");
    if (opts.basis_grid.empty())
        throw ConfigError("fourier fit: empty basis grid");

    std::vector<int> basis_grid = opts.basis_grid;
    std::sort(basis_grid.begin(), basis_grid.end());
    basis_grid.erase(std::unique(basis_grid.begin(), basis_grid.end()),
                     basis_grid.end());

    std::vector<double> lambda_grid;
    if (opts.use_ols)
        lambda_grid = {0.0};
    else
        lambda_grid = opts.lambda_grid.empty() ? default_lambda_grid()
                                               : opts.lambda_grid;

    // One fold split shared by every candidate so scores are comparable.
    double best_err = std::numeric_limits<double>::infinity();
    int best_basis = -1;
    double best_lambda = 0.0;
    bool any_feasible = false;
    for (int n_basis : basis_grid) {
        if (paths.front().times.size() < n_basis) continue;  // grid too short
        any_feasible = true;
        const Eigen::MatrixXd F = with_intercept(fourier_design(paths, n_basis));
        const std::vector<double> errs =
            cv_errors(F, targets, lambda_grid, opts.k_folds, opts.seed);
        for (std::size_t l = 0; l < errs.size(); ++l) {
            // Strict < keeps the smaller basis on ties; within one basis,
            // ties go to the larger lambda.
            if (errs[l] < best_err ||
                (errs[l] == best_err && n_basis == best_basis &&
                 lambda_grid[l] > best_lambda)) {
                best_err = errs[l];
                best_basis = n_basis;
                best_lambda = lambda_grid[l];
            }
        }
    }
    if (!any_feasible)
        throw DataError("fourier fit: time grid is too short for every basis "
                        "size in the grid");

    const Eigen::MatrixXd F = with_intercept(fourier_design(paths, best_basis));
    FourierModel model;
    model.n_basis = best_basis;
    model.ridge = ridge_fit(F, targets, best_lambda);
    return model;
}

Eigen::VectorXd predict_fourier(const FourierModel& model,
                                const std::vector<SampledPath>& paths) {
    if (model.n_basis < 1)
        throw ConfigError("fourier predict: model is not fitted");
    const Eigen::MatrixXd F =
        with_intercept(fourier_design(paths, model.n_basis));
    return predict(model.ridge, F);
}

}  // namespace sigreg
