#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sigreg/path.hpp"
#include "sigreg/ridge.hpp"

// Functional baseline: project each coordinate onto a truncated Fourier basis
// on [0, 1] and regress the targets on the stacked basis coefficients. Unlike
// signatures this representation depends on the sampling times, so all paths
// in one design must share their time grid.

namespace sigreg {

// Least-squares basis coefficients, one row per path. The basis has n_basis
// functions (odd: the constant plus sin/cos pairs at integer frequencies);
// each row stacks the n_basis coefficients of the d coordinates. Throws
// DataError when paths disagree on the time grid, when p < n_basis, or when
// the projection is rank-deficient.
Eigen::MatrixXd fourier_design(const std::vector<SampledPath>& paths,
                               int n_basis);

struct FourierOptions {
    std::vector<int> basis_grid = {5, 7, 9, 11, 13};  // odd sizes to try
    std::vector<double> lambda_grid;                  // empty: default grid
    int k_folds = 5;
    std::uint64_t seed = 0;
    bool use_ols = false;  // plain least squares instead of ridge (lambda = 0)
};

struct FourierModel {
    int n_basis = 0;
    RidgeModel ridge;  // over [intercept | stacked basis coefficients]
};

// Joint cross-validation of basis size and lambda on a shared fold split;
// ties prefer the smaller basis, then the larger lambda. Basis sizes the grid
// cannot support (p < n_basis) are skipped; if none fits, DataError.
FourierModel fit_fourier_model(const std::vector<SampledPath>& paths,
                               const Eigen::VectorXd& targets,
                               const FourierOptions& opts = {});

Eigen::VectorXd predict_fourier(const FourierModel& model,
                                const std::vector<SampledPath>& paths);

}  // namespace sigreg
