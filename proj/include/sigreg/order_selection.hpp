#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "sigreg/common.hpp"
#include "sigreg/path.hpp"
#include "sigreg/ridge.hpp"
#include "sigreg/signature.hpp"

// Selection of the signature truncation order. For each candidate order m the
// training risk of the ridge estimator on order-<=m signature features is
// computed (one signature batch at the largest order serves every m, because
// the flat layout is level-major and lower orders are prefixes). The selected
// order minimizes risk + penalty, where the penalty grows like the square
// root of the feature count; its constant K_pen can be given or calibrated
// from the data by the dimension-jump heuristic.

namespace sigreg {

struct PenaltyConfig {
    // K_pen <= 0 means: calibrate via the dimension jump on the default grid.
    double k_pen = 0.0;
    double rho = 0.4;  // penalty exponent, must lie in (0, 1/2)
    // m_max <= 0 means: automatic horizon — every order whose feature count
    // stays within the sample count, plus one look-ahead order, capped by
    // default_m_max(d).
    int m_max = 0;
};

struct FitOptions {
    // lambda < 0 means: select by k-fold CV on the order-1 features and reuse
    // that value along the whole risk curve.
    double lambda = -1.0;
    std::vector<double> lambda_grid;  // empty: default_lambda_grid()
    int k_folds = 5;
    std::uint64_t seed = 0;
};

struct OrderSelectionResult {
    int m_hat = 0;
    std::vector<double> risks;      // m_max + 1 entries, index = order
    std::vector<double> penalties;  // same length
    double lambda = 0.0;
    double k_pen_used = 0.0;
};

struct SignatureFit {
    OrderSelectionResult selection;
    RidgeModel model;  // ridge fit at order m_hat; shape is set
};

// Largest order whose flat feature length 1 + sig_dim(d, m) stays within
// `budget`, capped at 10. Throws CapacityError when even m = 1 does not fit.
int default_m_max(int d, std::size_t budget = coefficient_budget());

// k_pen * n^(-rho) * sqrt(1 + sig_dim(d, m)).
double penalty(std::size_t n, int m, int d, const PenaltyConfig& cfg);

// Training risks of the ridge estimators for m = 0..m_max on the given
// (already augmented) paths. Entry 0 is the variance of the targets around
// their mean. lambda must be >= 0 here.
std::vector<double> risk_curve(const std::vector<SampledPath>& augmented_paths,
                               const Eigen::VectorXd& targets, int m_max,
                               double lambda);

// Smallest index minimizing risks[m] + penalties[m].
int select_order(std::span<const double> risks, std::span<const double> penalties);

// Log-spaced 1e-3 .. 1e4, 15 points per decade (106 values).
std::vector<double> default_kpen_grid();

// Dimension-jump calibration of K_pen: sweep the grid (ascending), record the
// selected order for each value, find the first grid point where the drop in
// selected order is maximal, and return twice that K_pen. Takes raw paths and
// augments internally; lambda < 0 selects it by CV as in fit_signature_model.
// Throws ConfigError when the selected order never drops on the grid (the
// grid is too narrow to show the jump).
double dimension_jump(const std::vector<SampledPath>& raw_paths,
                      const Eigen::VectorXd& targets, int m_max, double lambda,
                      std::span<const double> kpen_grid = {}, double rho = 0.4);

// Full pipeline on raw paths: time-augment, pick lambda by CV on order-1
// features (unless given), compute the risk curve up to m_max, calibrate
// K_pen by the dimension jump (unless given), select the order, and return
// that order's ridge model. An order whose feature count exceeds the sample
// count can only win when the penalized objective rises strictly from it to
// the horizon m_max; while the objective is still falling at the horizon the
// selection is restricted to orders with determined normal equations. With
// cfg.m_max <= 0 the horizon itself stops one order past that determined
// range (see PenaltyConfig). Deterministic for fixed inputs and seed.
SignatureFit fit_signature_model(const std::vector<SampledPath>& raw_paths,
                                 const Eigen::VectorXd& targets,
                                 const PenaltyConfig& cfg = {},
                                 const FitOptions& opts = {});

// Prediction on raw paths with a signature-shaped model: augments, computes
// signatures at the model's order, applies the coefficients.
Eigen::VectorXd predict_signature(const RidgeModel& model,
                                  const std::vector<SampledPath>& raw_paths);

}  // namespace sigreg
