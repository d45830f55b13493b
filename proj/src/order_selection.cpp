#include "sigreg/order_selection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sigreg/common.hpp"
#include "sigreg/rng.hpp"

namespace sigreg {

namespace {

struct Curve {
    std::vector<double> risks;
    std::vector<RidgeModel> models;
};

// Risk curve from one signature feature matrix at the largest order: the
// order-m estimator uses the leading 1 + sig_dim(d, m) columns. The Gram
// matrix is accumulated once and its leading blocks are reused.
Curve curve_from_features(const Eigen::MatrixXd& F, const Eigen::VectorXd& y,
                          int d, int m_max, double lambda) {
    const Eigen::Index n = F.rows();
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(F.cols(), F.cols());
    G.selfadjointView<Eigen::Lower>().rankUpdate(F.transpose(), 1.0 / n);
    const Eigen::VectorXd g = F.transpose() * y / static_cast<double>(n);

    Curve curve;
    curve.risks.assign(m_max + 1, 0.0);
    curve.models.resize(m_max + 1);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int m = 0; m <= m_max; ++m) {
        try {
            const SigShape shape(d, m);
            const auto q = static_cast<Eigen::Index>(shape.len);
            Eigen::MatrixXd A = G.topLeftCorner(q, q)
                                    .selfadjointView<Eigen::Lower>();
            for (Eigen::Index j = 1; j < q; ++j) A(j, j) += lambda;
            Eigen::VectorXd beta =
                detail::solve_normal_equations(A, g.head(q), lambda);
            curve.risks[m] =
                (y - F.leftCols(q) * beta).squaredNorm() / static_cast<double>(n);
            curve.models[m] = RidgeModel{std::move(beta), lambda, shape};
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return curve;
}

void check_penalty_params(double k_pen, double rho) {
    if (!(k_pen > 0.0)) throw ConfigError("penalty: K_pen must be > 0");
    if (!(rho > 0.0 && rho < 0.5))
        throw ConfigError("penalty: rho must lie in (0, 1/2)");
}

double penalty_base(std::size_t n, int m, int d, double rho) {
    return std::pow(static_cast<double>(n), -rho) *
           std::sqrt(static_cast<double>(1 + sig_dim(d, m)));
}

// Selected orders along the K_pen grid, then the first maximal drop.
double jump_from_risks(std::span<const double> risks, std::size_t n, int d,
                       double rho, std::span<const double> grid) {
    if (grid.size() < 2)
        throw ConfigError("dimension jump: K_pen grid needs at least 2 values");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0))
            throw ConfigError("dimension jump: K_pen values must be > 0");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ConfigError("dimension jump: K_pen grid must be strictly "
                              "increasing");
    }
    const int m_max = static_cast<int>(risks.size()) - 1;
    std::vector<double> base(m_max + 1);
    for (int m = 0; m <= m_max; ++m) base[m] = penalty_base(n, m, d, rho);

    std::vector<double> pen(m_max + 1);
    int prev = 0, best_drop = 0;
    std::size_t best_at = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (int m = 0; m <= m_max; ++m) pen[m] = grid[i] * base[m];
        const int m_hat = select_order(risks, pen);
        if (i > 0) {
            const int drop = prev - m_hat;  // selected order never increases
            if (drop > best_drop) {
                best_drop = drop;
                best_at = i;
            }
        }
        prev = m_hat;
    }
    if (best_drop <= 0)
        throw ConfigError("dimension jump: selected order never drops on the "
                          "K_pen grid; widen the grid");
    return 2.0 * grid[best_at];
}

double select_lambda_for(const Eigen::MatrixXd& F, const Eigen::VectorXd& y,
                         int d, const FitOptions& opts) {
    if (opts.lambda >= 0.0) return opts.lambda;
    const Eigen::Index q1 = 1 + static_cast<Eigen::Index>(d);
    return cv_select_lambda(F.leftCols(q1), y, opts.lambda_grid, opts.k_folds,
                            split_seed(opts.seed, 0xcafe11u));
}

}  // namespace

int default_m_max(int d, std::size_t budget) {
    int best = 0;
    for (int m = 1; m <= 10; ++m) {
        try {
            if (1 + sig_dim(d, m) > budget) break;
        } catch (const CapacityError&) {
            break;
        }
        best = m;
    }
    if (best == 0)
        throw CapacityError("even order 1 exceeds the coefficient budget for "
                            "dimension " + std::to_string(d));
    return best;
}

double penalty(std::size_t n, int m, int d, const PenaltyConfig& cfg) {
    check_penalty_params(cfg.k_pen, cfg.rho);
    if (n == 0) throw ConfigError("penalty: n must be >= 1");
    return cfg.k_pen * penalty_base(n, m, d, cfg.rho);
}

std::vector<double> risk_curve(const std::vector<SampledPath>& augmented_paths,
                               const Eigen::VectorXd& targets, int m_max,
                               double lambda) {
    if (m_max < 0) throw ConfigError("risk_curve: m_max must be >= 0");
    if (!(lambda >= 0.0)) throw ConfigError("risk_curve: lambda must be >= 0");
    if (static_cast<std::size_t>(targets.size()) != augmented_paths.size())
        throw DataError("risk_curve: path/target count mismatch");
    const Eigen::MatrixXd F = batch_signatures(augmented_paths, m_max);
    const int d = static_cast<int>(augmented_paths.front().d());
    return curve_from_features(F, targets, d, m_max, lambda).risks;
}

int select_order(std::span<const double> risks, std::span<const double> penalties) {
    if (risks.empty() || risks.size() != penalties.size())
        throw ConfigError("select_order: risks and penalties must have equal, "
                          "nonzero length");
    std::size_t best = 0;
    double best_val = risks[0] + penalties[0];
    for (std::size_t m = 1; m < risks.size(); ++m) {
        const double val = risks[m] + penalties[m];
        if (val < best_val) {  // ties keep the smaller order
            best_val = val;
            best = m;
        }
    }
    return static_cast<int>(best);
}

std::vector<double> default_kpen_grid() {
    std::vector<double> grid;
    grid.reserve(106);
    for (int i = 0; i <= 105; ++i)
        grid.push_back(std::pow(10.0, -3.0 + i / 15.0));
    return grid;
}

double dimension_jump(const std::vector<SampledPath>& raw_paths,
                      const Eigen::VectorXd& targets, int m_max, double lambda,
                      std::span<const double> kpen_grid, double rho) {
    if (m_max < 1) throw ConfigError("dimension jump: m_max must be >= 1");
    if (static_cast<std::size_t>(targets.size()) != raw_paths.size())
        throw DataError("dimension jump: path/target count mismatch");
    std::vector<double> fallback;
    if (kpen_grid.empty()) {
        fallback = default_kpen_grid();
        kpen_grid = fallback;
    }
    const std::vector<SampledPath> aug = time_augment(raw_paths);
    const int d = static_cast<int>(aug.front().d());
    const Eigen::MatrixXd F = batch_signatures(aug, m_max);
    const double lam =
        lambda >= 0.0 ? lambda : select_lambda_for(F, targets, d, FitOptions{});
    const Curve curve = curve_from_features(F, targets, d, m_max, lam);
    return jump_from_risks(curve.risks, raw_paths.size(), d, rho, kpen_grid);
}

SignatureFit fit_signature_model(const std::vector<SampledPath>& raw_paths,
                                 const Eigen::VectorXd& targets,
                                 const PenaltyConfig& cfg,
                                 const FitOptions& opts) {
    if (raw_paths.empty()) throw DataError("fit: no paths");
    if (static_cast<std::size_t>(targets.size()) != raw_paths.size())
        throw DataError("fit: " + std::to_string(raw_paths.size()) +
                        " paths vs " + std::to_string(targets.size()) +
                        " targets");
    if (!(cfg.rho > 0.0 && cfg.rho < 0.5))
        throw ConfigError("fit: rho must lie in (0, 1/2)");

    const std::vector<SampledPath> aug = time_augment(raw_paths);
    const int d = static_cast<int>(aug.front().d());
    const std::size_t n = raw_paths.size();
    int m_max = cfg.m_max;
    if (m_max <= 0) {
        // Automatic horizon: the orders whose feature count stays within the
        // sample count, plus one look-ahead order so an objective that turns
        // upward at that boundary is still observed. Deeper underdetermined
        // orders only lower the training risk by construction — the selection
        // below cannot use them — while their normal equations grow as the
        // square of the feature count.
        m_max = default_m_max(d);
        int det = 0;
        for (int m = 1; m <= m_max && 1 + sig_dim(d, m) <= n; ++m) det = m;
        m_max = std::min(m_max, det + 1);
    }

    const Eigen::MatrixXd F = batch_signatures(aug, m_max);
    const double lambda = select_lambda_for(F, targets, d, opts);
    Curve curve = curve_from_features(F, targets, d, m_max, lambda);

    const double k_pen =
        cfg.k_pen > 0.0
            ? cfg.k_pen
            : jump_from_risks(curve.risks, n, d, cfg.rho, default_kpen_grid());

    std::vector<double> penalties(m_max + 1);
    const PenaltyConfig used{k_pen, cfg.rho, m_max};
    for (int m = 0; m <= m_max; ++m) penalties[m] = penalty(n, m, d, used);

    // The horizon m_max may reach orders whose feature count exceeds n.
    // There the training risk keeps falling by construction (the normal
    // equations are underdetermined), so the plain argmin is kept only when
    // the penalized objective has genuinely turned upward: it must rise
    // strictly from the argmin all the way to the horizon. Otherwise the
    // selection is restricted to orders with determined systems.
    int m_hat = select_order(curve.risks, penalties);
    bool rises_to_horizon = m_hat < m_max;
    for (int m = m_hat; rises_to_horizon && m < m_max; ++m)
        rises_to_horizon = curve.risks[m] + penalties[m] <
                           curve.risks[m + 1] + penalties[m + 1];
    if (!rises_to_horizon) {
        int cap = 0;
        for (int m = 1; m <= m_max && 1 + sig_dim(d, m) <= n; ++m) cap = m;
        m_hat = select_order(std::span(curve.risks).first(cap + 1),
                             std::span(penalties).first(cap + 1));
    }

    OrderSelectionResult selection{m_hat, std::move(curve.risks),
                                   std::move(penalties), lambda, k_pen};
    return SignatureFit{std::move(selection), std::move(curve.models[m_hat])};
}

Eigen::VectorXd predict_signature(const RidgeModel& model,
                                  const std::vector<SampledPath>& raw_paths) {
    if (!model.shape)
        throw ConfigError("predict_signature: model carries no signature shape");
    const std::vector<SampledPath> aug = time_augment(raw_paths);
    if (!aug.empty() && aug.front().d() != model.shape->d)
        throw DataError("predict_signature: model expects augmented dimension " +
                        std::to_string(model.shape->d) + ", got " +
                        std::to_string(aug.front().d()));
    const Eigen::MatrixXd F = batch_signatures(aug, model.shape->m);
    return predict(model, F);
}

}  // namespace sigreg
