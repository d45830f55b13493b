#include "sigreg/cli.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <json.hpp>
#include <map>
#include <numeric>

#include "sigreg/baselines.hpp"
#include "sigreg/common.hpp"
#include "sigreg/rng.hpp"

namespace sigreg {

namespace {

using json = nlohmann::ordered_json;

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_json_atomic(const std::filesystem::path& file, const json& j) {
    write_text_atomic(file, j.dump(2) + "\n");
}

const char* model_name(SimModel m) {
    return m == SimModel::polysinus ? "polysinus" : "gaussian_process";
}

const char* response_name(SimResponse r) {
    switch (r) {
        case SimResponse::signature: return "signature";
        case SimResponse::mean_next_step: return "mean_next_step";
        case SimResponse::trend_norm: return "trend_norm";
    }
    return "?";
}

const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::toy_convergence: return "toy-convergence";
        case ExperimentKind::dimension_polysinus: return "dimension-polysinus";
        case ExperimentKind::dimension_gp: return "dimension-gp";
        case ExperimentKind::csv: return "csv";
    }
    return "?";
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

}  // namespace

void apply_global_options(const GlobalOptions& g) {
    if (g.threads < 0) throw ConfigError("--threads must be >= 0");
    if (g.threads > 0) omp_set_num_threads(g.threads);
    if (g.budget > 0) set_coefficient_budget(g.budget);
}

std::pair<PathsCsv, Eigen::VectorXd> ingest_csv(
    const std::filesystem::path& paths_csv,
    const std::filesystem::path& targets_csv) {
    PathsCsv data = read_paths_csv(paths_csv);
    Eigen::VectorXd y = read_targets_csv(targets_csv, data.ids);
    return {std::move(data), std::move(y)};
}

void cmd_simulate(const SimulateArgs& args) {
    if (args.out_dir.empty()) throw ConfigError("simulate: --out is required");
    const Dataset data = generate(args.spec);
    const std::vector<std::string> ids = default_sample_ids(data.paths.size());

    write_paths_csv(args.out_dir / "paths.csv", data.paths, ids);
    write_targets_csv(args.out_dir / "targets.csv", data.targets, ids);

    json manifest;
    manifest["version"] = kVersion;
    manifest["model"] = model_name(args.spec.model);
    manifest["response"] = response_name(args.spec.response);
    manifest["n"] = args.spec.n;
    manifest["d"] = args.spec.d;
    manifest["p"] = args.spec.p;
    manifest["seed"] = args.spec.seed;
    if (args.spec.response == SimResponse::signature)
        manifest["m_star"] = args.spec.m_star;
    manifest["files"] = {"paths.csv", "targets.csv"};
    write_json_atomic(args.out_dir / "manifest.json", manifest);
}

namespace {

// Column names spell out the multi-index: "s" for the constant, then
// "s1", "s2", ..., "s1.1", "s1.2", ... (dot-separated coordinate letters).
std::string signature_header(int d, int m) {
    std::string out = "sample_id,s";
    std::vector<int> word;
    for (int level = 1; level <= m; ++level) {
        word.assign(level, 1);
        while (true) {
            out += ",s";
            for (int j = 0; j < level; ++j) {
                if (j) out += '.';
                out += std::to_string(word[j]);
            }
            int pos = level - 1;
            while (pos >= 0 && word[pos] == d) word[pos--] = 1;
            if (pos < 0) break;
            ++word[pos];
        }
    }
    return out;
}

}  // namespace

void cmd_signature(const SignatureArgs& args) {
    if (args.out_csv.empty()) throw ConfigError("signature: --out is required");
    if (args.m < 0) throw ConfigError("signature: order must be >= 0");
    PathsCsv data = read_paths_csv(args.paths_csv);
    if (args.augment) data.paths = time_augment(data.paths);
    const Eigen::MatrixXd S = batch_signatures(data.paths, args.m);

    std::string out =
        signature_header(static_cast<int>(data.paths.front().d()), args.m);
    out += '\n';
    for (Eigen::Index i = 0; i < S.rows(); ++i) {
        out += data.ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < S.cols(); ++j) {
            out += ',';
            out += format_double(S(i, j));
        }
        out += '\n';
    }
    write_text_atomic(args.out_csv, out);
}

void cmd_fit(const FitArgs& args) {
    if (args.report_json.empty()) throw ConfigError("fit: --out is required");
    auto [data, y] = ingest_csv(args.paths_csv, args.targets_csv);
    PenaltyConfig penalty = args.penalty;
    if (args.kpen_auto)
        penalty.k_pen = 0.0;  // calibrate from the risk-versus-K_pen jump
    else if (penalty.k_pen <= 0.0)
        penalty.k_pen = 20.0;
    const SignatureFit fit =
        fit_signature_model(data.paths, y, penalty, args.fit);

    json report;
    report["version"] = kVersion;
    report["timestamp"] = utc_timestamp();
    report["n"] = data.paths.size();
    report["d"] = data.paths.front().d();
    report["m_hat"] = fit.selection.m_hat;
    report["lambda"] = fit.selection.lambda;
    report["k_pen_used"] = fit.selection.k_pen_used;
    report["risks"] = fit.selection.risks;
    report["penalties"] = fit.selection.penalties;
    report["train_risk"] = fit.selection.risks[fit.selection.m_hat];
    report["n_coefficients"] = fit.model.coeffs.size();
    report["coefficients"] =
        std::vector<double>(fit.model.coeffs.data(),
                            fit.model.coeffs.data() + fit.model.coeffs.size());
    write_json_atomic(args.report_json, report);
}

void cmd_ingest_check(const IngestCheckArgs& args) {
    auto [data, y] = ingest_csv(args.paths_csv, args.targets_csv);

    Eigen::Index p_min = data.paths.front().p(), p_max = p_min;
    bool shared_grid = true;
    const Eigen::VectorXd& t0 = data.paths.front().times;
    for (const auto& path : data.paths) {
        p_min = std::min(p_min, path.p());
        p_max = std::max(p_max, path.p());
        shared_grid = shared_grid && path.times.size() == t0.size() &&
                      (path.times - t0).lpNorm<Eigen::Infinity>() <= 1e-12;
    }
    const double mean = y.mean();
    const double sd = std::sqrt((y.array() - mean).square().sum() /
                                std::max<Eigen::Index>(1, y.size() - 1));
    if (!args.report_json.empty()) {
        json report;
        report["version"] = kVersion;
        report["n_samples"] = data.paths.size();
        report["d"] = data.paths.front().d();
        report["p_min"] = p_min;
        report["p_max"] = p_max;
        report["shared_time_grid"] = shared_grid;
        report["target_mean"] = mean;
        report["target_sd"] = sd;
        write_json_atomic(args.report_json, report);
    }
}

namespace {

struct Split {
    std::vector<SampledPath> train_paths, test_paths;
    Eigen::VectorXd train_y, test_y;
};

Split split_dataset(const std::vector<SampledPath>& paths,
                    const Eigen::VectorXd& y, double fraction,
                    std::uint64_t seed) {
    const int n = static_cast<int>(paths.size());
    if (n < 2) throw DataError("experiment: need at least 2 samples to split");
    int n_train = static_cast<int>(std::lround(fraction * n));
    n_train = std::clamp(n_train, 1, n - 1);

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() %
                                       static_cast<std::uint64_t>(i + 1));
        std::swap(idx[i], idx[j]);
    }

    Split s;
    s.train_y.resize(n_train);
    s.test_y.resize(n - n_train);
    for (int i = 0; i < n; ++i) {
        if (i < n_train) {
            s.train_paths.push_back(paths[idx[i]]);
            s.train_y[i] = y[idx[i]];
        } else {
            s.test_paths.push_back(paths[idx[i]]);
            s.test_y[i - n_train] = y[idx[i]];
        }
    }
    return s;
}

double mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
    return (pred - truth).squaredNorm() / truth.size();
}

// Kind-specific defaults, applied once up front so the report echoes the
// values actually used. The toy protocol keeps its fixed K_pen = 20; the
// dimension studies calibrate K_pen per repetition (k_pen == 0 means auto).
ExperimentConfig resolve_config(ExperimentConfig cfg) {
    if (cfg.repetitions < 1)
        throw ConfigError("experiment: repetitions must be >= 1");
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0))
        throw ConfigError("experiment: train fraction must lie in (0, 1)");
    switch (cfg.kind) {
        case ExperimentKind::toy_convergence:
            if (cfg.n <= 0) cfg.n = 500;
            if (cfg.penalty.k_pen <= 0.0) cfg.penalty.k_pen = 20.0;
            if (cfg.penalty.m_max <= 0) cfg.penalty.m_max = 7;
            cfg.d_grid = {2};
            break;
        case ExperimentKind::dimension_polysinus:
        case ExperimentKind::dimension_gp:
            if (cfg.n <= 0) cfg.n = 300;
            if (cfg.penalty.m_max <= 0) cfg.penalty.m_max = 3;
            if (cfg.d_grid.empty()) cfg.d_grid = {1, 2, 3, 5, 7, 9, 11};
            for (int d : cfg.d_grid)
                if (d < 1)
                    throw ConfigError("experiment: dimensions must be >= 1");
            break;
        case ExperimentKind::csv:
            if (cfg.paths_csv.empty() || cfg.targets_csv.empty())
                throw ConfigError(
                    "experiment: csv kind needs --paths and --targets");
            break;
    }
    return cfg;
}

// Deterministic per-cell seed: kind, dimension and repetition all feed in.
std::uint64_t cell_seed(const ExperimentConfig& cfg, int d, int rep) {
    const auto kind_tag = static_cast<std::uint64_t>(cfg.kind) + 0x10;
    return split_seed(split_seed(split_seed(cfg.seed, kind_tag),
                                 static_cast<std::uint64_t>(d)),
                      static_cast<std::uint64_t>(rep));
}

ExperimentCell run_toy_cell(const ExperimentConfig& cfg, int rep) {
    SimSpec spec;
    spec.n = static_cast<std::size_t>(cfg.n);
    spec.d = 2;
    spec.p = cfg.p;
    spec.m_star = cfg.m_star;
    spec.model = SimModel::polysinus;
    spec.response = SimResponse::signature;
    spec.seed = cell_seed(cfg, 2, rep);

    const Dataset data = generate(spec);
    FitOptions fit_opts = cfg.fit;
    fit_opts.seed = split_seed(spec.seed, 1);
    const auto t0 = std::chrono::steady_clock::now();
    const SignatureFit fit =
        fit_signature_model(data.paths, data.targets, cfg.penalty, fit_opts);
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - t0;

    ExperimentCell cell;
    cell.repetition = rep;
    cell.d = 2;
    cell.method = "signature";
    cell.m_hat = fit.selection.m_hat;
    cell.train_risk = fit.selection.risks[fit.selection.m_hat];
    cell.lambda = fit.selection.lambda;
    cell.k_pen_used = fit.selection.k_pen_used;
    cell.seconds = elapsed.count();
    return cell;
}

// Fits both methods on one train/test split; writes the two cells at
// cells[at] (signature) and cells[at + 1] (fourier).
void run_split_cells(const ExperimentConfig& cfg, int d, int rep,
                     const std::vector<SampledPath>& paths,
                     const Eigen::VectorXd& targets, std::uint64_t seed,
                     std::vector<ExperimentCell>& cells, std::size_t at) {
    const Split split =
        split_dataset(paths, targets, cfg.train_fraction, split_seed(seed, 2));

    FitOptions fit_opts = cfg.fit;
    fit_opts.seed = split_seed(seed, 3);
    const auto t0 = std::chrono::steady_clock::now();
    const SignatureFit fit = fit_signature_model(split.train_paths,
                                                 split.train_y, cfg.penalty,
                                                 fit_opts);
    const std::chrono::duration<double> sig_elapsed =
        std::chrono::steady_clock::now() - t0;
    ExperimentCell sig;
    sig.repetition = rep;
    sig.d = d;
    sig.method = "signature";
    sig.test_mse =
        mse(predict_signature(fit.model, split.test_paths), split.test_y);
    sig.train_risk = fit.selection.risks[fit.selection.m_hat];
    sig.m_hat = fit.selection.m_hat;
    sig.lambda = fit.selection.lambda;
    sig.k_pen_used = fit.selection.k_pen_used;
    sig.seconds = sig_elapsed.count();
    cells[at] = std::move(sig);

    FourierOptions four_opts;
    four_opts.seed = split_seed(seed, 4);
    const auto t1 = std::chrono::steady_clock::now();
    const FourierModel fourier =
        fit_fourier_model(split.train_paths, split.train_y, four_opts);
    const std::chrono::duration<double> four_elapsed =
        std::chrono::steady_clock::now() - t1;
    ExperimentCell four;
    four.repetition = rep;
    four.d = d;
    four.method = "fourier";
    four.test_mse =
        mse(predict_fourier(fourier, split.test_paths), split.test_y);
    four.train_risk =
        mse(predict_fourier(fourier, split.train_paths), split.train_y);
    four.lambda = fourier.ridge.lambda;
    four.seconds = four_elapsed.count();
    cells[at + 1] = std::move(four);
}

std::string tidy_csv(const std::vector<ExperimentCell>& cells) {
    std::string out = "repetition,method,d,metric,value\n";
    auto row = [&out](const ExperimentCell& c, const char* metric,
                      const std::string& value) {
        out += std::to_string(c.repetition);
        out += ',';
        out += c.method;
        out += ',';
        out += std::to_string(c.d);
        out += ',';
        out += metric;
        out += ',';
        out += value;
        out += '\n';
    };
    for (const auto& c : cells) {
        if (std::isfinite(c.test_mse)) row(c, "test_mse", format_double(c.test_mse));
        if (std::isfinite(c.train_risk))
            row(c, "train_risk", format_double(c.train_risk));
        if (c.m_hat >= 0) row(c, "m_hat", std::to_string(c.m_hat));
        if (std::isfinite(c.lambda)) row(c, "lambda", format_double(c.lambda));
        if (std::isfinite(c.k_pen_used))
            row(c, "k_pen_used", format_double(c.k_pen_used));
    }
    return out;
}

json report_json(const ExperimentReport& report) {
    const ExperimentConfig& cfg = report.config;
    json j;
    j["version"] = kVersion;
    j["timestamp"] = utc_timestamp();
    j["kind"] = kind_name(cfg.kind);
    json jc;
    jc["repetitions"] = cfg.repetitions;
    jc["seed"] = cfg.seed;
    jc["n"] = cfg.n;
    jc["p"] = cfg.p;
    if (cfg.kind == ExperimentKind::toy_convergence) jc["m_star"] = cfg.m_star;
    jc["d_grid"] = cfg.d_grid;
    jc["train_fraction"] = cfg.train_fraction;
    jc["k_pen"] = cfg.penalty.k_pen;  // 0 = calibrated per repetition
    jc["rho"] = cfg.penalty.rho;
    jc["m_max"] = cfg.penalty.m_max;
    jc["lambda"] = cfg.fit.lambda;  // -1 = cross-validated
    jc["k_folds"] = cfg.fit.k_folds;
    if (!cfg.paths_csv.empty()) jc["paths_csv"] = cfg.paths_csv.string();
    if (!cfg.targets_csv.empty()) jc["targets_csv"] = cfg.targets_csv.string();
    j["config"] = std::move(jc);

    // Per-repetition cells (timings live here, not in the tidy CSV, so the
    // CSV stays reproducible byte for byte).
    json cells = json::array();
    for (const auto& c : report.cells) {
        json jcell;
        jcell["repetition"] = c.repetition;
        jcell["method"] = c.method;
        jcell["d"] = c.d;
        if (std::isfinite(c.test_mse)) jcell["test_mse"] = c.test_mse;
        if (std::isfinite(c.train_risk)) jcell["train_risk"] = c.train_risk;
        if (c.m_hat >= 0) jcell["m_hat"] = c.m_hat;
        if (std::isfinite(c.lambda)) jcell["lambda"] = c.lambda;
        if (std::isfinite(c.k_pen_used)) jcell["k_pen_used"] = c.k_pen_used;
        jcell["seconds"] = c.seconds;
        cells.push_back(std::move(jcell));
    }
    j["cells"] = std::move(cells);

    // Aggregates per (method, dimension), in cell order.
    json aggregates = json::array();
    std::vector<std::pair<std::string, int>> keys;
    for (const auto& c : report.cells) {
        const std::pair<std::string, int> key{c.method, c.d};
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            keys.push_back(key);
    }
    for (const auto& [method, d] : keys) {
        std::vector<double> test, train;
        std::map<int, int> m_hats;
        for (const auto& c : report.cells) {
            if (c.method != method || c.d != d) continue;
            if (std::isfinite(c.test_mse)) test.push_back(c.test_mse);
            if (std::isfinite(c.train_risk)) train.push_back(c.train_risk);
            if (c.m_hat >= 0) ++m_hats[c.m_hat];
        }
        json a;
        a["method"] = method;
        a["d"] = d;
        if (!test.empty()) a["median_test_mse"] = median(test);
        if (!train.empty()) a["median_train_risk"] = median(train);
        if (!m_hats.empty()) {
            json hist;
            for (const auto& [m, count] : m_hats)
                hist[std::to_string(m)] = count;
            a["m_hat_histogram"] = std::move(hist);
        }
        aggregates.push_back(std::move(a));
    }
    j["aggregates"] = std::move(aggregates);
    return j;
}

}  // namespace

ExperimentReport cmd_experiment(const ExperimentConfig& raw_config) {
    const ExperimentConfig cfg = resolve_config(raw_config);
    const int reps = cfg.repetitions;

    ExperimentReport report;
    report.config = cfg;

    if (cfg.kind == ExperimentKind::toy_convergence) {
        report.cells.resize(reps);
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
        for (int rep = 0; rep < reps; ++rep) {
            try {
                report.cells[rep] = run_toy_cell(cfg, rep);
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else if (cfg.kind == ExperimentKind::csv) {
        const auto loaded = ingest_csv(cfg.paths_csv, cfg.targets_csv);
        const std::vector<SampledPath>& paths = loaded.first.paths;
        const Eigen::VectorXd& y = loaded.second;
        const int d = static_cast<int>(paths.front().d());
        report.cells.resize(2 * static_cast<std::size_t>(reps));
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
        for (int rep = 0; rep < reps; ++rep) {
            try {
                run_split_cells(cfg, d, rep, paths, y,
                                cell_seed(cfg, d, rep), report.cells,
                                2 * static_cast<std::size_t>(rep));
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        const auto n_dims = cfg.d_grid.size();
        const auto n_jobs = n_dims * static_cast<std::size_t>(reps);
        report.cells.resize(2 * n_jobs);
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
        for (std::size_t job = 0; job < n_jobs; ++job) {
            try {
                const int d = cfg.d_grid[job / reps];
                const int rep = static_cast<int>(job % reps);
                SimSpec spec;
                spec.n = static_cast<std::size_t>(cfg.n);
                spec.d = d;
                spec.p = cfg.p;
                spec.seed = cell_seed(cfg, d, rep);
                if (cfg.kind == ExperimentKind::dimension_polysinus) {
                    spec.model = SimModel::polysinus;
                    spec.response = SimResponse::mean_next_step;
                } else {
                    spec.model = SimModel::gaussian_process;
                    spec.response = SimResponse::trend_norm;
                }
                const Dataset data = generate(spec);
                run_split_cells(cfg, d, rep, data.paths, data.targets,
                                spec.seed, report.cells, 2 * job);
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    }

    if (!cfg.out_dir.empty()) {
        write_text_atomic(cfg.out_dir / "results.csv", tidy_csv(report.cells));
        write_json_atomic(cfg.out_dir / "report.json", report_json(report));
    }
    return report;
}

}  // namespace sigreg
