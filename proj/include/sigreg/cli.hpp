#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sigreg/csv_io.hpp"
#include "sigreg/datagen.hpp"
#include "sigreg/order_selection.hpp"

// Command implementations behind the `sigreg` executable. Each command is a
// plain function over a config struct so tests can run it in-process; the
// binary only parses arguments, applies globals, and maps exceptions to exit
// codes (ConfigError 2, DataError 3, CapacityError 4, anything else 1).
//
// Every run writes its outputs through temporary files, so an aborted run
// never leaves partial CSV/JSON behind. Reports carry a timestamp; CSVs do
// not, and rerunning a command with the same inputs and seed reproduces them
// byte for byte.

namespace sigreg {

// --threads, --budget, SIGREG_BUDGET.
struct GlobalOptions {
    int threads = 0;          // 0: leave OpenMP default
    std::size_t budget = 0;   // 0: leave current coefficient budget
};
void apply_global_options(const GlobalOptions& g);

// Loads and cross-validates a paths/targets CSV pair, aligned by sample id.
std::pair<PathsCsv, Eigen::VectorXd> ingest_csv(
    const std::filesystem::path& paths_csv,
    const std::filesystem::path& targets_csv);

struct SimulateArgs {
    SimSpec spec;
    std::filesystem::path out_dir;  // paths.csv, targets.csv, manifest.json
};
void cmd_simulate(const SimulateArgs& args);

struct SignatureArgs {
    std::filesystem::path paths_csv;
    int m = 0;
    bool augment = false;           // prepend time before taking signatures
    std::filesystem::path out_csv;  // sample_id, s, s1, ..., s1.1, ...
};
void cmd_signature(const SignatureArgs& args);

struct FitArgs {
    std::filesystem::path paths_csv;
    std::filesystem::path targets_csv;
    PenaltyConfig penalty;           // cmd default: k_pen 20; m_max <= 0: auto
    bool kpen_auto = false;          // calibrate K_pen by dimension jump
    FitOptions fit;                  // lambda < 0: CV
    std::filesystem::path report_json;
};
void cmd_fit(const FitArgs& args);

// Validates a CSV pair and writes a small summary report (sample count,
// dimension, grid size, target stats). Exit codes tell scripts whether the
// data would be accepted by `fit`.
struct IngestCheckArgs {
    std::filesystem::path paths_csv;
    std::filesystem::path targets_csv;
    std::filesystem::path report_json;  // empty: no report written
};
void cmd_ingest_check(const IngestCheckArgs& args);

enum class ExperimentKind {
    toy_convergence,      // order recovery on the smooth model, d = 2
    dimension_polysinus,  // test error vs dimension, next-step response
    dimension_gp,         // test error vs dimension, rough paths
    csv                   // repeated splits of an ingested CSV pair
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::toy_convergence;
    int repetitions = 20;
    std::uint64_t seed = 0;
    int n = 0;               // samples per repetition; 0: per-kind default
    int p = 100;             // sampling points per path
    int m_star = 5;          // toy: true order of the generated response
    std::vector<int> d_grid; // dimension studies; empty: {1,2,3,5,7,9,11}
    double train_fraction = 0.7;
    PenaltyConfig penalty;   // toy default: k_pen 20, m_max 7; studies: auto, 3
    FitOptions fit;
    std::filesystem::path paths_csv, targets_csv;  // kind == csv
    std::filesystem::path out_dir;  // results.csv + report.json
};

// One fitted (repetition, dimension) cell. NaN / -1 mark fields a kind does
// not produce.
struct ExperimentCell {
    int repetition = 0;
    int d = 0;
    std::string method;      // "signature" or "fourier"
    double test_mse = std::numeric_limits<double>::quiet_NaN();
    double train_risk = std::numeric_limits<double>::quiet_NaN();
    int m_hat = -1;          // signature cells only
    double lambda = std::numeric_limits<double>::quiet_NaN();
    double k_pen_used = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;    // wall-clock fit time (report.json only)
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ExperimentCell> cells;
};

// Runs the experiment and, when out_dir is nonempty, writes results.csv
// (tidy: repetition,method,d,metric,value) and report.json.
ExperimentReport cmd_experiment(const ExperimentConfig& config);

}  // namespace sigreg
