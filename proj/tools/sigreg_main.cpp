#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include "sigreg/cli.hpp"
#include "sigreg/common.hpp"

// Thin argument layer over the command functions in sigreg/cli.hpp.
// Exit codes: 0 ok, 2 bad configuration, 3 bad data, 4 over the coefficient
// budget, 1 anything else.

namespace {

int dispatch(int argc, char** argv) {
    CLI::App app{"Functional regression on truncated path signatures"};
    app.require_subcommand(1);

    sigreg::GlobalOptions globals;
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "Master seed for anything random");
    app.add_option("--threads", globals.threads,
                   "OpenMP thread count (0 = library default)");
    app.add_option("--budget", globals.budget,
                   "Coefficient budget per signature vector (0 = keep default)")
        ->envname("SIGREG_BUDGET");

    const std::map<std::string, sigreg::SimModel> models{
        {"polysinus", sigreg::SimModel::polysinus},
        {"gaussian-process", sigreg::SimModel::gaussian_process}};
    const std::map<std::string, sigreg::SimResponse> responses{
        {"signature", sigreg::SimResponse::signature},
        {"mean-next-step", sigreg::SimResponse::mean_next_step},
        {"trend-norm", sigreg::SimResponse::trend_norm}};
    const std::map<std::string, sigreg::ExperimentKind> kinds{
        {"toy-convergence", sigreg::ExperimentKind::toy_convergence},
        {"dimension-polysinus", sigreg::ExperimentKind::dimension_polysinus},
        {"dimension-gp", sigreg::ExperimentKind::dimension_gp},
        {"csv", sigreg::ExperimentKind::csv}};

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
    sim->fallthrough();
    sigreg::SimulateArgs sim_args;
    sim->add_option("--model", sim_args.spec.model, "Path model")
        ->transform(CLI::CheckedTransformer(models))
        ->default_str("polysinus");
    sim->add_option("--response", sim_args.spec.response, "Target definition")
        ->transform(CLI::CheckedTransformer(responses))
        ->default_str("signature");
    sim->add_option("--n", sim_args.spec.n, "Number of sample paths")
        ->required();
    sim->add_option("--d", sim_args.spec.d, "Path dimension")->required();
    sim->add_option("--p", sim_args.spec.p, "Sampling points per path")
        ->default_val(100);
    sim->add_option("--m-star", sim_args.spec.m_star,
                    "True order for the signature response")
        ->default_val(5);
    sim->add_option("--out", sim_args.out_dir, "Output directory")->required();

    // signature
    auto* sig = app.add_subcommand("signature",
                                   "Signature features of a paths CSV");
    sig->fallthrough();
    sigreg::SignatureArgs sig_args;
    sig->add_option("--paths", sig_args.paths_csv, "Paths CSV")->required();
    sig->add_option("--m", sig_args.m, "Truncation order")->required();
    sig->add_flag("--augment", sig_args.augment,
                  "Prepend time as coordinate 0 first");
    sig->add_option("--out", sig_args.out_csv, "Output CSV")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "Fit the signature model to a CSV pair");
    fit->fallthrough();
    sigreg::FitArgs fit_args;
    fit->add_option("--paths", fit_args.paths_csv, "Paths CSV")->required();
    fit->add_option("--targets", fit_args.targets_csv, "Targets CSV")->required();
    fit->add_option("--k-pen", fit_args.penalty.k_pen,
                    "Penalty constant (default 20)");
    fit->add_flag("--kpen-auto", fit_args.kpen_auto,
                  "Calibrate the penalty constant by dimension jump");
    fit->add_option("--rho", fit_args.penalty.rho, "Penalty exponent")
        ->default_val(0.4);
    fit->add_option("--m-max", fit_args.penalty.m_max,
                    "Largest candidate order (<= 0: sample-count default)");
    fit->add_option("--lambda", fit_args.fit.lambda,
                    "Ridge parameter (< 0: cross-validate)")
        ->default_val(-1.0);
    fit->add_option("--k-folds", fit_args.fit.k_folds, "CV folds")
        ->default_val(5);
    fit->add_option("--out", fit_args.report_json, "Report JSON")->required();

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run a packaged study");
    exp->fallthrough();
    sigreg::ExperimentConfig exp_cfg;
    exp->add_option("--kind", exp_cfg.kind, "Which study")
        ->transform(CLI::CheckedTransformer(kinds))
        ->required();
    exp->add_option("--reps", exp_cfg.repetitions, "Repetitions")
        ->default_val(20);
    exp->add_option("--n", exp_cfg.n, "Samples per repetition (0: kind default)");
    exp->add_option("--p", exp_cfg.p, "Sampling points per path")
        ->default_val(100);
    exp->add_option("--m-star", exp_cfg.m_star,
                    "True order of the generated response (toy kind)")
        ->default_val(5);
    exp->add_option("--d-grid", exp_cfg.d_grid,
                    "Dimensions to sweep (dimension kinds)")
        ->delimiter(',');
    exp->add_option("--train-fraction", exp_cfg.train_fraction,
                    "Train share of each split")
        ->default_val(0.7);
    exp->add_option("--k-pen", exp_cfg.penalty.k_pen,
                    "Penalty constant (<= 0: kind default / auto)");
    exp->add_option("--rho", exp_cfg.penalty.rho, "Penalty exponent")
        ->default_val(0.4);
    exp->add_option("--m-max", exp_cfg.penalty.m_max,
                    "Largest candidate order (<= 0: kind default)");
    exp->add_option("--lambda", exp_cfg.fit.lambda,
                    "Ridge parameter (< 0: cross-validate)")
        ->default_val(-1.0);
    exp->add_option("--k-folds", exp_cfg.fit.k_folds, "CV folds")
        ->default_val(5);
    exp->add_option("--paths", exp_cfg.paths_csv, "Paths CSV (csv kind)");
    exp->add_option("--targets", exp_cfg.targets_csv, "Targets CSV (csv kind)");
    exp->add_option("--out", exp_cfg.out_dir, "Output directory")->required();

    // ingest-check
    auto* ing = app.add_subcommand("ingest-check",
                                   "Validate a CSV pair without fitting");
    ing->fallthrough();
    sigreg::IngestCheckArgs ing_args;
    ing->add_option("--paths", ing_args.paths_csv, "Paths CSV")->required();
    ing->add_option("--targets", ing_args.targets_csv, "Targets CSV")->required();
    ing->add_option("--out", ing_args.report_json, "Summary JSON (optional)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    sigreg::apply_global_options(globals);
    if (sim->parsed()) {
        sim_args.spec.seed = seed;
        sigreg::cmd_simulate(sim_args);
    } else if (sig->parsed()) {
        sigreg::cmd_signature(sig_args);
    } else if (fit->parsed()) {
        fit_args.fit.seed = seed;
        sigreg::cmd_fit(fit_args);
    } else if (exp->parsed()) {
        exp_cfg.seed = seed;
        sigreg::cmd_experiment(exp_cfg);
    } else if (ing->parsed()) {
        sigreg::cmd_ingest_check(ing_args);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const sigreg::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const sigreg::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const sigreg::CapacityError& e) {
        std::fprintf(stderr, "capacity error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
