#include <doctest.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "sigreg/cli.hpp"
#include "sigreg/common.hpp"
#include "sigreg/csv_io.hpp"
#include "sigreg/datagen.hpp"
#include "sigreg/rng.hpp"
#include "sigreg/signature.hpp"

using namespace sigreg;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory, removed on scope exit.
struct TempDir {
    fs::path dir;
    explicit TempDir(const std::string& tag) {
        dir = fs::temp_directory_path() /
              ("sigreg_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    fs::path operator/(const std::string& name) const { return dir / name; }
};

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spit(const fs::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    out << content;
}

std::vector<SampledPath> random_paths(std::uint64_t seed, int n, int d, int p) {
    std::vector<SampledPath> paths;
    for (int i = 0; i < n; ++i) {
        Rng rng(split_seed(seed, static_cast<std::uint64_t>(i)));
        Eigen::MatrixXd v(p, d);
        for (int r = 0; r < p; ++r)
            for (int c = 0; c < d; ++c) v(r, c) = rng.uniform(-5.0, 5.0);
        paths.push_back(from_matrix(std::move(v)));
    }
    return paths;
}

}  // namespace

TEST_CASE("format_double emits shortest round-trip forms") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");

    Rng rng(1);
    for (int i = 0; i < 2000; ++i) {
        const double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-300.0, 300.0));
        const std::string s = format_double(x);
        CHECK(std::stod(s) == x);
    }
}

TEST_CASE("paths CSV round trip is exact") {
    TempDir tmp("paths_roundtrip");
    const std::vector<SampledPath> paths = random_paths(3, 7, 3, 11);
    const std::vector<std::string> ids = default_sample_ids(7);
    CHECK(ids.front() == "s0001");
    CHECK(ids.back() == "s0007");

    const fs::path file = tmp / "paths.csv";
    write_paths_csv(file, paths, ids);
    const PathsCsv back = read_paths_csv(file);

    REQUIRE(back.paths.size() == 7);
    CHECK(back.ids == ids);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK((back.paths[i].values.array() == paths[i].values.array()).all());
        CHECK((back.paths[i].times.array() == paths[i].times.array()).all());
    }

    // No temporary file is left behind.
    CHECK_FALSE(fs::exists(file.string() + ".tmp"));
}

TEST_CASE("targets CSV aligns to the paths file order") {
    TempDir tmp("targets");
    Eigen::VectorXd y(3);
    y << 0.25, -17.0, 3.5;
    const std::vector<std::string> ids{"b", "a", "c"};
    const fs::path file = tmp / "targets.csv";
    write_targets_csv(file, y, ids);

    // Reading with the same ids returns the same order...
    const Eigen::VectorXd same = read_targets_csv(file, ids);
    CHECK((same.array() == y.array()).all());

    // ...and a permuted id list realigns the values.
    const Eigen::VectorXd realigned =
        read_targets_csv(file, {"a", "b", "c"});
    CHECK(realigned[0] == -17.0);
    CHECK(realigned[1] == 0.25);
    CHECK(realigned[2] == 3.5);
}

TEST_CASE("paths CSV reader reports malformed input with line numbers") {
    TempDir tmp("paths_errors");
    const fs::path file = tmp / "bad.csv";

    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_paths_csv(tmp / "nope.csv"), DataError);
    }

    SUBCASE("bad header") {
        spit(file, "id,time,c1\ns1,0,1\n");
        CHECK_THROWS_AS(read_paths_csv(file), DataError);
    }

    SUBCASE("wrong field count names the line") {
        spit(file, "sample_id,time,c1\ns1,0,1\ns1,0.5\n");
        CHECK_THROWS_WITH_AS(read_paths_csv(file),
                             doctest::Contains(":3:"), DataError);
    }

    SUBCASE("unparseable number names the line") {
        spit(file, "sample_id,time,c1\ns1,0,1\ns1,0.5,oops\n");
        CHECK_THROWS_WITH_AS(read_paths_csv(file),
                             doctest::Contains(":3:"), DataError);
    }

    SUBCASE("regrouped sample id is rejected") {
        spit(file,
             "sample_id,time,c1\ns1,0,1\ns1,1,2\ns2,0,1\ns2,1,2\ns1,2,3\n");
        CHECK_THROWS_WITH_AS(read_paths_csv(file),
                             doctest::Contains("grouped"), DataError);
    }

    SUBCASE("unsorted times name the line and the sample") {
        spit(file, "sample_id,time,c1\ns1,0,1\ns1,0.7,2\ns1,0.3,3\n");
        CHECK_THROWS_WITH_AS(read_paths_csv(file),
                             doctest::Contains("not sorted"), DataError);
        CHECK_THROWS_WITH_AS(read_paths_csv(file),
                             doctest::Contains(":4:"), DataError);
    }

    SUBCASE("single-point samples are rejected") {
        spit(file, "sample_id,time,c1\ns1,0,1\n");
        CHECK_THROWS_AS(read_paths_csv(file), DataError);
    }

    SUBCASE("empty files and empty bodies are rejected") {
        spit(file, "");
        CHECK_THROWS_AS(read_paths_csv(file), DataError);
        spit(file, "sample_id,time,c1\n");
        CHECK_THROWS_AS(read_paths_csv(file), DataError);
    }

    SUBCASE("windows line endings are tolerated") {
        spit(file, "sample_id,time,c1\r\ns1,0,1\r\ns1,1,2\r\n");
        const PathsCsv back = read_paths_csv(file);
        REQUIRE(back.paths.size() == 1);
        CHECK(back.paths[0].values(1, 0) == 2.0);
    }
}

TEST_CASE("targets CSV reader enforces the sample set") {
    TempDir tmp("targets_errors");
    const fs::path file = tmp / "targets.csv";

    SUBCASE("bad header") {
        spit(file, "id,y\na,1\n");
        CHECK_THROWS_AS(read_targets_csv(file, {"a"}), DataError);
    }

    SUBCASE("duplicate ids") {
        spit(file, "sample_id,y\na,1\na,2\n");
        CHECK_THROWS_AS(read_targets_csv(file, {"a"}), DataError);
    }

    SUBCASE("unknown id") {
        spit(file, "sample_id,y\na,1\nzz,2\n");
        CHECK_THROWS_AS(read_targets_csv(file, {"a", "b"}), DataError);
    }

    SUBCASE("missing id") {
        spit(file, "sample_id,y\na,1\n");
        CHECK_THROWS_AS(read_targets_csv(file, {"a", "b"}), DataError);
    }
}

TEST_CASE("cmd_simulate writes a reproducible dataset bundle") {
    TempDir out1("sim1"), out2("sim2");
    SimulateArgs args;
    args.spec.n = 3;
    args.spec.d = 2;
    args.spec.p = 4;
    args.spec.seed = 77;
    args.spec.model = SimModel::polysinus;
    args.spec.response = SimResponse::signature;
    args.spec.m_star = 2;
    args.out_dir = out1.dir;
    cmd_simulate(args);

    SUBCASE("bundle contents") {
        const PathsCsv paths = read_paths_csv(out1 / "paths.csv");
        REQUIRE(paths.paths.size() == 3);
        CHECK(paths.paths[0].p() == 4);
        CHECK(paths.paths[0].d() == 2);

        // One header line plus n*p data rows.
        const std::string text = slurp(out1 / "paths.csv");
        const auto lines = std::count(text.begin(), text.end(), '\n');
        CHECK(lines == 1 + 3 * 4);

        const Eigen::VectorXd y =
            read_targets_csv(out1 / "targets.csv", paths.ids);
        CHECK(y.size() == 3);

        // Round trip matches the in-process generator exactly.
        const Dataset data = generate(args.spec);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK((paths.paths[i].values.array() ==
                   data.paths[i].values.array())
                      .all());
        CHECK((y.array() == data.targets.array()).all());

        const nlohmann::json manifest =
            nlohmann::json::parse(slurp(out1 / "manifest.json"));
        CHECK(manifest["version"] == kVersion);
        CHECK(manifest["model"] == "polysinus");
        CHECK(manifest["response"] == "signature");
        CHECK(manifest["n"] == 3);
        CHECK(manifest["d"] == 2);
        CHECK(manifest["p"] == 4);
        CHECK(manifest["seed"] == 77);
        CHECK(manifest["m_star"] == 2);
    }

    SUBCASE("rerun is byte-identical") {
        args.out_dir = out2.dir;
        cmd_simulate(args);
        CHECK(slurp(out1 / "paths.csv") == slurp(out2 / "paths.csv"));
        CHECK(slurp(out1 / "targets.csv") == slurp(out2 / "targets.csv"));
        CHECK(slurp(out1 / "manifest.json") == slurp(out2 / "manifest.json"));
    }
}

TEST_CASE("cmd_signature writes one row per sample") {
    TempDir tmp("sigcsv");
    const std::vector<SampledPath> paths = random_paths(9, 4, 2, 6);
    write_paths_csv(tmp / "paths.csv", paths, default_sample_ids(4));

    SignatureArgs args;
    args.paths_csv = tmp / "paths.csv";
    args.m = 2;
    args.out_csv = tmp / "sigs.csv";
    cmd_signature(args);

    const std::string text = slurp(tmp / "sigs.csv");
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    CHECK(header == "sample_id,s,s1,s2,s1.1,s1.2,s2.1,s2.2");

    const Eigen::MatrixXd S = batch_signatures(paths, 2);
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        std::istringstream fields(line);
        std::string cell;
        std::getline(fields, cell, ',');
        CHECK(cell == default_sample_ids(4)[static_cast<std::size_t>(row)]);
        for (Eigen::Index j = 0; j < S.cols(); ++j) {
            std::getline(fields, cell, ',');
            CHECK(std::stod(cell) == S(row, j));
        }
        ++row;
    }
    CHECK(row == 4);

    SUBCASE("order 0 yields the constant column") {
        args.m = 0;
        args.out_csv = tmp / "sigs0.csv";
        cmd_signature(args);
        const std::string zero = slurp(tmp / "sigs0.csv");
        CHECK(zero.rfind("sample_id,s\n", 0) == 0);
        CHECK(std::count(zero.begin(), zero.end(), '\n') == 5);
    }

    SUBCASE("augmentation prepends the time coordinate") {
        args.m = 1;
        args.augment = true;
        args.out_csv = tmp / "sigs_aug.csv";
        cmd_signature(args);
        std::istringstream aug(slurp(tmp / "sigs_aug.csv"));
        std::string aug_header;
        std::getline(aug, aug_header);
        CHECK(aug_header == "sample_id,s,s1,s2,s3");

        const Eigen::MatrixXd A = batch_signatures(time_augment(paths), 1);
        std::string aug_line;
        std::getline(aug, aug_line);
        std::istringstream fields(aug_line);
        std::string cell;
        std::getline(fields, cell, ',');
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            std::getline(fields, cell, ',');
            CHECK(std::stod(cell) == A(0, j));
        }
    }
}

TEST_CASE("cmd_fit writes a full report") {
    TempDir tmp("fit");
    SimulateArgs sim;
    sim.spec.n = 40;
    sim.spec.d = 1;
    sim.spec.p = 10;
    sim.spec.seed = 5;
    sim.spec.m_star = 2;
    sim.out_dir = tmp.dir;
    cmd_simulate(sim);

    FitArgs args;
    args.paths_csv = tmp / "paths.csv";
    args.targets_csv = tmp / "targets.csv";
    args.penalty.k_pen = 1.0;
    args.penalty.m_max = 3;
    args.report_json = tmp / "report.json";
    cmd_fit(args);

    const nlohmann::json report = nlohmann::json::parse(slurp(tmp / "report.json"));
    CHECK(report["version"] == kVersion);
    CHECK(report["n"] == 40);
    CHECK(report["d"] == 1);
    CHECK(report["k_pen_used"] == 1.0);
    CHECK(report.contains("timestamp"));
    CHECK(report["risks"].size() == 4);
    CHECK(report["penalties"].size() == 4);
    const int m_hat = report["m_hat"];
    CHECK(m_hat >= 0);
    CHECK(m_hat <= 3);
    CHECK(report["train_risk"] == report["risks"][m_hat]);
    const std::size_t expect_len = SigShape(2, m_hat).len;
    CHECK(report["n_coefficients"] == expect_len);
    CHECK(report["coefficients"].size() == expect_len);

    SUBCASE("constant targets select the constant model") {
        std::string constant = "sample_id,y\n";
        for (const std::string& id : read_paths_csv(tmp / "paths.csv").ids)
            constant += id + ",4.5\n";
        spit(tmp / "const.csv", constant);
        FitArgs flat = args;
        flat.targets_csv = tmp / "const.csv";
        flat.penalty.k_pen = 0.0;  // command default (20) applies
        flat.report_json = tmp / "flat.json";
        cmd_fit(flat);
        const nlohmann::json rep = nlohmann::json::parse(slurp(tmp / "flat.json"));
        CHECK(rep["m_hat"] == 0);
        CHECK(rep["k_pen_used"] == 20.0);
        CHECK(rep["coefficients"].size() == 1);
        CHECK(std::abs(rep["coefficients"][0].get<double>() - 4.5) <= 1e-12);
    }
}

TEST_CASE("cmd_ingest_check summarizes a CSV pair") {
    TempDir tmp("ingest");
    SimulateArgs sim;
    sim.spec.n = 6;
    sim.spec.d = 2;
    sim.spec.p = 7;
    sim.spec.seed = 3;
    sim.spec.m_star = 1;
    sim.out_dir = tmp.dir;
    cmd_simulate(sim);

    IngestCheckArgs args;
    args.paths_csv = tmp / "paths.csv";
    args.targets_csv = tmp / "targets.csv";
    args.report_json = tmp / "check.json";
    cmd_ingest_check(args);

    const nlohmann::json report = nlohmann::json::parse(slurp(tmp / "check.json"));
    CHECK(report["n_samples"] == 6);
    CHECK(report["d"] == 2);
    CHECK(report["p_min"] == 7);
    CHECK(report["p_max"] == 7);
    CHECK(report["shared_time_grid"] == true);
    CHECK(report.contains("target_mean"));
    CHECK(report.contains("target_sd"));
}

TEST_CASE("cmd_experiment produces deterministic tidy results") {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::toy_convergence;
    cfg.repetitions = 2;
    cfg.seed = 11;
    cfg.n = 25;
    cfg.p = 12;
    cfg.m_star = 2;
    cfg.penalty.k_pen = 20.0;
    cfg.penalty.m_max = 2;

    TempDir out1("exp1"), out2("exp2");
    cfg.out_dir = out1.dir;
    const ExperimentReport report = cmd_experiment(cfg);

    SUBCASE("cells and csv schema") {
        REQUIRE(report.cells.size() == 2);
        CHECK(report.cells[0].method == "signature");
        CHECK(report.cells[0].m_hat >= 0);
        CHECK(report.cells[1].repetition == 1);

        const std::string csv = slurp(out1 / "results.csv");
        CHECK(csv.rfind("repetition,method,d,metric,value\n", 0) == 0);
        CHECK(csv.find("m_hat") != std::string::npos);
        CHECK(csv.find("train_risk") != std::string::npos);
        CHECK(csv.find("k_pen_used") != std::string::npos);
        CHECK(csv.find("test_mse") == std::string::npos);  // toy has no split

        const nlohmann::json rep = nlohmann::json::parse(slurp(out1 / "report.json"));
        CHECK(rep["kind"] == "toy-convergence");
        CHECK(rep["config"]["repetitions"] == 2);
        CHECK(rep["cells"].size() == 2);
        CHECK(rep["cells"][0].contains("seconds"));
        REQUIRE(rep["aggregates"].size() == 1);
        CHECK(rep["aggregates"][0]["method"] == "signature");
        CHECK(rep["aggregates"][0].contains("m_hat_histogram"));
    }

    SUBCASE("rerun is byte-identical on the csv") {
        cfg.out_dir = out2.dir;
        cmd_experiment(cfg);
        CHECK(slurp(out1 / "results.csv") == slurp(out2 / "results.csv"));
    }

    SUBCASE("argument validation") {
        ExperimentConfig bad = cfg;
        bad.repetitions = 0;
        CHECK_THROWS_AS(cmd_experiment(bad), ConfigError);
        bad = cfg;
        bad.train_fraction = 1.5;
        CHECK_THROWS_AS(cmd_experiment(bad), ConfigError);
        bad = cfg;
        bad.kind = ExperimentKind::csv;
        CHECK_THROWS_AS(cmd_experiment(bad), ConfigError);
    }
}

TEST_CASE("cmd_experiment runs dataset splits from csv input") {
    TempDir tmp("expcsv");
    SimulateArgs sim;
    sim.spec.n = 30;
    sim.spec.d = 1;
    sim.spec.p = 12;
    sim.spec.seed = 13;
    sim.spec.m_star = 1;
    sim.out_dir = tmp.dir;
    cmd_simulate(sim);

    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::csv;
    cfg.repetitions = 2;
    cfg.seed = 7;
    cfg.penalty.k_pen = 5.0;
    cfg.penalty.m_max = 2;
    cfg.paths_csv = tmp / "paths.csv";
    cfg.targets_csv = tmp / "targets.csv";
    cfg.out_dir = tmp.dir / "out";

    const ExperimentReport report = cmd_experiment(cfg);
    REQUIRE(report.cells.size() == 4);  // 2 reps x 2 methods
    for (const auto& cell : report.cells) {
        CHECK(std::isfinite(cell.test_mse));
        CHECK(std::isfinite(cell.train_risk));
        CHECK((cell.method == "signature" || cell.method == "fourier"));
    }
    const std::string csv = slurp(tmp.dir / "out" / "results.csv");
    CHECK(csv.find("fourier") != std::string::npos);
    CHECK(csv.find("test_mse") != std::string::npos);
}

TEST_CASE("csv experiments without an explicit horizon stay within memory") {
    // d = 3 paths augment to dimension 4, where the budget alone would allow
    // order 10 (1.4M coefficients, a Gram matrix in the terabytes). With no
    // --m-max the horizon must come from the sample count instead: 21 training
    // samples keep orders through 2 determined (21 coefficients), horizon 3.
    TempDir tmp("expauto");
    SimulateArgs sim;
    sim.spec.n = 30;
    sim.spec.d = 3;
    sim.spec.p = 12;
    sim.spec.seed = 13;
    sim.spec.m_star = 1;
    sim.out_dir = tmp.dir;
    cmd_simulate(sim);

    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::csv;
    cfg.repetitions = 2;
    cfg.seed = 7;
    cfg.penalty.k_pen = 5.0;  // m_max stays 0: automatic horizon
    cfg.paths_csv = tmp / "paths.csv";
    cfg.targets_csv = tmp / "targets.csv";

    const ExperimentReport report = cmd_experiment(cfg);
    REQUIRE(report.cells.size() == 4);
    for (const auto& cell : report.cells) {
        CHECK(std::isfinite(cell.test_mse));
        if (cell.method == "signature") {
            CHECK(cell.m_hat >= 0);
            CHECK(cell.m_hat <= 3);
        }
    }
}
