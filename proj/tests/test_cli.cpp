#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string command = std::string(PSYMORT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

nlohmann::json read_json(const fs::path& path) {
    return nlohmann::json::parse(fixtures::slurp(path));
}

/// Small bundle shared by the CLI cases.
fs::path make_bundle(const std::string& name, int n_patients, unsigned seed) {
    const fs::path dir = fixtures::scratch_dir(name);
    const fs::path cfg = dir / "synth.cfg";
    fixtures::write_file(cfg, "n_patients = " + std::to_string(n_patients) +
                                  "\nmortality_rate = 0.3\nn_drug_codes = 40\n"
                                  "n_procedure_codes = 20\nseed = " +
                                  std::to_string(seed) + "\n");
    REQUIRE(run_cli("synth --config " + cfg.string() + " --out-dir " + (dir / "data").string()) ==
            0);
    return dir / "data";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and version exit cleanly, missing subcommand is a usage error") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("--version") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
}

TEST_CASE("synth writes the five tables and a manifest") {
    const fs::path data = make_bundle("cli_synth", 60, 5);
    for (const char* name : {"PATIENTS.csv", "ADMISSIONS.csv", "DIAGNOSES_ICD.csv",
                             "PRESCRIPTIONS.csv", "PROCEDURES_ICD.csv", "manifest.json"}) {
        CHECK(fs::exists(data / name));
    }
    const auto manifest = read_json(data / "manifest.json");
    CHECK(manifest["command"] == "synth");
    CHECK(manifest["seed"] == 5);
    CHECK(manifest["inputs"].size() >= 5);
}

TEST_CASE("synth rejects bad configs with exit 2 naming the key") {
    const fs::path dir = fixtures::scratch_dir("cli_synth_bad");
    fixtures::write_file(dir / "bad.cfg", "mortality_rate = 1.5\n");
    CHECK(run_cli("synth --config " + (dir / "bad.cfg").string() + " --out-dir " +
                  (dir / "out").string()) == 2);
}

TEST_CASE("synth reruns with the same seed produce identical digests") {
    const fs::path a = make_bundle("cli_synth_rerun_a", 40, 9);
    const fs::path b = make_bundle("cli_synth_rerun_b", 40, 9);
    const auto digests_a = read_json(a / "manifest.json")["inputs"];
    const auto digests_b = read_json(b / "manifest.json")["inputs"];
    for (const char* name : {"PATIENTS.csv", "ADMISSIONS.csv", "DIAGNOSES_ICD.csv",
                             "PRESCRIPTIONS.csv", "PROCEDURES_ICD.csv"}) {
        CHECK(digests_a[name] == digests_b[name]);
    }
}

TEST_CASE("cohort emits summary, cohort csv and the seven breakdowns") {
    const fs::path data = make_bundle("cli_cohort", 80, 3);
    const fs::path out = data.parent_path() / "cohort_out";
    REQUIRE(run_cli("cohort --data-dir " + data.string() + " --out-dir " + out.string()) == 0);
    CHECK(fs::exists(out / "cohort.csv"));
    CHECK(fs::exists(out / "manifest.json"));
    for (const char* feature : {"gender", "marital_status", "insurance", "admission_type",
                                "religion", "ethnicity", "language"}) {
        CHECK(fs::exists(out / (std::string("eda_") + feature + ".csv")));
    }
    const auto summary = read_json(out / "summary.json");
    CHECK(summary["n_patients"] == 80);
    CHECK(summary["n_died"].get<int>() + summary["n_survived"].get<int>() == 80);
}

TEST_CASE("cohort of a bundle without qualifying patients is empty but ok") {
    const fs::path dir = fixtures::scratch_dir("cli_cohort_empty");
    fixtures::write_file(dir / "PATIENTS.csv",
                         "SUBJECT_ID,GENDER,DOB,DOD\n1,M,2050-01-01 00:00:00,\n");
    fixtures::write_file(dir / "ADMISSIONS.csv",
                         "SUBJECT_ID,HADM_ID,ADMITTIME,DISCHTIME,ADMISSION_TYPE,INSURANCE,"
                         "LANGUAGE,RELIGION,MARITAL_STATUS,ETHNICITY\n"
                         "1,11,2101-01-01 00:00:00,2101-01-02 00:00:00,,,,,,\n");
    fixtures::write_file(dir / "DIAGNOSES_ICD.csv",
                         "SUBJECT_ID,HADM_ID,SEQ_NUM,ICD9_CODE\n1,11,1,4019\n");
    fixtures::write_file(dir / "PRESCRIPTIONS.csv", "SUBJECT_ID,HADM_ID,DRUG,GSN\n");
    fixtures::write_file(dir / "PROCEDURES_ICD.csv", "SUBJECT_ID,HADM_ID,SEQ_NUM,ICD9_CODE\n");
    const fs::path out = dir / "out";
    CHECK(run_cli("cohort --data-dir " + dir.string() + " --out-dir " + out.string()) == 0);
    CHECK(read_json(out / "summary.json")["n_patients"] == 0);
}

TEST_CASE("missing input table exits 2") {
    const fs::path data = make_bundle("cli_missing_table", 30, 2);
    fs::remove(data / "PRESCRIPTIONS.csv");
    CHECK(run_cli("cohort --data-dir " + data.string() + " --out-dir " +
                  (data.parent_path() / "out").string()) == 2);
}

TEST_CASE("strict mode exits 4 on dangling references") {
    const fs::path data = make_bundle("cli_dangling", 30, 7);
    // append a diagnosis row to an unknown admission
    fixtures::write_file(data / "DIAGNOSES_ICD.csv",
                         fixtures::slurp(data / "DIAGNOSES_ICD.csv") + "1,999999,1,29620\n");
    const fs::path out = data.parent_path() / "out";
    CHECK(run_cli("cohort --data-dir " + data.string() + " --out-dir " + out.string() +
                  " --strict") == 4);
    CHECK(run_cli("cohort --data-dir " + data.string() + " --out-dir " + out.string()) == 0);
}

TEST_CASE("eval writes reports and is seed-reproducible") {
    const fs::path data = make_bundle("cli_eval", 120, 11);
    const fs::path out_a = data.parent_path() / "eval_a";
    const fs::path out_b = data.parent_path() / "eval_b";
    REQUIRE(run_cli("eval --data-dir " + data.string() + " --out-dir " + out_a.string() +
                    " --algorithms lr --seed 7") == 0);
    REQUIRE(run_cli("eval --data-dir " + data.string() + " --out-dir " + out_b.string() +
                    " --algorithms lr --seed 7") == 0);
    CHECK(fixtures::slurp(out_a / "eval_report.json") ==
          fixtures::slurp(out_b / "eval_report.json"));
    CHECK(fixtures::slurp(out_a / "roc_points.csv") == fixtures::slurp(out_b / "roc_points.csv"));
    const auto report = read_json(out_a / "eval_report.json");
    CHECK(report["algorithms"].contains("lr"));
    CHECK(report["algorithms"]["lr"]["fold_auc"].size() == 5);
}

TEST_CASE("unknown algorithm exits 2") {
    const fs::path data = make_bundle("cli_eval_bad", 40, 13);
    CHECK(run_cli("eval --data-dir " + data.string() + " --out-dir " +
                  (data.parent_path() / "out").string() + " --algorithms xgb") == 2);
}

TEST_CASE("degenerate folds exit 5") {
    // 10 patients, highly imbalanced: with 5 folds some training split is
    // single-class.
    const fs::path dir = fixtures::scratch_dir("cli_eval_degenerate");
    const fs::path cfg = dir / "synth.cfg";
    fixtures::write_file(cfg,
                         "n_patients = 10\nmortality_rate = 0.1\nn_drug_codes = 10\n"
                         "n_procedure_codes = 5\nseed = 3\n");
    REQUIRE(run_cli("synth --config " + cfg.string() + " --out-dir " + (dir / "data").string()) ==
            0);
    CHECK(run_cli("eval --data-dir " + (dir / "data").string() + " --out-dir " +
                  (dir / "out").string() + " --algorithms lr --seed 1") == 5);
}

TEST_CASE("importance emits a truncated report honoring --top") {
    const fs::path data = make_bundle("cli_importance", 150, 17);
    const fs::path out = data.parent_path() / "imp_out";
    REQUIRE(run_cli("importance --data-dir " + data.string() + " --out-dir " + out.string() +
                    " --model rf --n-repeats 2 --top 10 --seed 4") == 0);
    const auto report = read_json(out / "importance.json");
    CHECK(report["features"].size() == 10);
    CHECK(report["metric"] == "roc_auc");
    // raw feature names without a lookup file
    const std::string first = report["features"][0]["feature"].get<std::string>();
    const bool raw = first.find("drug:") == 0 || first.find("proc:") == 0 ||
                     first.find('=') != std::string::npos;
    CHECK(raw);
}

TEST_CASE("importance applies a code-name lookup when given") {
    const fs::path data = make_bundle("cli_importance_names", 120, 19);
    const fs::path names = data.parent_path() / "names.csv";
    std::string lookup = "CODE,NAME\n";
    for (int i = 0; i < 40; ++i) {
        lookup += "1000" + std::string(i < 10 ? "0" : "") + std::to_string(i) + ",Drug name " +
                  std::to_string(i) + "\n";
    }
    fixtures::write_file(names, lookup);
    const fs::path out = data.parent_path() / "imp_out";
    REQUIRE(run_cli("importance --data-dir " + data.string() + " --out-dir " + out.string() +
                    " --model rf --n-repeats 1 --top 0 --seed 4 --code-names " + names.string()) ==
            0);
    const std::string csv = fixtures::slurp(out / "importance.csv");
    CHECK(csv.find("Drug name") != std::string::npos);
}

}  // TEST_SUITE
