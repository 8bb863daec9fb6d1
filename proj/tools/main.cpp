// psymort CLI: synthetic EHR generation, cohort extraction, cross-validated
// mortality models and permutation importance, driven from seeded batch
// commands that emit plain CSV/JSON artifacts.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "psymort/cohort.hpp"
#include "psymort/errors.hpp"
#include "psymort/eval.hpp"
#include "psymort/features.hpp"
#include "psymort/importance.hpp"
#include "psymort/manifest.hpp"
#include "psymort/rng.hpp"
#include "psymort/synth.hpp"
#include "psymort/tables.hpp"
#include "psymort/version.hpp"

namespace fs = std::filesystem;
using namespace psymort;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitIntegrity = 4;
constexpr int kExitFold = 5;

void ensure_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());
}

/// Parses the bundle from data_dir and applies the integrity policy: strict
/// aborts on violations, lenient reports them on stderr and continues.
RawTables load_bundle(const fs::path& data_dir, bool strict, RunManifest& manifest) {
    for (const char* name : {kPatientsFile, kAdmissionsFile, kDiagnosesFile, kPrescriptionsFile,
                             kProceduresFile}) {
        const fs::path file = data_dir / name;
        if (!fs::exists(file)) {
            throw SchemaError("missing input table " + file.string());
        }
        manifest.add_input(file);
    }
    LoadResult loaded = load_tables(data_dir, ParseOptions{strict});
    if (!loaded.skipped.empty()) {
        std::cerr << "warning: skipped " << loaded.skipped.size() << " malformed rows\n";
    }
    const auto violations = validate_referential_integrity(loaded.tables);
    if (!violations.empty()) {
        if (strict) {
            throw IntegrityError("referential integrity: " + std::to_string(violations.size()) +
                                 " dangling references (first: " + violations.front().table +
                                 " row " + std::to_string(violations.front().row) + " " +
                                 violations.front().field + "=" +
                                 std::to_string(violations.front().value) + ")");
        }
        std::cerr << "warning: " << violations.size()
                  << " referential-integrity violations (dangling rows are ignored)\n";
    }
    return std::move(loaded.tables);
}

int cmd_synth(const fs::path& config_path, const fs::path& out_dir, std::int64_t seed_override) {
    SynthConfig config =
        config_path.empty() ? SynthConfig::defaults() : parse_synth_config(config_path);
    if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);
    config.validate();

    ensure_out_dir(out_dir);
    const RawTables tables = generate(config);
    write_tables(tables, out_dir);

    RunManifest manifest = RunManifest::create("synth", config.seed);
    if (!config_path.empty()) manifest.add_input(config_path);
    manifest.options["n_patients"] = std::to_string(config.n_patients);
    manifest.options["mortality_rate"] = std::to_string(config.mortality_rate);
    manifest.options["n_drug_codes"] = std::to_string(config.n_drug_codes);
    manifest.options["n_procedure_codes"] = std::to_string(config.n_procedure_codes);
    manifest.options["signal_codes"] = std::to_string(config.signal.size());
    for (const char* name : {kPatientsFile, kAdmissionsFile, kDiagnosesFile, kPrescriptionsFile,
                             kProceduresFile}) {
        manifest.add_input(out_dir / name);  // digests of what was produced
    }
    manifest.write(out_dir);

    const CohortSummary summary = summarize(build_cohort(tables));
    std::cout << "generated " << tables.patients.size() << " patients, "
              << tables.admissions.size() << " admissions (" << summary.n_died
              << " deceased within 30 days)\n";
    return kExitOk;
}

int cmd_cohort(const fs::path& data_dir, const fs::path& out_dir, bool strict,
               std::size_t eda_top) {
    RunManifest manifest = RunManifest::create("cohort", 0);
    const RawTables tables = load_bundle(data_dir, strict, manifest);
    const std::vector<CohortEntry> cohort = build_cohort(tables);
    const CohortSummary summary = summarize(cohort);

    ensure_out_dir(out_dir);
    write_cohort_csv(cohort, out_dir / "cohort.csv");
    write_summary_json(summary, out_dir / "summary.json");
    for (const char* feature : kEdaFeatures) {
        const auto rows = summarize_mortality_by(cohort, feature,
                                                 eda_top == 0 ? kAllCategories : eda_top);
        write_eda_csv(rows, out_dir / (std::string("eda_") + feature + ".csv"));
    }
    manifest.options["strict"] = strict ? "true" : "false";
    manifest.options["eda_top"] = std::to_string(eda_top);
    manifest.write(out_dir);

    std::cout << "cohort: " << summary.n_patients << " patients, " << summary.n_died
              << " died (" << summary.mortality_rate * 100.0 << "%), " << summary.n_survived
              << " survived\n";
    return kExitOk;
}

int cmd_eval(const fs::path& data_dir, const fs::path& out_dir, const std::string& algorithms,
             std::uint64_t seed, int folds, bool stratified, bool fit_global, bool strict,
             bool export_matrix) {
    std::vector<Algorithm> selected;
    if (algorithms == "all") {
        selected = {Algorithm::logistic_regression, Algorithm::random_forest, Algorithm::svm_rbf,
                    Algorithm::knn};
    } else {
        std::stringstream parts(algorithms);
        std::string name;
        while (std::getline(parts, name, ',')) selected.push_back(algorithm_from_name(name));
        if (selected.empty()) throw UsageError("no algorithms requested");
    }

    RunManifest manifest = RunManifest::create("eval", seed);
    const RawTables tables = load_bundle(data_dir, strict, manifest);
    const std::vector<CohortEntry> cohort = build_cohort(tables);

    CvOptions opts;
    opts.k = folds;
    opts.seed = seed;
    opts.stratified = stratified;
    opts.fit_global = fit_global;

    EvalReport report;
    report.k = folds;
    report.seed = seed;
    report.stratified = stratified;
    report.fit_global = fit_global;
    for (const Algorithm algorithm : selected) {
        const ModelSpec spec = ModelSpec::defaults(algorithm);
        AlgorithmEval eval = cross_validate(spec, cohort, opts);
        std::cout << eval.algorithm << ": mean AUC " << eval.mean_auc << '\n';
        report.algorithms.push_back(std::move(eval));
    }

    ensure_out_dir(out_dir);
    write_eval_report_json(report, out_dir / "eval_report.json");
    write_roc_points_csv(report, out_dir / "roc_points.csv");
    if (export_matrix) {
        const FeatureSpace space = fit_feature_space(cohort);
        write_matrix_csv(transform(space, cohort), out_dir / "matrix.csv");
    }
    manifest.options["algorithms"] = algorithms;
    manifest.options["folds"] = std::to_string(folds);
    manifest.options["stratified"] = stratified ? "true" : "false";
    manifest.options["fit_global"] = fit_global ? "true" : "false";
    manifest.write(out_dir);
    return kExitOk;
}

int cmd_importance(const fs::path& data_dir, const fs::path& out_dir, const std::string& model_name,
                   int n_repeats, std::size_t top, std::uint64_t seed, const fs::path& code_names,
                   bool in_sample, bool strict, double holdout) {
    const Algorithm algorithm = algorithm_from_name(model_name);
    RunManifest manifest = RunManifest::create("importance", seed);
    const RawTables tables = load_bundle(data_dir, strict, manifest);
    const std::vector<CohortEntry> cohort = build_cohort(tables);
    if (cohort.size() < 4) throw UsageError("cohort too small for a train/holdout split");

    // Seeded train/holdout split; encoders fit on the training side only.
    std::vector<std::size_t> order(cohort.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "holdout_split"));
    rng.shuffle(order);
    const std::size_t n_test = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                            static_cast<double>(cohort.size()) *
                                                            holdout));
    std::vector<CohortEntry> train_cohort, test_cohort;
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_test ? test_cohort : train_cohort).push_back(cohort[order[i]]);
    }

    const FeatureSpace space = fit_feature_space(train_cohort);
    const FeatureMatrix train_x = transform(space, train_cohort);
    const std::vector<std::uint8_t> train_y = labels(train_cohort);

    ModelSpec spec = ModelSpec::defaults(algorithm, derive_seed(seed, "model"));
    const TrainedModel model = fit(spec, train_x, train_y);

    ImportanceReport report;
    if (in_sample) {
        report = permutation_importance(model, train_x, train_y, n_repeats,
                                        derive_seed(seed, "importance"));
    } else {
        const FeatureMatrix test_x = transform(space, test_cohort);
        const std::vector<std::uint8_t> test_y = labels(test_cohort);
        report = permutation_importance(model, test_x, test_y, n_repeats,
                                        derive_seed(seed, "importance"));
    }
    if (!code_names.empty()) {
        manifest.add_input(code_names);
        report = apply_code_names(report, load_code_names(code_names));
    }
    const ImportanceReport truncated = top == 0 ? report : top_features(report, top);

    ensure_out_dir(out_dir);
    write_importance_csv(truncated, out_dir / "importance.csv");
    write_importance_json(truncated, out_dir / "importance.json");
    manifest.options["model"] = model_name;
    manifest.options["n_repeats"] = std::to_string(n_repeats);
    manifest.options["top"] = std::to_string(top);
    manifest.options["in_sample"] = in_sample ? "true" : "false";
    manifest.options["holdout"] = std::to_string(holdout);
    manifest.write(out_dir);

    std::cout << "importance: baseline AUC " << report.baseline_auc << ", top feature "
              << (truncated.entries.empty() ? std::string("n/a") : truncated.entries[0].feature)
              << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"30-day mortality pipeline over MIMIC-shaped tables"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    const char* env_data = std::getenv("PSYMORT_DATA_DIR");
    const std::string default_data = env_data ? env_data : "";

    // synth
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic five-table bundle");
    std::string synth_config;
    std::string synth_out = "synth_out";
    std::int64_t synth_seed = -1;
    synth_cmd->add_option("--config", synth_config, "key=value generator config file");
    synth_cmd->add_option("--out-dir", synth_out, "output directory");
    synth_cmd->add_option("--seed", synth_seed, "override the config seed");

    // cohort
    auto* cohort_cmd = app.add_subcommand("cohort", "Extract the cohort and mortality breakdowns");
    std::string cohort_data = default_data;
    std::string cohort_out = "cohort_out";
    bool cohort_strict = false;
    std::size_t eda_top = 0;
    cohort_cmd->add_option("--data-dir", cohort_data, "directory with the five CSV tables");
    cohort_cmd->add_option("--out-dir", cohort_out, "output directory");
    cohort_cmd->add_flag("--strict", cohort_strict, "abort on malformed rows or dangling ids");
    cohort_cmd->add_option("--eda-top", eda_top, "truncate breakdowns to top K categories (0 = all)");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Cross-validated ROC-AUC per algorithm");
    std::string eval_data = default_data;
    std::string eval_out = "eval_out";
    std::string algorithms = "all";
    std::uint64_t eval_seed = 0;
    int folds = 5;
    bool stratified = false;
    bool fit_global = false;
    bool eval_strict = false;
    bool export_matrix = false;
    eval_cmd->add_option("--data-dir", eval_data, "directory with the five CSV tables");
    eval_cmd->add_option("--out-dir", eval_out, "output directory");
    eval_cmd->add_option("--algorithms", algorithms, "comma list of lr,rf,svm,knn or 'all'");
    eval_cmd->add_option("--seed", eval_seed, "master seed");
    eval_cmd->add_option("--folds", folds, "fold count");
    eval_cmd->add_flag("--stratified", stratified, "class-balanced folds");
    eval_cmd->add_flag("--fit-global", fit_global, "fit encoders once on the full cohort");
    eval_cmd->add_flag("--strict", eval_strict, "abort on malformed rows or dangling ids");
    eval_cmd->add_flag("--export-matrix", export_matrix, "also write the full design matrix");

    // importance
    auto* imp_cmd = app.add_subcommand("importance", "Permutation feature importance");
    std::string imp_data = default_data;
    std::string imp_out = "importance_out";
    std::string imp_model = "rf";
    int n_repeats = 5;
    std::size_t top = 10;
    std::uint64_t imp_seed = 0;
    std::string code_names;
    bool in_sample = false;
    bool imp_strict = false;
    double holdout = 0.25;
    imp_cmd->add_option("--data-dir", imp_data, "directory with the five CSV tables");
    imp_cmd->add_option("--out-dir", imp_out, "output directory");
    imp_cmd->add_option("--model", imp_model, "algorithm to explain (lr, rf, svm, knn)");
    imp_cmd->add_option("--n-repeats", n_repeats, "permutations per feature");
    imp_cmd->add_option("--top", top, "rows in the exported report (0 = all)");
    imp_cmd->add_option("--seed", imp_seed, "master seed");
    imp_cmd->add_option("--code-names", code_names, "CODE,NAME lookup CSV for readable features");
    imp_cmd->add_flag("--in-sample", in_sample, "evaluate on the training split");
    imp_cmd->add_flag("--strict", imp_strict, "abort on malformed rows or dangling ids");
    imp_cmd->add_option("--holdout", holdout, "held-out fraction for evaluation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth_config, synth_out, synth_seed);
        if (cohort_cmd->parsed()) {
            if (cohort_data.empty()) throw UsageError("--data-dir is required");
            return cmd_cohort(cohort_data, cohort_out, cohort_strict, eda_top);
        }
        if (eval_cmd->parsed()) {
            if (eval_data.empty()) throw UsageError("--data-dir is required");
            return cmd_eval(eval_data, eval_out, algorithms, eval_seed, folds, stratified,
                            fit_global, eval_strict, export_matrix);
        }
        if (imp_cmd->parsed()) {
            if (imp_data.empty()) throw UsageError("--data-dir is required");
            return cmd_importance(imp_data, imp_out, imp_model, n_repeats, top, imp_seed,
                                  code_names, in_sample, imp_strict, holdout);
        }
    } catch (const FoldError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFold;
    } catch (const IntegrityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIntegrity;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
