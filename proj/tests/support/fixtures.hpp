#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "psymort/cohort.hpp"
#include "psymort/features.hpp"
#include "psymort/rng.hpp"
#include "psymort/tables.hpp"

namespace fixtures {

inline psymort::Timestamp ts(const char* text) {
    return *psymort::parse_timestamp(text);
}

/// Random binary matrix with the given cell density.
inline psymort::FeatureMatrix random_matrix(psymort::Rng& rng, std::size_t rows, std::size_t cols,
                                            double density) {
    std::vector<std::string> names;
    names.reserve(cols);
    for (std::size_t c = 0; c < cols; ++c) names.push_back("f" + std::to_string(c));
    psymort::FeatureMatrix m(std::move(names), rows);
    for (std::size_t r = 0; r < rows; ++r) {
        m.row_ids.push_back(static_cast<std::int64_t>(r) + 1);
        for (std::size_t c = 0; c < cols; ++c) {
            if (rng.bernoulli(density)) m.set(r, c);
        }
    }
    return m;
}

/// Random labels guaranteed to contain both classes.
inline std::vector<std::uint8_t> random_labels(psymort::Rng& rng, std::size_t n, double p1) {
    std::vector<std::uint8_t> y(n);
    for (auto& label : y) label = rng.bernoulli(p1) ? 1 : 0;
    y[0] = 1;
    y[n - 1] = 0;
    return y;
}

/// Minimal cohort entry with just codes and a label.
inline psymort::CohortEntry entry(std::int64_t subject, bool died,
                                  std::vector<std::string> drugs = {},
                                  std::vector<std::string> procs = {}) {
    psymort::CohortEntry e;
    e.subject_id = subject;
    e.hadm_id = subject * 10;
    e.died_within_30d = died;
    for (auto& code : drugs) e.drug_codes.insert(std::move(code));
    for (auto& code : procs) e.procedure_codes.insert(std::move(code));
    for (const char* feature : psymort::kEdaFeatures) e.demographics[feature] = std::nullopt;
    return e;
}

/// Two-patient bundle: subject 1 qualifies (mental code, dies day 10),
/// subject 2 has no qualifying diagnosis.
inline psymort::RawTables tiny_tables() {
    psymort::RawTables t;
    t.patients.push_back({1, "M", ts("2050-01-01 00:00:00"),
                          ts("2101-02-11 00:00:00")});  // 10 days after discharge
    t.patients.push_back({2, "F", ts("2051-01-01 00:00:00"), std::nullopt});
    t.admissions.push_back({11, 1, ts("2101-01-01 08:00:00"), ts("2101-02-01 00:00:00"),
                            "EMERGENCY", "MEDICARE", "ENGL", "CATHOLIC", "MARRIED", "WHITE"});
    t.admissions.push_back({21, 2, ts("2101-03-01 09:00:00"), ts("2101-03-05 00:00:00"),
                            "ELECTIVE", "PRIVATE", "SPAN", "JEWISH", "SINGLE", "ASIAN"});
    t.diagnoses.push_back({1, 11, "29620", 1});
    t.diagnoses.push_back({1, 11, "4019", 2});
    t.diagnoses.push_back({2, 21, "4019", 1});
    t.prescriptions.push_back({1, 11, "100001", "DRUG 100001"});
    t.prescriptions.push_back({1, 11, std::nullopt, "COMPOUND 7"});
    t.prescriptions.push_back({2, 21, "100002", "DRUG 100002"});
    t.procedures.push_back({1, 11, "1001"});
    return t;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

/// Fresh scratch directory under the test working directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const std::filesystem::path dir = std::filesystem::path("scratch") / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace fixtures
