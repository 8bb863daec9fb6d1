#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "psymort/tables.hpp"

namespace psymort {

/// Demographic keys available for mortality breakdowns. gender and
/// admission_type appear only in the breakdowns; the model uses the
/// five keys listed in kModelFeatures.
inline constexpr const char* kEdaFeatures[] = {
    "gender",         "marital_status", "insurance", "admission_type",
    "religion",       "ethnicity",      "language",
};

/// Demographic features that enter the design matrix, in column-block order.
inline constexpr const char* kModelFeatures[] = {
    "language", "marital_status", "religion", "insurance", "ethnicity",
};

/// Category under which absent demographic values are reported in
/// mortality breakdowns.
inline constexpr const char* kAbsentCategory = "(absent)";

/// One patient with the admission selected for modeling, the feature codes
/// of that admission only, and the 30-day mortality label.
struct CohortEntry {
    std::int64_t subject_id = 0;
    std::int64_t hadm_id = 0;
    std::map<std::string, std::optional<std::string>> demographics;  // all EDA keys
    std::set<std::string> drug_codes;        // GSNs, rows without a GSN dropped
    std::set<std::string> procedure_codes;   // ICD-9 procedure codes
    bool died_within_30d = false;

    bool operator==(const CohortEntry&) const = default;
};

struct CohortSummary {
    std::int64_t n_patients = 0;
    std::int64_t n_died = 0;
    std::int64_t n_survived = 0;
    double mortality_rate = 0.0;
};

CohortSummary summarize(std::span<const CohortEntry> cohort);

/// Among one subject's admissions, the earliest one carrying at least one
/// mental-disease diagnosis; ties on admit_time break to the smaller hadm_id.
/// Absent when no admission qualifies.
std::optional<std::int64_t> select_index_admission(
    std::span<const AdmissionRecord> admissions,
    std::span<const DiagnosisRecord> diagnoses);

/// True iff the patient died on or before 30 days after discharge
/// (inclusive boundary; in-hospital deaths count).
bool label_mortality(const std::optional<Timestamp>& dod, Timestamp discharge_time);

/// One entry per patient with a qualifying admission, ordered by ascending
/// subject_id. Patients without a mental-disease diagnosis are excluded.
std::vector<CohortEntry> build_cohort(const RawTables& tables);

struct MortalityRow {
    std::string category;
    std::int64_t n_died = 0;
    std::int64_t n_survived = 0;

    bool operator==(const MortalityRow&) const = default;
};

inline constexpr std::size_t kAllCategories = static_cast<std::size_t>(-1);

/// Per-category death/survival counts for one demographic feature, sorted by
/// descending deaths (ties: descending survivors, then category name) and
/// truncated to top_k rows. Absent values fall under kAbsentCategory.
/// Throws UsageError for a feature outside kEdaFeatures.
std::vector<MortalityRow> summarize_mortality_by(std::span<const CohortEntry> cohort,
                                                 const std::string& feature,
                                                 std::size_t top_k = kAllCategories);

/// Cohort CSV: SUBJECT_ID,HADM_ID,LABEL,<EDA demographics>,DRUG_CODES,
/// PROCEDURE_CODES with code sets pipe-delimited.
void write_cohort_csv(std::span<const CohortEntry> cohort, const std::filesystem::path& path);

/// EDA CSV for one feature: CATEGORY,DIED,SURVIVED.
void write_eda_csv(std::span<const MortalityRow> rows, const std::filesystem::path& path);

void write_summary_json(const CohortSummary& summary, const std::filesystem::path& path);

}  // namespace psymort
