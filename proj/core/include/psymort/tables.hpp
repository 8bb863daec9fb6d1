#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "psymort/timeutil.hpp"

namespace psymort {

struct PatientRecord {
    std::int64_t subject_id = 0;
    std::string gender;
    Timestamp dob;
    std::optional<Timestamp> dod;

    bool operator==(const PatientRecord&) const = default;
};

struct AdmissionRecord {
    std::int64_t hadm_id = 0;
    std::int64_t subject_id = 0;
    Timestamp admit_time;
    Timestamp discharge_time;
    std::optional<std::string> admission_type;
    std::optional<std::string> insurance;
    std::optional<std::string> language;
    std::optional<std::string> religion;
    std::optional<std::string> marital_status;
    std::optional<std::string> ethnicity;

    bool operator==(const AdmissionRecord&) const = default;
};

struct DiagnosisRecord {
    std::int64_t subject_id = 0;
    std::int64_t hadm_id = 0;
    std::string icd9_code;
    std::int64_t seq_num = 0;

    bool operator==(const DiagnosisRecord&) const = default;
};

struct PrescriptionRecord {
    std::int64_t subject_id = 0;
    std::int64_t hadm_id = 0;
    std::optional<std::string> gsn;
    std::string drug_name;

    /// Records without a GSN carry no usable feature code and are dropped
    /// during cohort construction; they are kept at parse time so the drop
    /// is explicit and countable.
    bool droppable() const { return !gsn.has_value(); }

    bool operator==(const PrescriptionRecord&) const = default;
};

struct ProcedureRecord {
    std::int64_t subject_id = 0;
    std::int64_t hadm_id = 0;
    std::string icd9_proc_code;

    bool operator==(const ProcedureRecord&) const = default;
};

struct RawTables {
    std::vector<PatientRecord> patients;
    std::vector<AdmissionRecord> admissions;
    std::vector<DiagnosisRecord> diagnoses;
    std::vector<PrescriptionRecord> prescriptions;
    std::vector<ProcedureRecord> procedures;

    bool operator==(const RawTables&) const = default;
};

/// Lookup structures over a RawTables bundle. Indices reference positions in
/// the owning table vectors; the bundle must outlive the index.
struct TableIndex {
    std::unordered_map<std::int64_t, std::size_t> patient_by_subject;
    std::unordered_map<std::int64_t, std::size_t> admission_by_hadm;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> admissions_by_subject;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> diagnoses_by_hadm;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> prescriptions_by_hadm;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> procedures_by_hadm;
};

TableIndex build_index(const RawTables& tables);

struct ParseOptions {
    /// Strict aborts on the first malformed row; lenient skips it and
    /// records the issue.
    bool strict = true;
};

struct RowIssue {
    long line = 0;
    std::string message;
};

template <class Record>
struct ParseResult {
    std::vector<Record> records;
    std::vector<RowIssue> skipped;
};

ParseResult<PatientRecord> parse_patients(const std::filesystem::path& path,
                                          const ParseOptions& opts = {});
ParseResult<AdmissionRecord> parse_admissions(const std::filesystem::path& path,
                                              const ParseOptions& opts = {});
ParseResult<DiagnosisRecord> parse_diagnoses(const std::filesystem::path& path,
                                             const ParseOptions& opts = {});
ParseResult<PrescriptionRecord> parse_prescriptions(const std::filesystem::path& path,
                                                    const ParseOptions& opts = {});
ParseResult<ProcedureRecord> parse_procedures(const std::filesystem::path& path,
                                              const ParseOptions& opts = {});

/// Canonical file names of the five-table bundle inside a data directory.
extern const char* const kPatientsFile;
extern const char* const kAdmissionsFile;
extern const char* const kDiagnosesFile;
extern const char* const kPrescriptionsFile;
extern const char* const kProceduresFile;

struct LoadResult {
    RawTables tables;
    std::vector<RowIssue> skipped;  // aggregated across tables (lenient mode)
};

/// Loads the five CSVs from a directory. Missing files and header mismatches
/// raise SchemaError regardless of mode.
LoadResult load_tables(const std::filesystem::path& dir, const ParseOptions& opts = {});

/// Writes the five CSVs into a directory using the canonical headers.
/// Parsing the written files yields records equal to the input.
void write_tables(const RawTables& tables, const std::filesystem::path& dir);

struct IntegrityViolation {
    std::string table;     // table whose row holds the dangling reference
    std::size_t row;       // 0-based position within that table
    std::string field;     // "subject_id" or "hadm_id"
    std::int64_t value;    // the dangling id

    bool operator==(const IntegrityViolation&) const = default;
};

/// Reports every dangling subject_id / hadm_id reference:
///   admissions.subject_id missing from patients,
///   diagnoses/prescriptions/procedures.hadm_id missing from admissions,
///   diagnoses/prescriptions/procedures.subject_id missing from patients.
/// An empty result certifies the bundle's cross-table invariants.
std::vector<IntegrityViolation> validate_referential_integrity(const RawTables& tables);

/// True iff the leading three characters are digits forming a number in
/// [290, 319], the ICD-9 chapter for mental disorders. 'V' and 'E' codes
/// are never mental-disease codes.
bool is_mental_disease_code(std::string_view icd9);

}  // namespace psymort
