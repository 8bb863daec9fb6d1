#include "psymort/tables.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_set>

#include "psymort/csv.hpp"
#include "psymort/errors.hpp"

namespace psymort {

const char* const kPatientsFile = "PATIENTS.csv";
const char* const kAdmissionsFile = "ADMISSIONS.csv";
const char* const kDiagnosesFile = "DIAGNOSES_ICD.csv";
const char* const kPrescriptionsFile = "PRESCRIPTIONS.csv";
const char* const kProceduresFile = "PROCEDURES_ICD.csv";

namespace {

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

/// Empty, whitespace-only and literal NULL cells all mean "absent".
std::optional<std::string> cell_value(const std::string& raw) {
    const std::string t = trim(raw);
    if (t.empty() || upper(t) == "NULL") return std::nullopt;
    return t;
}

/// Maps required column names onto field positions in each record,
/// case-insensitively; extra columns are ignored.
class HeaderMap {
public:
    HeaderMap(const std::vector<std::string>& header, const std::vector<std::string>& required,
              const std::string& table) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            positions_.emplace(upper(trim(header[i])), i);
        }
        for (const std::string& name : required) {
            const auto it = positions_.find(name);
            if (it == positions_.end()) {
                throw SchemaError(table + ": missing required column " + name);
            }
            required_.emplace(name, it->second);
        }
    }

    const std::string& get(const std::vector<std::string>& row, const std::string& name) const {
        static const std::string kEmpty;
        const std::size_t pos = required_.at(name);
        return pos < row.size() ? row[pos] : kEmpty;
    }

private:
    std::unordered_map<std::string, std::size_t> positions_;
    std::unordered_map<std::string, std::size_t> required_;
};

std::int64_t parse_positive_id(const std::string& raw, const char* field, long line) {
    const std::string t = trim(raw);
    if (t.empty()) throw RowError(line, std::string(field) + " is empty");
    std::int64_t v = 0;
    for (const char c : t) {
        if (c < '0' || c > '9') {
            throw RowError(line, std::string(field) + " is not an integer: '" + t + "'");
        }
        v = v * 10 + (c - '0');
        if (v > 1'000'000'000'000'000LL) throw RowError(line, std::string(field) + " out of range");
    }
    if (v <= 0) throw RowError(line, std::string(field) + " must be positive");
    return v;
}

Timestamp parse_required_time(const std::string& raw, const char* field, long line) {
    const auto cell = cell_value(raw);
    if (!cell) throw RowError(line, std::string(field) + " is empty");
    const auto ts = parse_timestamp(*cell);
    if (!ts) throw RowError(line, std::string(field) + " is not a timestamp: '" + *cell + "'");
    return *ts;
}

std::optional<Timestamp> parse_optional_time(const std::string& raw, const char* field,
                                             long line) {
    const auto cell = cell_value(raw);
    if (!cell) return std::nullopt;
    const auto ts = parse_timestamp(*cell);
    if (!ts) throw RowError(line, std::string(field) + " is not a timestamp: '" + *cell + "'");
    return ts;
}

/// Shared parse loop: opens the file, checks the header, then builds one
/// record per data row via row_fn, honoring strict/lenient mode.
template <class Record, class RowFn>
ParseResult<Record> parse_file(const std::filesystem::path& path,
                               const std::vector<std::string>& required,
                               const std::string& table, const ParseOptions& opts,
                               RowFn&& row_fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError(table + ": cannot open " + path.string());

    CsvReader reader(in);
    const auto header = reader.next_record();
    if (!header) throw SchemaError(table + ": file is empty (no header row)");
    HeaderMap columns(*header, required, table);

    ParseResult<Record> result;
    while (auto row = reader.next_record()) {
        if (row->size() == 1 && (*row)[0].empty()) continue;  // blank line
        try {
            result.records.push_back(row_fn(columns, *row, reader.record_line()));
        } catch (const RowError& e) {
            if (opts.strict) throw;
            result.skipped.push_back({e.line, e.what()});
        }
    }
    return result;
}

}  // namespace

ParseResult<PatientRecord> parse_patients(const std::filesystem::path& path,
                                          const ParseOptions& opts) {
    std::unordered_set<std::int64_t> seen;
    return parse_file<PatientRecord>(
        path, {"SUBJECT_ID", "GENDER", "DOB", "DOD"}, "PATIENTS", opts,
        [&seen](const HeaderMap& cols, const std::vector<std::string>& row, long line) {
            PatientRecord rec;
            rec.subject_id = parse_positive_id(cols.get(row, "SUBJECT_ID"), "SUBJECT_ID", line);
            if (!seen.insert(rec.subject_id).second) {
                throw RowError(line, "duplicate SUBJECT_ID " + std::to_string(rec.subject_id));
            }
            rec.gender = cell_value(cols.get(row, "GENDER")).value_or("");
            rec.dob = parse_required_time(cols.get(row, "DOB"), "DOB", line);
            rec.dod = parse_optional_time(cols.get(row, "DOD"), "DOD", line);
            if (rec.dod && *rec.dod < rec.dob) {
                throw RowError(line, "DOD precedes DOB");
            }
            return rec;
        });
}

ParseResult<AdmissionRecord> parse_admissions(const std::filesystem::path& path,
                                              const ParseOptions& opts) {
    std::unordered_set<std::int64_t> seen;
    return parse_file<AdmissionRecord>(
        path,
        {"SUBJECT_ID", "HADM_ID", "ADMITTIME", "DISCHTIME", "ADMISSION_TYPE", "INSURANCE",
         "LANGUAGE", "RELIGION", "MARITAL_STATUS", "ETHNICITY"},
        "ADMISSIONS", opts,
        [&seen](const HeaderMap& cols, const std::vector<std::string>& row, long line) {
            AdmissionRecord rec;
            rec.subject_id = parse_positive_id(cols.get(row, "SUBJECT_ID"), "SUBJECT_ID", line);
            rec.hadm_id = parse_positive_id(cols.get(row, "HADM_ID"), "HADM_ID", line);
            if (!seen.insert(rec.hadm_id).second) {
                throw RowError(line, "duplicate HADM_ID " + std::to_string(rec.hadm_id));
            }
            rec.admit_time = parse_required_time(cols.get(row, "ADMITTIME"), "ADMITTIME", line);
            rec.discharge_time =
                parse_required_time(cols.get(row, "DISCHTIME"), "DISCHTIME", line);
            if (rec.discharge_time < rec.admit_time) {
                throw RowError(line, "DISCHTIME precedes ADMITTIME");
            }
            rec.admission_type = cell_value(cols.get(row, "ADMISSION_TYPE"));
            rec.insurance = cell_value(cols.get(row, "INSURANCE"));
            rec.language = cell_value(cols.get(row, "LANGUAGE"));
            rec.religion = cell_value(cols.get(row, "RELIGION"));
            rec.marital_status = cell_value(cols.get(row, "MARITAL_STATUS"));
            rec.ethnicity = cell_value(cols.get(row, "ETHNICITY"));
            return rec;
        });
}

ParseResult<DiagnosisRecord> parse_diagnoses(const std::filesystem::path& path,
                                             const ParseOptions& opts) {
    return parse_file<DiagnosisRecord>(
        path, {"SUBJECT_ID", "HADM_ID", "SEQ_NUM", "ICD9_CODE"}, "DIAGNOSES_ICD", opts,
        [](const HeaderMap& cols, const std::vector<std::string>& row, long line) {
            DiagnosisRecord rec;
            rec.subject_id = parse_positive_id(cols.get(row, "SUBJECT_ID"), "SUBJECT_ID", line);
            rec.hadm_id = parse_positive_id(cols.get(row, "HADM_ID"), "HADM_ID", line);
            rec.seq_num = parse_positive_id(cols.get(row, "SEQ_NUM"), "SEQ_NUM", line);
            const auto code = cell_value(cols.get(row, "ICD9_CODE"));
            if (!code) throw RowError(line, "ICD9_CODE is empty");
            rec.icd9_code = *code;
            return rec;
        });
}

ParseResult<PrescriptionRecord> parse_prescriptions(const std::filesystem::path& path,
                                                    const ParseOptions& opts) {
    return parse_file<PrescriptionRecord>(
        path, {"SUBJECT_ID", "HADM_ID", "DRUG", "GSN"}, "PRESCRIPTIONS", opts,
        [](const HeaderMap& cols, const std::vector<std::string>& row, long line) {
            PrescriptionRecord rec;
            rec.subject_id = parse_positive_id(cols.get(row, "SUBJECT_ID"), "SUBJECT_ID", line);
            rec.hadm_id = parse_positive_id(cols.get(row, "HADM_ID"), "HADM_ID", line);
            rec.drug_name = cell_value(cols.get(row, "DRUG")).value_or("");
            rec.gsn = cell_value(cols.get(row, "GSN"));
            return rec;
        });
}

ParseResult<ProcedureRecord> parse_procedures(const std::filesystem::path& path,
                                              const ParseOptions& opts) {
    return parse_file<ProcedureRecord>(
        path, {"SUBJECT_ID", "HADM_ID", "SEQ_NUM", "ICD9_CODE"}, "PROCEDURES_ICD", opts,
        [](const HeaderMap& cols, const std::vector<std::string>& row, long line) {
            ProcedureRecord rec;
            rec.subject_id = parse_positive_id(cols.get(row, "SUBJECT_ID"), "SUBJECT_ID", line);
            rec.hadm_id = parse_positive_id(cols.get(row, "HADM_ID"), "HADM_ID", line);
            const auto code = cell_value(cols.get(row, "ICD9_CODE"));
            if (!code) throw RowError(line, "ICD9_CODE is empty");
            rec.icd9_proc_code = *code;
            return rec;
        });
}

LoadResult load_tables(const std::filesystem::path& dir, const ParseOptions& opts) {
    LoadResult out;
    auto merge = [&out](auto parsed, auto& dest) {
        dest = std::move(parsed.records);
        out.skipped.insert(out.skipped.end(), parsed.skipped.begin(), parsed.skipped.end());
    };
    merge(parse_patients(dir / kPatientsFile, opts), out.tables.patients);
    merge(parse_admissions(dir / kAdmissionsFile, opts), out.tables.admissions);
    merge(parse_diagnoses(dir / kDiagnosesFile, opts), out.tables.diagnoses);
    merge(parse_prescriptions(dir / kPrescriptionsFile, opts), out.tables.prescriptions);
    merge(parse_procedures(dir / kProceduresFile, opts), out.tables.procedures);
    return out;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::string id_str(std::int64_t v) { return std::to_string(v); }

}  // namespace

void write_tables(const RawTables& tables, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string());

    {
        auto out = open_output(dir / kPatientsFile);
        out << "SUBJECT_ID,GENDER,DOB,DOD\n";
        for (const auto& p : tables.patients) {
            const std::string row[] = {id_str(p.subject_id), p.gender, format_timestamp(p.dob),
                                       p.dod ? format_timestamp(*p.dod) : std::string()};
            write_csv_row(out, row);
        }
    }
    {
        auto out = open_output(dir / kAdmissionsFile);
        out << "SUBJECT_ID,HADM_ID,ADMITTIME,DISCHTIME,ADMISSION_TYPE,INSURANCE,LANGUAGE,"
               "RELIGION,MARITAL_STATUS,ETHNICITY\n";
        for (const auto& a : tables.admissions) {
            const std::string row[] = {
                id_str(a.subject_id),          id_str(a.hadm_id),
                format_timestamp(a.admit_time), format_timestamp(a.discharge_time),
                a.admission_type.value_or(""), a.insurance.value_or(""),
                a.language.value_or(""),       a.religion.value_or(""),
                a.marital_status.value_or(""), a.ethnicity.value_or("")};
            write_csv_row(out, row);
        }
    }
    {
        auto out = open_output(dir / kDiagnosesFile);
        out << "SUBJECT_ID,HADM_ID,SEQ_NUM,ICD9_CODE\n";
        for (const auto& d : tables.diagnoses) {
            const std::string row[] = {id_str(d.subject_id), id_str(d.hadm_id),
                                       id_str(d.seq_num), d.icd9_code};
            write_csv_row(out, row);
        }
    }
    {
        auto out = open_output(dir / kPrescriptionsFile);
        out << "SUBJECT_ID,HADM_ID,DRUG,GSN\n";
        for (const auto& p : tables.prescriptions) {
            const std::string row[] = {id_str(p.subject_id), id_str(p.hadm_id), p.drug_name,
                                       p.gsn.value_or("")};
            write_csv_row(out, row);
        }
    }
    {
        auto out = open_output(dir / kProceduresFile);
        out << "SUBJECT_ID,HADM_ID,SEQ_NUM,ICD9_CODE\n";
        // SEQ_NUM is not part of the record; regenerate it per admission.
        std::unordered_map<std::int64_t, std::int64_t> seq;
        for (const auto& p : tables.procedures) {
            const std::string row[] = {id_str(p.subject_id), id_str(p.hadm_id),
                                       id_str(++seq[p.hadm_id]), p.icd9_proc_code};
            write_csv_row(out, row);
        }
    }
}

TableIndex build_index(const RawTables& tables) {
    TableIndex idx;
    idx.patient_by_subject.reserve(tables.patients.size());
    for (std::size_t i = 0; i < tables.patients.size(); ++i) {
        idx.patient_by_subject.emplace(tables.patients[i].subject_id, i);
    }
    idx.admission_by_hadm.reserve(tables.admissions.size());
    for (std::size_t i = 0; i < tables.admissions.size(); ++i) {
        idx.admission_by_hadm.emplace(tables.admissions[i].hadm_id, i);
        idx.admissions_by_subject[tables.admissions[i].subject_id].push_back(i);
    }
    for (std::size_t i = 0; i < tables.diagnoses.size(); ++i) {
        idx.diagnoses_by_hadm[tables.diagnoses[i].hadm_id].push_back(i);
    }
    for (std::size_t i = 0; i < tables.prescriptions.size(); ++i) {
        idx.prescriptions_by_hadm[tables.prescriptions[i].hadm_id].push_back(i);
    }
    for (std::size_t i = 0; i < tables.procedures.size(); ++i) {
        idx.procedures_by_hadm[tables.procedures[i].hadm_id].push_back(i);
    }
    return idx;
}

std::vector<IntegrityViolation> validate_referential_integrity(const RawTables& tables) {
    std::unordered_set<std::int64_t> subjects;
    subjects.reserve(tables.patients.size());
    for (const auto& p : tables.patients) subjects.insert(p.subject_id);
    std::unordered_set<std::int64_t> hadms;
    hadms.reserve(tables.admissions.size());
    for (const auto& a : tables.admissions) hadms.insert(a.hadm_id);

    std::vector<IntegrityViolation> violations;
    for (std::size_t i = 0; i < tables.admissions.size(); ++i) {
        if (!subjects.contains(tables.admissions[i].subject_id)) {
            violations.push_back(
                {"ADMISSIONS", i, "subject_id", tables.admissions[i].subject_id});
        }
    }
    auto check_detail = [&](const char* table, std::size_t i, std::int64_t subject,
                            std::int64_t hadm) {
        if (!hadms.contains(hadm)) violations.push_back({table, i, "hadm_id", hadm});
        if (!subjects.contains(subject)) violations.push_back({table, i, "subject_id", subject});
    };
    for (std::size_t i = 0; i < tables.diagnoses.size(); ++i) {
        check_detail("DIAGNOSES_ICD", i, tables.diagnoses[i].subject_id,
                     tables.diagnoses[i].hadm_id);
    }
    for (std::size_t i = 0; i < tables.prescriptions.size(); ++i) {
        check_detail("PRESCRIPTIONS", i, tables.prescriptions[i].subject_id,
                     tables.prescriptions[i].hadm_id);
    }
    for (std::size_t i = 0; i < tables.procedures.size(); ++i) {
        check_detail("PROCEDURES_ICD", i, tables.procedures[i].subject_id,
                     tables.procedures[i].hadm_id);
    }
    return violations;
}

bool is_mental_disease_code(std::string_view icd9) {
    if (icd9.size() < 3) return false;
    int value = 0;
    for (int i = 0; i < 3; ++i) {
        const char c = icd9[static_cast<std::size_t>(i)];
        if (c < '0' || c > '9') return false;
        value = value * 10 + (c - '0');
    }
    return value >= 290 && value <= 319;
}

}  // namespace psymort
