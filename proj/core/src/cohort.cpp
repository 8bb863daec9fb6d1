#include "psymort/cohort.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "psymort/csv.hpp"
#include "psymort/errors.hpp"

namespace psymort {

namespace {

bool is_eda_feature(const std::string& feature) {
    for (const char* name : kEdaFeatures) {
        if (feature == name) return true;
    }
    return false;
}

const std::optional<std::string>& admission_field(const AdmissionRecord& a,
                                                  const std::string& feature) {
    if (feature == "admission_type") return a.admission_type;
    if (feature == "insurance") return a.insurance;
    if (feature == "language") return a.language;
    if (feature == "religion") return a.religion;
    if (feature == "marital_status") return a.marital_status;
    return a.ethnicity;
}

}  // namespace

CohortSummary summarize(std::span<const CohortEntry> cohort) {
    CohortSummary s;
    s.n_patients = static_cast<std::int64_t>(cohort.size());
    for (const auto& entry : cohort) {
        if (entry.died_within_30d) ++s.n_died;
    }
    s.n_survived = s.n_patients - s.n_died;
    s.mortality_rate =
        s.n_patients > 0 ? static_cast<double>(s.n_died) / static_cast<double>(s.n_patients) : 0.0;
    return s;
}

std::optional<std::int64_t> select_index_admission(std::span<const AdmissionRecord> admissions,
                                                   std::span<const DiagnosisRecord> diagnoses) {
    const AdmissionRecord* best = nullptr;
    for (const auto& admission : admissions) {
        bool qualifies = false;
        for (const auto& dx : diagnoses) {
            if (dx.hadm_id == admission.hadm_id && is_mental_disease_code(dx.icd9_code)) {
                qualifies = true;
                break;
            }
        }
        if (!qualifies) continue;
        if (!best || admission.admit_time < best->admit_time ||
            (admission.admit_time == best->admit_time && admission.hadm_id < best->hadm_id)) {
            best = &admission;
        }
    }
    if (!best) return std::nullopt;
    return best->hadm_id;
}

bool label_mortality(const std::optional<Timestamp>& dod, Timestamp discharge_time) {
    if (!dod) return false;
    return dod->seconds <= discharge_time.seconds + 30 * kSecondsPerDay;
}

std::vector<CohortEntry> build_cohort(const RawTables& tables) {
    const TableIndex idx = build_index(tables);

    // Admissions carrying at least one mental-disease diagnosis.
    std::unordered_map<std::int64_t, bool> qualifying;
    for (const auto& dx : tables.diagnoses) {
        if (is_mental_disease_code(dx.icd9_code)) qualifying[dx.hadm_id] = true;
    }

    std::vector<const PatientRecord*> patients;
    patients.reserve(tables.patients.size());
    for (const auto& p : tables.patients) patients.push_back(&p);
    std::sort(patients.begin(), patients.end(),
              [](const PatientRecord* a, const PatientRecord* b) {
                  return a->subject_id < b->subject_id;
              });

    std::vector<CohortEntry> cohort;
    for (const PatientRecord* patient : patients) {
        const auto adm_it = idx.admissions_by_subject.find(patient->subject_id);
        if (adm_it == idx.admissions_by_subject.end()) continue;

        const AdmissionRecord* index_admission = nullptr;
        for (const std::size_t a : adm_it->second) {
            const AdmissionRecord& admission = tables.admissions[a];
            if (!qualifying.contains(admission.hadm_id)) continue;
            if (!index_admission || admission.admit_time < index_admission->admit_time ||
                (admission.admit_time == index_admission->admit_time &&
                 admission.hadm_id < index_admission->hadm_id)) {
                index_admission = &admission;
            }
        }
        if (!index_admission) continue;

        CohortEntry entry;
        entry.subject_id = patient->subject_id;
        entry.hadm_id = index_admission->hadm_id;
        entry.demographics["gender"] =
            patient->gender.empty() ? std::nullopt : std::optional<std::string>(patient->gender);
        for (const char* feature : kEdaFeatures) {
            if (std::string(feature) == "gender") continue;
            entry.demographics[feature] = admission_field(*index_admission, feature);
        }
        if (const auto rx = idx.prescriptions_by_hadm.find(entry.hadm_id);
            rx != idx.prescriptions_by_hadm.end()) {
            for (const std::size_t i : rx->second) {
                const auto& prescription = tables.prescriptions[i];
                if (!prescription.droppable()) entry.drug_codes.insert(*prescription.gsn);
            }
        }
        if (const auto pr = idx.procedures_by_hadm.find(entry.hadm_id);
            pr != idx.procedures_by_hadm.end()) {
            for (const std::size_t i : pr->second) {
                entry.procedure_codes.insert(tables.procedures[i].icd9_proc_code);
            }
        }
        entry.died_within_30d = label_mortality(patient->dod, index_admission->discharge_time);
        cohort.push_back(std::move(entry));
    }
    return cohort;
}

std::vector<MortalityRow> summarize_mortality_by(std::span<const CohortEntry> cohort,
                                                 const std::string& feature, std::size_t top_k) {
    if (!is_eda_feature(feature)) {
        throw UsageError("unknown demographic feature: " + feature);
    }
    std::map<std::string, MortalityRow> counts;
    for (const auto& entry : cohort) {
        const auto it = entry.demographics.find(feature);
        const std::string category =
            (it != entry.demographics.end() && it->second) ? *it->second : kAbsentCategory;
        auto& row = counts[category];
        row.category = category;
        if (entry.died_within_30d) ++row.n_died;
        else ++row.n_survived;
    }
    std::vector<MortalityRow> rows;
    rows.reserve(counts.size());
    for (auto& [_, row] : counts) rows.push_back(std::move(row));
    std::sort(rows.begin(), rows.end(), [](const MortalityRow& a, const MortalityRow& b) {
        if (a.n_died != b.n_died) return a.n_died > b.n_died;
        if (a.n_survived != b.n_survived) return a.n_survived > b.n_survived;
        return a.category < b.category;
    });
    if (rows.size() > top_k) rows.resize(top_k);
    return rows;
}

void write_cohort_csv(std::span<const CohortEntry> cohort, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "SUBJECT_ID,HADM_ID,LABEL,GENDER,MARITAL_STATUS,INSURANCE,ADMISSION_TYPE,"
           "RELIGION,ETHNICITY,LANGUAGE,DRUG_CODES,PROCEDURE_CODES\n";
    auto joined = [](const std::set<std::string>& codes) {
        std::string s;
        for (const auto& code : codes) {
            if (!s.empty()) s.push_back('|');
            s += code;
        }
        return s;
    };
    for (const auto& entry : cohort) {
        std::vector<std::string> row = {std::to_string(entry.subject_id),
                                        std::to_string(entry.hadm_id),
                                        entry.died_within_30d ? "1" : "0"};
        for (const char* feature : kEdaFeatures) {
            const auto it = entry.demographics.find(feature);
            row.push_back((it != entry.demographics.end() && it->second) ? *it->second : "");
        }
        row.push_back(joined(entry.drug_codes));
        row.push_back(joined(entry.procedure_codes));
        write_csv_row(out, row);
    }
}

void write_eda_csv(std::span<const MortalityRow> rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "CATEGORY,DIED,SURVIVED\n";
    for (const auto& row : rows) {
        const std::string fields[] = {row.category, std::to_string(row.n_died),
                                      std::to_string(row.n_survived)};
        write_csv_row(out, fields);
    }
}

void write_summary_json(const CohortSummary& summary, const std::filesystem::path& path) {
    nlohmann::ordered_json doc;
    doc["n_patients"] = summary.n_patients;
    doc["n_died"] = summary.n_died;
    doc["n_survived"] = summary.n_survived;
    doc["mortality_rate"] = summary.mortality_rate;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

}  // namespace psymort
