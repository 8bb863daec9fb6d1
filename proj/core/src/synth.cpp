#include "psymort/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "psymort/errors.hpp"
#include "psymort/rng.hpp"

namespace psymort {

namespace {

std::string zero_padded(std::int64_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*lld", width, static_cast<long long>(value));
    return buf;
}

Timestamp must_parse(const char* text) {
    return *parse_timestamp(text);
}

const Timestamp kDobBase = must_parse("2040-01-01 00:00:00");
const Timestamp kAdmitBase = must_parse("2101-01-01 00:00:00");

/// Geometric on {0,1,2,...} with the given mean, capped at cap.
std::int64_t truncated_geometric(Rng& rng, double mean, std::int64_t cap) {
    if (mean <= 0.0 || cap <= 0) return 0;
    const double q = 1.0 / (1.0 + mean);  // success probability
    const double u = 1.0 - rng.next_double();  // (0, 1]
    const double k = std::floor(std::log(u) / std::log(1.0 - q));
    return std::min<std::int64_t>(cap, static_cast<std::int64_t>(std::max(0.0, k)));
}

std::string draw_category(Rng& rng, const CategoryDist& dist, bool& absent) {
    absent = dist.missing_rate > 0.0 && rng.bernoulli(dist.missing_rate);
    if (absent) return {};
    double total = 0.0;
    for (const auto& [_, w] : dist.weights) total += w;
    double at = rng.next_double() * total;
    for (const auto& [category, w] : dist.weights) {
        at -= w;
        if (at < 0.0) return category;
    }
    return dist.weights.back().first;
}

struct PlantedCode {
    std::size_t vocab_index = 0;
    bool is_drug = true;
    double p_deceased = 0.0;
    double p_survivor = 0.0;
};

struct CodeSpace {
    std::vector<std::size_t> free_drugs;  // vocabulary indices without planted signal
    std::vector<std::size_t> free_procs;
    std::vector<PlantedCode> planted;
};

std::optional<std::int64_t> numeric_value(const std::string& code) {
    if (code.empty() || code.size() > 12) return std::nullopt;
    std::int64_t v = 0;
    for (const char c : code) {
        if (c < '0' || c > '9') return std::nullopt;
        v = v * 10 + (c - '0');
    }
    return v;
}

CodeSpace resolve_codes(const SynthConfig& cfg) {
    CodeSpace space;
    std::unordered_set<std::size_t> signal_drugs, signal_procs;
    for (const SignalCode& signal : cfg.signal) {
        PlantedCode planted;
        bool matched = false;
        const auto value = numeric_value(signal.code);
        if (value) {
            const std::int64_t drug_index = *value - 100'000;
            const std::int64_t proc_index = *value - 1'000;
            if (drug_index >= 0 && drug_index < cfg.n_drug_codes &&
                synth_drug_code(drug_index) == signal.code) {
                planted.vocab_index = static_cast<std::size_t>(drug_index);
                planted.is_drug = true;
                signal_drugs.insert(planted.vocab_index);
                matched = true;
            } else if (proc_index >= 0 && proc_index < cfg.n_procedure_codes &&
                       synth_procedure_code(proc_index) == signal.code) {
                planted.vocab_index = static_cast<std::size_t>(proc_index);
                planted.is_drug = false;
                signal_procs.insert(planted.vocab_index);
                matched = true;
            }
        }
        if (!matched) {
            throw ConfigError("signal: code " + signal.code +
                              " is not in the generated vocabularies");
        }
        const double odds = cfg.signal_base_rate / (1.0 - cfg.signal_base_rate);
        const double dead_odds = odds * signal.odds_multiplier;
        planted.p_survivor = cfg.signal_base_rate;
        planted.p_deceased = dead_odds / (1.0 + dead_odds);
        space.planted.push_back(planted);
    }
    for (std::int64_t i = 0; i < cfg.n_drug_codes; ++i) {
        if (!signal_drugs.contains(static_cast<std::size_t>(i))) {
            space.free_drugs.push_back(static_cast<std::size_t>(i));
        }
    }
    for (std::int64_t i = 0; i < cfg.n_procedure_codes; ++i) {
        if (!signal_procs.contains(static_cast<std::size_t>(i))) {
            space.free_procs.push_back(static_cast<std::size_t>(i));
        }
    }
    return space;
}

/// size distinct picks from pool, in pool order.
std::vector<std::size_t> sample_distinct(Rng& rng, const std::vector<std::size_t>& pool,
                                         std::int64_t size) {
    const std::int64_t n = static_cast<std::int64_t>(pool.size());
    const std::int64_t k = std::min(size, n);
    std::unordered_set<std::size_t> chosen;
    // Floyd's sampling over pool positions.
    for (std::int64_t j = n - k; j < n; ++j) {
        const std::size_t t = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(j + 1)));
        chosen.insert(chosen.contains(t) ? static_cast<std::size_t>(j) : t);
    }
    std::vector<std::size_t> picks;
    picks.reserve(chosen.size());
    for (std::size_t pos = 0; pos < pool.size(); ++pos) {
        if (chosen.contains(pos)) picks.push_back(pool[pos]);
    }
    return picks;
}

std::string mental_diagnosis_code(Rng& rng) {
    const std::int64_t prefix = 290 + static_cast<std::int64_t>(rng.below(30));
    return std::to_string(prefix) + zero_padded(static_cast<std::int64_t>(rng.below(100)), 2);
}

std::string other_diagnosis_code(Rng& rng) {
    if (rng.bernoulli(0.05)) {  // occasional V-code
        return "V" + zero_padded(static_cast<std::int64_t>(rng.below(92)), 2) +
               zero_padded(static_cast<std::int64_t>(rng.below(100)), 2);
    }
    const std::uint64_t pick = rng.below(969);
    const std::int64_t prefix =
        pick < 289 ? static_cast<std::int64_t>(pick) + 1 : static_cast<std::int64_t>(pick) + 31;
    return zero_padded(prefix, 3) + zero_padded(static_cast<std::int64_t>(rng.below(100)), 2);
}

const std::map<std::string, CategoryDist>& default_demographics() {
    static const std::map<std::string, CategoryDist> kDefaults = {
        {"gender", {{{"M", 0.55}, {"F", 0.45}}, 0.0}},
        {"admission_type", {{{"EMERGENCY", 0.72}, {"ELECTIVE", 0.18}, {"URGENT", 0.10}}, 0.0}},
        {"insurance",
         {{{"MEDICARE", 0.45}, {"PRIVATE", 0.30}, {"MEDICAID", 0.14}, {"GOVERNMENT", 0.07},
           {"SELF PAY", 0.04}},
          0.01}},
        {"language",
         {{{"ENGL", 0.70}, {"SPAN", 0.09}, {"RUSS", 0.05}, {"PORT", 0.04}, {"CANT", 0.03},
           {"FREN", 0.02}},
          0.07}},
        {"religion",
         {{{"CATHOLIC", 0.34}, {"PROTESTANT QUAKER", 0.14}, {"JEWISH", 0.09},
           {"NOT SPECIFIED", 0.17}, {"UNOBTAINABLE", 0.12}, {"BUDDHIST", 0.03},
           {"MUSLIM", 0.03}, {"OTHER", 0.08}},
          0.0}},
        {"marital_status",
         {{{"MARRIED", 0.41}, {"SINGLE", 0.28}, {"WIDOWED", 0.16}, {"DIVORCED", 0.10},
           {"SEPARATED", 0.02}},
          0.03}},
        {"ethnicity",
         {{{"WHITE", 0.70}, {"BLACK/AFRICAN AMERICAN", 0.10}, {"HISPANIC OR LATINO", 0.07},
           {"ASIAN", 0.04}, {"OTHER", 0.05}, {"UNKNOWN/NOT SPECIFIED", 0.04}},
          0.0}},
    };
    return kDefaults;
}

double parse_double_value(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse number '" + value + "'");
    }
}

std::int64_t parse_int_value(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse integer '" + value + "'");
    }
}

}  // namespace

std::string synth_drug_code(std::int64_t index) {
    return zero_padded(100000 + index, 6);
}

std::string synth_procedure_code(std::int64_t index) {
    return std::to_string(1000 + index);
}

void SynthConfig::validate() const {
    if (n_patients < 1) throw ConfigError("n_patients: must be >= 1");
    if (!(mortality_rate > 0.0 && mortality_rate < 1.0)) {
        throw ConfigError("mortality_rate: must lie strictly between 0 and 1");
    }
    if (multi_admission_fraction < 0.0 || multi_admission_fraction > 1.0) {
        throw ConfigError("multi_admission_fraction: must lie in [0, 1]");
    }
    if (max_admissions < 1 || (multi_admission_fraction > 0.0 && max_admissions < 2)) {
        throw ConfigError("max_admissions: must allow the configured admission counts");
    }
    if (late_death_fraction < 0.0 || late_death_fraction > 1.0) {
        throw ConfigError("late_death_fraction: must lie in [0, 1]");
    }
    if (n_drug_codes < 1) throw ConfigError("n_drug_codes: must be >= 1");
    if (n_procedure_codes < 1) throw ConfigError("n_procedure_codes: must be >= 1");
    if (drug_set_mean < 0.0) throw ConfigError("drug_set_mean: must be >= 0");
    if (procedure_set_mean < 0.0) throw ConfigError("procedure_set_mean: must be >= 0");
    if (null_gsn_rate < 0.0 || null_gsn_rate > 1.0) {
        throw ConfigError("null_gsn_rate: must lie in [0, 1]");
    }
    if (!(signal_base_rate > 0.0 && signal_base_rate < 1.0)) {
        throw ConfigError("signal_base_rate: must lie strictly between 0 and 1");
    }
    for (const SignalCode& s : signal) {
        if (!(s.odds_multiplier > 0.0)) {
            throw ConfigError("signal: odds multiplier for " + s.code + " must be positive");
        }
    }
    for (const auto& [feature, dist] : demographics) {
        if (dist.weights.empty()) throw ConfigError("demo." + feature + ": needs categories");
        for (const auto& [category, w] : dist.weights) {
            if (!(w > 0.0)) {
                throw ConfigError("demo." + feature + ": weight for " + category +
                                  " must be positive");
            }
        }
        if (dist.missing_rate < 0.0 || dist.missing_rate > 1.0) {
            throw ConfigError("demo." + feature + ".missing: must lie in [0, 1]");
        }
    }
    const std::int64_t quota = std::llround(static_cast<double>(n_patients) * mortality_rate);
    if (quota > n_patients) {
        throw ConfigError("mortality_rate: death quota exceeds the population");
    }
    resolve_codes(*this);  // signal codes must be inside the vocabularies
}

SynthConfig SynthConfig::defaults() {
    return SynthConfig{};
}

SynthConfig SynthConfig::null_preset(std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_patients = 2'000;
    cfg.mortality_rate = 0.25;
    cfg.multi_admission_fraction = 0.25;
    cfg.max_admissions = 8;
    cfg.n_drug_codes = 80;
    cfg.n_procedure_codes = 40;
    cfg.signal.clear();
    cfg.seed = seed;
    return cfg;
}

std::vector<SignalCode> SynthConfig::default_signal_spec() {
    std::vector<SignalCode> signal;
    const double drug_mult[] = {8, 8, 6, 6, 4, 4, 4, 3, 3, 2};
    for (std::size_t i = 0; i < std::size(drug_mult); ++i) {
        signal.push_back({synth_drug_code(static_cast<std::int64_t>(i)), drug_mult[i]});
    }
    signal.push_back({synth_procedure_code(0), 4});
    signal.push_back({synth_procedure_code(1), 3});
    return signal;
}

SynthConfig SynthConfig::signal_preset(std::uint64_t seed) {
    SynthConfig cfg = null_preset(seed);
    cfg.signal = default_signal_spec();
    return cfg;
}

SynthConfig parse_synth_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());

    SynthConfig cfg;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));

        if (key == "n_patients") cfg.n_patients = parse_int_value(key, value);
        else if (key == "mortality_rate") cfg.mortality_rate = parse_double_value(key, value);
        else if (key == "multi_admission_fraction") {
            cfg.multi_admission_fraction = parse_double_value(key, value);
        } else if (key == "max_admissions") {
            cfg.max_admissions = static_cast<int>(parse_int_value(key, value));
        } else if (key == "late_death_fraction") {
            cfg.late_death_fraction = parse_double_value(key, value);
        } else if (key == "n_drug_codes") cfg.n_drug_codes = parse_int_value(key, value);
        else if (key == "n_procedure_codes") cfg.n_procedure_codes = parse_int_value(key, value);
        else if (key == "drug_set_mean") cfg.drug_set_mean = parse_double_value(key, value);
        else if (key == "procedure_set_mean") {
            cfg.procedure_set_mean = parse_double_value(key, value);
        } else if (key == "null_gsn_rate") cfg.null_gsn_rate = parse_double_value(key, value);
        else if (key == "signal_base_rate") cfg.signal_base_rate = parse_double_value(key, value);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int_value(key, value));
        else if (key == "signal") {
            cfg.signal.clear();
            if (!value.empty()) {
                std::stringstream parts(value);
                std::string item;
                while (std::getline(parts, item, ',')) {
                    const auto colon = item.find(':');
                    if (colon == std::string::npos) {
                        throw ConfigError("signal: expected CODE:MULTIPLIER, got '" + item + "'");
                    }
                    cfg.signal.push_back({trim(item.substr(0, colon)),
                                          parse_double_value(key, trim(item.substr(colon + 1)))});
                }
            }
        } else if (key.starts_with("demo.")) {
            const std::string rest = key.substr(5);
            if (rest.ends_with(".missing")) {
                const std::string feature = rest.substr(0, rest.size() - 8);
                if (cfg.demographics.empty()) cfg.demographics = default_demographics();
                if (!cfg.demographics.contains(feature)) {
                    throw ConfigError(key + ": unknown demographic feature");
                }
                cfg.demographics[feature].missing_rate = parse_double_value(key, value);
            } else {
                if (cfg.demographics.empty()) cfg.demographics = default_demographics();
                if (!cfg.demographics.contains(rest)) {
                    throw ConfigError(key + ": unknown demographic feature");
                }
                CategoryDist dist;
                dist.missing_rate = cfg.demographics[rest].missing_rate;
                std::stringstream parts(value);
                std::string item;
                while (std::getline(parts, item, ',')) {
                    const auto colon = item.rfind(':');
                    if (colon == std::string::npos) {
                        throw ConfigError(key + ": expected CATEGORY:WEIGHT, got '" + item + "'");
                    }
                    dist.weights.emplace_back(
                        trim(item.substr(0, colon)),
                        parse_double_value(key, trim(item.substr(colon + 1))));
                }
                cfg.demographics[rest] = std::move(dist);
            }
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }
    cfg.validate();
    return cfg;
}

RawTables generate(const SynthConfig& raw_cfg) {
    SynthConfig cfg = raw_cfg;
    if (cfg.demographics.empty()) cfg.demographics = default_demographics();
    cfg.validate();
    const CodeSpace codes = resolve_codes(cfg);

    const std::int64_t n = cfg.n_patients;
    const std::int64_t n_deceased =
        std::llround(static_cast<double>(n) * cfg.mortality_rate);
    const std::int64_t n_multi =
        std::llround(static_cast<double>(n) * cfg.multi_admission_fraction);

    // Exact quotas first: which patients die, which are multi-admission.
    std::vector<std::size_t> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<bool> deceased(static_cast<std::size_t>(n), false);
    {
        Rng rng(derive_seed(cfg.seed, "labels"));
        rng.shuffle(order);
        for (std::int64_t i = 0; i < n_deceased; ++i) deceased[order[i]] = true;
    }
    std::vector<bool> multi(static_cast<std::size_t>(n), false);
    {
        Rng rng(derive_seed(cfg.seed, "multi_admission"));
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        for (std::int64_t i = 0; i < n_multi; ++i) multi[order[i]] = true;
    }

    RawTables tables;
    tables.patients.reserve(static_cast<std::size_t>(n));

    for (std::int64_t p = 0; p < n; ++p) {
        const std::int64_t subject_id = p + 1;
        Rng rng(derive_seed(cfg.seed, "patient", static_cast<std::uint64_t>(subject_id)));

        PatientRecord patient;
        patient.subject_id = subject_id;
        bool absent = false;
        patient.gender = draw_category(rng, cfg.demographics.at("gender"), absent);
        patient.dob = kDobBase + static_cast<std::int64_t>(rng.below(40 * 365)) * kSecondsPerDay +
                      static_cast<std::int64_t>(rng.below(kSecondsPerDay));

        const bool is_deceased = deceased[static_cast<std::size_t>(p)];
        std::int64_t n_admissions = 1;
        if (multi[static_cast<std::size_t>(p)] && cfg.max_admissions >= 2) {
            n_admissions = std::min<std::int64_t>(
                cfg.max_admissions, 2 + truncated_geometric(rng, 1.8, cfg.max_admissions - 2));
        }
        // Deceased patients carry the qualifying diagnosis on their final
        // admission; survivors qualify at a uniform position (admissions
        // before it stay free of mental-disease codes).
        const std::int64_t index_pos =
            is_deceased ? n_admissions - 1
                        : static_cast<std::int64_t>(rng.below(
                              static_cast<std::uint64_t>(n_admissions)));

        Timestamp cursor = kAdmitBase +
                           static_cast<std::int64_t>(rng.below(5 * 365)) * kSecondsPerDay +
                           static_cast<std::int64_t>(rng.below(kSecondsPerDay));
        Timestamp index_discharge = cursor;

        for (std::int64_t a = 0; a < n_admissions; ++a) {
            AdmissionRecord admission;
            admission.subject_id = subject_id;
            admission.hadm_id = 1'000'000 + p * cfg.max_admissions + a;
            admission.admit_time = cursor;
            const std::int64_t los = (1 + static_cast<std::int64_t>(rng.below(28))) *
                                         kSecondsPerDay +
                                     static_cast<std::int64_t>(rng.below(kSecondsPerDay));
            admission.discharge_time = admission.admit_time + los;
            cursor = admission.discharge_time +
                     (10 + static_cast<std::int64_t>(rng.below(170))) * kSecondsPerDay;

            auto draw_field = [&rng, &cfg](const char* feature) {
                bool missing = false;
                std::string v = draw_category(rng, cfg.demographics.at(feature), missing);
                return missing ? std::optional<std::string>() : std::optional<std::string>(v);
            };
            admission.admission_type = draw_field("admission_type");
            admission.insurance = draw_field("insurance");
            admission.language = draw_field("language");
            admission.religion = draw_field("religion");
            admission.marital_status = draw_field("marital_status");
            admission.ethnicity = draw_field("ethnicity");

            const bool is_index = a == index_pos;
            if (is_index) index_discharge = admission.discharge_time;

            // Diagnoses: the index admission always opens with a
            // mental-disease code; later admissions may carry one too.
            std::int64_t seq = 1;
            const bool mental_here =
                is_index || (a > index_pos && rng.bernoulli(0.5));
            if (mental_here) {
                tables.diagnoses.push_back(
                    {subject_id, admission.hadm_id, mental_diagnosis_code(rng), seq++});
            }
            const std::int64_t extra_dx = 1 + static_cast<std::int64_t>(rng.below(5));
            for (std::int64_t d = 0; d < extra_dx; ++d) {
                tables.diagnoses.push_back(
                    {subject_id, admission.hadm_id, other_diagnosis_code(rng), seq++});
            }

            // Prescriptions: planted signal codes are label-conditioned on
            // the index admission only; everything else is background noise.
            std::vector<std::size_t> drug_picks;
            if (is_index) {
                for (const PlantedCode& planted : codes.planted) {
                    if (!planted.is_drug) continue;
                    const double pr = is_deceased ? planted.p_deceased : planted.p_survivor;
                    if (rng.bernoulli(pr)) drug_picks.push_back(planted.vocab_index);
                }
            } else {
                for (const PlantedCode& planted : codes.planted) {
                    if (planted.is_drug && rng.bernoulli(planted.p_survivor)) {
                        drug_picks.push_back(planted.vocab_index);
                    }
                }
            }
            const std::int64_t noise_drugs = truncated_geometric(
                rng, cfg.drug_set_mean, static_cast<std::int64_t>(codes.free_drugs.size()));
            for (const std::size_t idx : sample_distinct(rng, codes.free_drugs, noise_drugs)) {
                drug_picks.push_back(idx);
            }
            std::sort(drug_picks.begin(), drug_picks.end());
            for (const std::size_t idx : drug_picks) {
                const std::string gsn = synth_drug_code(static_cast<std::int64_t>(idx));
                tables.prescriptions.push_back(
                    {subject_id, admission.hadm_id, gsn, "DRUG " + gsn});
                if (rng.bernoulli(cfg.null_gsn_rate)) {
                    // Order row without a usable code, as real data has.
                    tables.prescriptions.push_back({subject_id, admission.hadm_id, std::nullopt,
                                                    "COMPOUND " + std::to_string(idx)});
                }
            }

            std::vector<std::size_t> proc_picks;
            if (is_index) {
                for (const PlantedCode& planted : codes.planted) {
                    if (planted.is_drug) continue;
                    const double pr = is_deceased ? planted.p_deceased : planted.p_survivor;
                    if (rng.bernoulli(pr)) proc_picks.push_back(planted.vocab_index);
                }
            } else {
                for (const PlantedCode& planted : codes.planted) {
                    if (!planted.is_drug && rng.bernoulli(planted.p_survivor)) {
                        proc_picks.push_back(planted.vocab_index);
                    }
                }
            }
            const std::int64_t noise_procs = truncated_geometric(
                rng, cfg.procedure_set_mean, static_cast<std::int64_t>(codes.free_procs.size()));
            for (const std::size_t idx : sample_distinct(rng, codes.free_procs, noise_procs)) {
                proc_picks.push_back(idx);
            }
            std::sort(proc_picks.begin(), proc_picks.end());
            for (const std::size_t idx : proc_picks) {
                tables.procedures.push_back({subject_id, admission.hadm_id,
                                             synth_procedure_code(static_cast<std::int64_t>(idx))});
            }

            tables.admissions.push_back(std::move(admission));
        }

        if (is_deceased) {
            patient.dod = index_discharge +
                          static_cast<std::int64_t>(rng.below(30 * kSecondsPerDay + 1));
        } else if (rng.bernoulli(cfg.late_death_fraction)) {
            patient.dod = index_discharge + 30 * kSecondsPerDay + 1 +
                          static_cast<std::int64_t>(rng.below(335 * kSecondsPerDay));
        }
        tables.patients.push_back(std::move(patient));
    }
    return tables;
}

}  // namespace psymort
