#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "psymort/tables.hpp"

namespace psymort {

/// Weighted categories for one demographic feature; missing_rate is the
/// probability of an absent value.
struct CategoryDist {
    std::vector<std::pair<std::string, double>> weights;
    double missing_rate = 0.0;
};

/// A code whose odds of appearing on the index admission are multiplied for
/// deceased patients: odds(deceased) = odds_multiplier * odds(survivor).
/// Multipliers below 1 plant protective codes.
struct SignalCode {
    std::string code;
    double odds_multiplier = 1.0;
};

struct SynthConfig {
    std::int64_t n_patients = 13'400;
    double mortality_rate = 0.138;            // deaths = round(n * rate), exact
    double multi_admission_fraction = 3400.0 / 13400.0;
    int max_admissions = 42;
    double late_death_fraction = 0.10;        // survivors with dod in (30d, 365d]
    std::int64_t n_drug_codes = 2'000;
    std::int64_t n_procedure_codes = 700;
    double drug_set_mean = 12.0;              // truncated-geometric set sizes
    double procedure_set_mean = 3.0;
    double null_gsn_rate = 0.05;              // extra prescription rows without a GSN
    double signal_base_rate = 0.20;           // survivor-side rate of signal codes
    std::vector<SignalCode> signal;
    std::map<std::string, CategoryDist> demographics;  // defaults when empty
    std::uint64_t seed = 42;

    /// Throws ConfigError naming the offending key.
    void validate() const;

    /// Full-scale defaults: 13,400 patients at 13.8% mortality, no signal.
    static SynthConfig defaults();

    /// 2,000-patient bundle with no planted signal; model AUCs over it
    /// center on 0.5.
    static SynthConfig null_preset(std::uint64_t seed);

    /// 2,000-patient bundle with the default planted signal: a compact code
    /// space plus strongly label-associated drug and procedure codes, enough
    /// for every model family to recover the outcome.
    static SynthConfig signal_preset(std::uint64_t seed);

    /// The codes planted by signal_preset, strongest first.
    static std::vector<SignalCode> default_signal_spec();
};

/// GSN-style drug code of the synthetic vocabulary ("100000", "100001", ...).
std::string synth_drug_code(std::int64_t index);
/// ICD-9-style procedure code of the synthetic vocabulary ("1000", ...).
std::string synth_procedure_code(std::int64_t index);

/// Flat key=value config file; '#' starts a comment. Unknown keys and
/// malformed values raise ConfigError naming the key.
SynthConfig parse_synth_config(const std::filesystem::path& path);

/// Deterministic table bundle: exactly n_patients subjects, each with a
/// mental-disease diagnosis on their index admission, deaths assigned by
/// exact quota, signal codes sampled conditional on the label. The output
/// always passes referential-integrity validation.
RawTables generate(const SynthConfig& config);

}  // namespace psymort
