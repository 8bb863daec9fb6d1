#include "psymort/features.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <map>

#include "psymort/csv.hpp"
#include "psymort/errors.hpp"

namespace psymort {

std::size_t FeatureSpace::width() const {
    std::size_t w = 0;
    for (const auto& enc : demographics) w += enc.categories.size();
    return w + drug_vocabulary.size() + procedure_vocabulary.size();
}

std::vector<std::string> FeatureSpace::column_names() const {
    std::vector<std::string> names;
    names.reserve(width());
    for (const auto& enc : demographics) {
        for (const auto& category : enc.categories) {
            names.push_back(enc.feature + "=" + category);
        }
    }
    for (const auto& code : drug_vocabulary) names.push_back("drug:" + code);
    for (const auto& code : procedure_vocabulary) names.push_back("proc:" + code);
    return names;
}

FeatureMatrix::FeatureMatrix(std::vector<std::string> column_names, std::size_t n_rows)
    : column_names_(std::move(column_names)),
      n_rows_(n_rows),
      stride_((column_names_.size() + 63) / 64),
      words_(n_rows * stride_, 0) {}

void FeatureMatrix::set(std::size_t row, std::size_t col, bool value) {
    std::uint64_t& word = words_[row * stride_ + col / 64];
    const std::uint64_t mask = 1ULL << (col % 64);
    if (value) word |= mask;
    else word &= ~mask;
}

bool FeatureMatrix::get(std::size_t row, std::size_t col) const {
    return (words_[row * stride_ + col / 64] >> (col % 64)) & 1ULL;
}

std::span<const std::uint64_t> FeatureMatrix::row_words(std::size_t row) const {
    return {words_.data() + row * stride_, stride_};
}

std::uint32_t FeatureMatrix::hamming(const FeatureMatrix& a, std::size_t row_a,
                                     const FeatureMatrix& b, std::size_t row_b) {
    const std::uint64_t* wa = a.words_.data() + row_a * a.stride_;
    const std::uint64_t* wb = b.words_.data() + row_b * b.stride_;
    std::uint32_t total = 0;
    for (std::size_t k = 0; k < a.stride_; ++k) {
        total += static_cast<std::uint32_t>(std::popcount(wa[k] ^ wb[k]));
    }
    return total;
}

std::size_t FeatureMatrix::count_ones(std::size_t row) const {
    const std::uint64_t* w = words_.data() + row * stride_;
    std::size_t total = 0;
    for (std::size_t k = 0; k < stride_; ++k) total += std::popcount(w[k]);
    return total;
}

std::vector<std::uint8_t> FeatureMatrix::extract_column(std::size_t col) const {
    std::vector<std::uint8_t> values(n_rows_);
    for (std::size_t r = 0; r < n_rows_; ++r) values[r] = get(r, col) ? 1 : 0;
    return values;
}

void FeatureMatrix::assign_column(std::size_t col, std::span<const std::uint8_t> values) {
    for (std::size_t r = 0; r < n_rows_; ++r) set(r, col, values[r] != 0);
}

FeatureMatrix FeatureMatrix::take_rows(std::span<const std::size_t> row_indices) const {
    FeatureMatrix out(column_names_, row_indices.size());
    out.row_ids.reserve(row_indices.size());
    for (std::size_t i = 0; i < row_indices.size(); ++i) {
        const std::size_t src = row_indices[i];
        std::copy_n(words_.data() + src * stride_, stride_, out.words_.data() + i * stride_);
        out.row_ids.push_back(src < row_ids.size() ? row_ids[src] : 0);
    }
    return out;
}

FeatureSpace fit_feature_space(std::span<const CohortEntry> cohort) {
    if (cohort.empty()) throw UsageError("cannot fit a feature space on an empty cohort");

    FeatureSpace space;
    for (const char* feature : kModelFeatures) {
        std::map<std::string, std::int64_t> counts;
        for (const auto& entry : cohort) {
            const auto it = entry.demographics.find(feature);
            if (it != entry.demographics.end() && it->second) ++counts[*it->second];
        }
        FeatureSpace::DemographicEncoder enc;
        enc.feature = feature;
        std::int64_t best = 0;
        for (const auto& [category, n] : counts) {
            enc.categories.push_back(category);  // map iteration: already sorted
            if (n > best) {  // ties keep the earlier (lexicographically smaller) value
                best = n;
                enc.fill = category;
            }
        }
        space.demographics.push_back(std::move(enc));
    }

    std::set<std::string> drugs, procedures;
    for (const auto& entry : cohort) {
        drugs.insert(entry.drug_codes.begin(), entry.drug_codes.end());
        procedures.insert(entry.procedure_codes.begin(), entry.procedure_codes.end());
    }
    space.drug_vocabulary.assign(drugs.begin(), drugs.end());
    space.procedure_vocabulary.assign(procedures.begin(), procedures.end());
    return space;
}

FeatureMatrix transform(const FeatureSpace& space, std::span<const CohortEntry> cohort) {
    FeatureMatrix matrix(space.column_names(), cohort.size());
    matrix.row_ids.reserve(cohort.size());

    // Column offsets of each block.
    std::vector<std::size_t> demo_offset;
    std::size_t offset = 0;
    for (const auto& enc : space.demographics) {
        demo_offset.push_back(offset);
        offset += enc.categories.size();
    }
    const std::size_t drug_offset = offset;
    const std::size_t proc_offset = drug_offset + space.drug_vocabulary.size();

    for (std::size_t r = 0; r < cohort.size(); ++r) {
        const CohortEntry& entry = cohort[r];
        matrix.row_ids.push_back(entry.subject_id);

        for (std::size_t f = 0; f < space.demographics.size(); ++f) {
            const auto& enc = space.demographics[f];
            const auto it = entry.demographics.find(enc.feature);
            std::optional<std::string> value =
                (it != entry.demographics.end()) ? it->second : std::nullopt;
            if (!value) value = enc.fill;
            if (!value) continue;  // feature entirely absent at fit time
            const auto pos =
                std::lower_bound(enc.categories.begin(), enc.categories.end(), *value);
            if (pos != enc.categories.end() && *pos == *value) {
                matrix.set(r, demo_offset[f] +
                                  static_cast<std::size_t>(pos - enc.categories.begin()));
            }
            // unseen value: block stays all-zero
        }
        for (const auto& code : entry.drug_codes) {
            const auto pos = std::lower_bound(space.drug_vocabulary.begin(),
                                              space.drug_vocabulary.end(), code);
            if (pos != space.drug_vocabulary.end() && *pos == code) {
                matrix.set(r, drug_offset +
                                  static_cast<std::size_t>(pos - space.drug_vocabulary.begin()));
            }
        }
        for (const auto& code : entry.procedure_codes) {
            const auto pos = std::lower_bound(space.procedure_vocabulary.begin(),
                                              space.procedure_vocabulary.end(), code);
            if (pos != space.procedure_vocabulary.end() && *pos == code) {
                matrix.set(r, proc_offset + static_cast<std::size_t>(
                                                pos - space.procedure_vocabulary.begin()));
            }
        }
    }
    return matrix;
}

std::vector<std::uint8_t> labels(std::span<const CohortEntry> cohort) {
    std::vector<std::uint8_t> y;
    y.reserve(cohort.size());
    for (const auto& entry : cohort) y.push_back(entry.died_within_30d ? 1 : 0);
    return y;
}

void write_matrix_csv(const FeatureMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "SUBJECT_ID";
    for (const auto& name : matrix.column_names()) out << ',' << csv_escape(name);
    out << '\n';
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        out << (r < matrix.row_ids.size() ? matrix.row_ids[r] : 0);
        for (std::size_t c = 0; c < matrix.cols(); ++c) {
            out << ',' << (matrix.get(r, c) ? '1' : '0');
        }
        out << '\n';
    }
}

}  // namespace psymort
